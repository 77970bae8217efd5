#pragma once

#include "sma/constitutive.hpp"
#include "sma/dissipation.hpp"
#include "sma/fem_space.hpp"

#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sma {

struct BvpOptions {
    double tolerance = 1e-9;  // relative first-order residual
    int max_sweeps = 20000;
};

// Discrete stored energy on a fixed space:
//   W(y) = 1/2 y^T H y + sum_i m_i G_rho(z_i)      (+ ball constraint for rho = 0)
// with lumped nodal weights m_i, and the dissipation distance
//   Dist(z1, z2) = sum_i m_i D(z2_i - z1_i).
class BvpSystem {
public:
    BvpSystem(FeSpace space, MaterialParams params, DissipationSpec dissipation);

    const FeSpace& space() const { return space_; }
    const MaterialParams& params() const { return params_; }
    const DissipationSpec& dissipation() const { return dissipation_; }
    const QuadraticForm& form() const { return form_; }

    // +infinity when some |z_i| > c3 and rho = 0.
    double stored_energy(const DofVector& y) const;
    double distance(const DofVector& z_from, const DofVector& z_to) const;
    // W(y) - <l, u> + Dist(anchor, z)
    double step_objective(const DofVector& y, const DofVector& load, const DofVector& anchor) const;

    // sqrt(L^T H0^{-1} L) for L given on all joint DOFs; only the homogeneous
    // entries are used (H0 = H on the homogeneous subspace).
    double dual_norm(const DofVector& L) const;

    // Solves for the free displacement DOFs with z and the Dirichlet values fixed.
    void relax_u(DofVector& y, const DofVector& load) const;

private:
    FeSpace space_;
    MaterialParams params_;
    DissipationSpec dissipation_;
    QuadraticForm form_;
    SparseMatrix H_free_rows_;  // rows of H at the free u DOFs
    Eigen::SimplicialLDLT<SparseMatrix> uu_;
    mutable std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> h0_;
};

// One incremental problem: minimize W(y) - <l, u> + Dist(anchor, z) over joint
// vectors whose u equals the lifting on the Dirichlet nodes.
struct BvpStep {
    const BvpSystem* system = nullptr;
    DofVector dirichlet;  // joint lifting vector
    DofVector load;       // 3n load coefficients
    DofVector anchor;     // 5n previous z
    std::optional<DofVector> start;
};

struct BvpSolution {
    DofVector y;
    double objective = 0.0;
    double residual = 0.0;  // relative
    int sweeps = 0;
    std::vector<double> history;  // objective after each sweep
};

BvpSolution solve_bvp_step(const BvpStep& step, const BvpOptions& opt = {});

struct BvpLedger {
    double t = 0.0;
    double stored_energy = 0.0;  // W(u, z)
    double load_pairing = 0.0;   // <l(t), u(t)>
    double dissipation = 0.0;    // cumulative
    double load_power = 0.0;     // cumulative sum <l_i - l_{i-1}, u_{i-1}>
    double L_pairing = 0.0;      // <L(t), (v, z)>
    double q = 0.0;              // C(u^Dir) - <l, u^Dir>
    double energy = 0.0;         // W0(v, z) - <L, (v, z)> + q
    double work = 0.0;           // cumulative E(t_i, w_{i-1}) - E(t_{i-1}, w_{i-1})
    double residual = 0.0;       // energy + dissipation - (energy_0 + work) <= 0
};

struct AprioriBound {
    double C0 = 0.0;     // W0(w_0) - <L(0), w_0>
    double K = 0.0;      // max |L_i|_* + sum |L_i - L_{i-1}|_*
    double M = 0.0;      // bound on sqrt(W0 + Diss)
    double bound = 0.0;  // C0 + K M
    double observed = 0.0;  // max_i W0(w_i) + Diss_i
    bool holds = false;
};

struct EvolutionRecord {
    std::shared_ptr<const BvpSystem> system;
    LoadProgram loads;
    TimeGrid grid;
    std::vector<DofVector> states;  // joint y = lifting + (v, z)
    std::vector<double> diss_increments;
    std::vector<BvpLedger> ledger;
    AprioriBound apriori;
    std::vector<std::string> flags;
    int total_sweeps = 0;
};

EvolutionRecord run_incremental_bvp(std::shared_ptr<const BvpSystem> system, const LoadProgram& loads,
                                    const TimeGrid& grid, const std::optional<DofVector>& z0 = std::nullopt,
                                    const BvpOptions& opt = {});

struct NodeStability {
    double t = 0.0;
    double optimal_gap = 0.0;    // E(y_i) - min (E + Dist(z_i, .))
    double worst_probe = 0.0;    // max over explicit competitors
    double worst = 0.0;
    bool passed = false;
};

struct EnergeticReport {
    std::vector<NodeStability> nodes;
    bool stable = true;
    double max_one_sided = 0.0;  // max residual, should be <= 0 up to tolerance
    double max_gap = 0.0;        // max |residual|
    bool one_sided_ok = true;
    int n_probes = 0;
    std::uint64_t seed = 0;
};

// Stability spot check at every `stride`-th node plus the final one.
EnergeticReport verify_energetic(const EvolutionRecord& record, int n_probes, double tol = 1e-8,
                                 std::uint64_t seed = 1, int stride = 1);

// Setup of a box problem; meshes are built with n subdivisions per side.
struct BvpProblem {
    Eigen::Vector3d extents{1.0, 1.0, 1.0};
    std::vector<BoxSide> dirichlet_sides{BoxSide::XMin};
    MaterialParams params;
    double R = 0.5;
    LoadProgram loads = LoadProgram::zero(1.0);
    BvpOptions options;

    std::shared_ptr<const BvpSystem> system(int n) const;
    std::shared_ptr<const BvpSystem> system(int n, double rho, double nu) const;
};

// Traction ramp-unload on x1 (0 -> peak at T/2 -> 0) with the default clamp on x0.
LoadProgram traction_ramp_unload(double T, const Eigen::Vector3d& peak);

EvolutionRecord spacetime_run(const BvpProblem& problem, double rho, double nu, double tau, int n);

// Differences between records on nested meshes and nested grids: the state
// difference is the H-norm on the finer mesh of the difference of the
// right-continuous interpolants, sup over the union of the time nodes.
struct RecordDistance {
    double state = 0.0, energy = 0.0, dissipation = 0.0;
};
RecordDistance record_distance(const EvolutionRecord& a, const EvolutionRecord& b);

struct HConvergenceRow {
    int n = 0;
    double h = 0.0;
    std::vector<double> step_diffs;  // per time node, to the next level
    double diff = 0.0;               // max of step_diffs
};

struct HConvergenceTable {
    std::vector<HConvergenceRow> rows;  // the last row has no difference
    std::vector<EvolutionRecord> records;
    bool monotone = true;  // only meaningful with >= 3 levels
};

HConvergenceTable nstep_h_convergence(const BvpProblem& problem, const std::vector<int>& ns, int N);

// Columns: t, stored_energy, load_pairing, dissipation, load_power, L_pairing, q, energy, work, residual.
void write_bvp_ledger_csv(std::ostream& os, const EvolutionRecord& record);

} // namespace sma
