#pragma once

#include "sma/convex_solver.hpp"
#include "sma/dissipation.hpp"
#include "sma/material.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace sma {

struct TimeGrid {
    std::vector<double> nodes;  // 0 = t_0 < ... < t_N = T

    static TimeGrid uniform(double T, int N);
    int steps() const { return static_cast<int>(nodes.size()) - 1; }
    double T() const { return nodes.back(); }
    double tau() const;
    // Index i with t_i <= t < t_{i+1} (right-continuous interpolant).
    int locate(double t) const;
    void validate() const;
};

// Continuous piecewise-linear sigma(t).
struct StressPath {
    std::vector<double> times;
    std::vector<SymTensor3> values;

    static StressPath constant(double T, const SymTensor3& s);
    // 0 -> peak*direction at T/2 -> 0 at T; direction is normalized.
    static StressPath ramp_unload(double T, double peak, const DevTensor3& direction);
    SymTensor3 at(double t) const;
    void validate() const;
};

// A fixed generic unit deviator used as default loading direction.
DevTensor3 default_direction();

struct PointState {
    SymTensor3 eps;
    DevTensor3 z;
};

struct PointLedger {
    double t = 0.0;
    double stored_energy = 0.0;    // W(eps, z)
    double energy = 0.0;           // W - sigma:eps
    double dissipation = 0.0;      // cumulative
    double work = 0.0;             // cumulative int sigma_dot : eps
    double residual = 0.0;         // (E + Diss) - (E_0 - work)
};

struct PointTrajectory {
    TimeGrid grid;
    std::vector<SymTensor3> stresses;
    std::vector<PointState> states;
    std::vector<double> diss_increments;  // size N, step i -> index i-1
    std::vector<PointLedger> ledger;
};

struct StepOptions {
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

// Reduced z-problem of one step: F(z) - sigma_dev:z + D(z - z_prev).
PointProblem reduced_step_problem(const MaterialParams& p, const DissipationDensity& d,
                                  const SymTensor3& sigma, const DevTensor3& z_prev,
                                  const StepOptions& opt = {});

PointState incremental_step(const MaterialParams& p, const DissipationDensity& d,
                            const SymTensor3& sigma, const DevTensor3& z_prev,
                            const StepOptions& opt = {});

// W - sigma:eps; finite for admissible states.
ExtendedReal step_energy(const MaterialParams& p, const SymTensor3& sigma, const PointState& y);

PointTrajectory run_constitutive(const MaterialParams& p, const DissipationDensity& d,
                                 const StressPath& path, const TimeGrid& grid,
                                 const PointState& init, const StepOptions& opt = {});

struct StabilityReport {
    double worst_probe = 0.0;       // max over random competitors
    double optimal_competitor = 0.0;
    double first_order = 0.0;
    double worst_violation = 0.0;
    bool passed = false;
    std::uint64_t seed = 0;
    int n_probes = 0;
};

StabilityReport verify_stability(const MaterialParams& p, const DissipationDensity& d,
                                 const SymTensor3& sigma, const PointState& state, int n_probes,
                                 double tol, std::uint64_t seed = 1);

std::vector<double> energy_balance_residual(const PointTrajectory& traj);

struct TemporalRow {
    double tau = 0.0;
    double err_eps = 0.0;
    double err_z = 0.0;
    double err = 0.0;        // sup_t sqrt(|d eps|^2 + |d z|^2) of the interpolants
    double nodal_err = 0.0;  // same, at the nodes of the coarse grid only
};

struct TemporalStudy {
    std::vector<TemporalRow> rows;
    double reference_tau = 0.0;
    std::optional<double> order;  // least-squares slope of log err against log tau
    bool degenerate = false;      // nodal errors at roundoff: the scheme is exact
};

TemporalStudy temporal_error_study(const MaterialParams& p, const DissipationDensity& d,
                                   const StressPath& path, const std::vector<double>& taus,
                                   double reference_tau, const PointState& init = {});

// Distance between two trajectories.  interpolant = true: sup over [0,T] of
// the difference of the right-continuous piecewise-constant interpolants.
// interpolant = false: max over the nodes of `a` only.
struct TrajectoryDistance {
    double eps = 0.0, z = 0.0, state = 0.0, energy = 0.0, dissipation = 0.0;
};
TrajectoryDistance trajectory_distance(const PointTrajectory& a, const PointTrajectory& ref,
                                       bool interpolant = true);

struct StepPair {
    SymTensor3 sigma1;
    DevTensor3 zbar1;
    SymTensor3 sigma2;
    DevTensor3 zbar2;
};

struct DependenceRow {
    double lhs = 0.0, rhs = 0.0;
    bool holds = false;
};

struct DependenceReport {
    std::vector<DependenceRow> rows;
    bool all_hold = true;
    double slack = 1e-8;
};

DependenceReport continuous_dependence_check(const MaterialParams& p, const DissipationDensity& d,
                                             const std::vector<StepPair>& pairs, double slack = 1e-8);

// Monitored trajectory-level estimate: max over nodes of
// |dy(t)|^2 / (|dy(0)|^2 + (sup|d sigma| + int|d sigma_dot|)^2).
double trajectory_dependence_ratio(const MaterialParams& p, const DissipationDensity& d,
                                   const StressPath& path1, const StressPath& path2,
                                   const TimeGrid& grid);

// Columns: t, eps_xx..eps_xy, z_1..z_5, stored_energy, dissipation, work, residual.
void write_trajectory_csv(std::ostream& os, const PointTrajectory& traj);

} // namespace sma
