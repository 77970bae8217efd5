#include "sma/quasistatic.hpp"

#include "sma/convex_solver.hpp"
#include "sma/csv.hpp"
#include "sma/errors.hpp"
#include "sma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace sma {

namespace {

SparseMatrix selection(const std::vector<int>& dofs, int n)
{
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < dofs.size(); ++i) t.emplace_back(static_cast<int>(i), dofs[i], 1.0);
    SparseMatrix s(static_cast<int>(dofs.size()), n);
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

DevTensor3 node_z(const FeSpace& s, const DofVector& y, int i)
{
    return DevTensor3(Vec5(y.segment<5>(s.z_offset() + 5 * i)));
}

} // namespace

BvpSystem::BvpSystem(FeSpace space, MaterialParams params, DissipationSpec dissipation)
    : space_(std::move(space)), params_(params), dissipation_(dissipation)
{
    params_.validate();
    if (space_.mesh().dirichlet_sides().empty())
        throw SingularSystem("BvpSystem: no Dirichlet side, displacements are not determined");
    form_ = assemble_A_nu(space_, params_);
    const SparseMatrix sel = selection(space_.free_u_dofs(), space_.num_dofs());
    H_free_rows_ = sel * form_.H;
    const SparseMatrix Huu = H_free_rows_ * SparseMatrix(sel.transpose());
    uu_.compute(Huu);
    if (uu_.info() != Eigen::Success || (uu_.vectorD().array() <= 0).any())
        throw SingularSystem("BvpSystem: elasticity block is not positive definite");
}

double BvpSystem::stored_energy(const DofVector& y) const
{
    double w = form_.energy(y);
    const Eigen::VectorXd& m = space_.lumped_mass();
    for (int i = 0; i < space_.num_nodes(); ++i) {
        const DevTensor3 z = node_z(space_, y, i);
        if (params_.rho == 0 && norm(z) > params_.c3) return std::numeric_limits<double>::infinity();
        w += m[i] * G_rho(params_, z);
    }
    return w;
}

double BvpSystem::distance(const DofVector& z_from, const DofVector& z_to) const
{
    const Eigen::VectorXd& m = space_.lumped_mass();
    double d = 0.0;
    for (int i = 0; i < space_.num_nodes(); ++i)
        d += m[i] * dissipation_.value(DevTensor3(Vec5(z_to.segment<5>(5 * i) - z_from.segment<5>(5 * i))));
    return d;
}

double BvpSystem::step_objective(const DofVector& y, const DofVector& load, const DofVector& anchor) const
{
    return stored_energy(y) - load.dot(y.head(space_.num_u())) + distance(anchor, y.tail(space_.num_z()));
}

double BvpSystem::dual_norm(const DofVector& L) const
{
    const std::vector<int>& hom = space_.homogeneous_dofs();
    if (!h0_) {
        const SparseMatrix sel = selection(hom, space_.num_dofs());
        const SparseMatrix K = sel * form_.H * SparseMatrix(sel.transpose());
        h0_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(K);
        if (h0_->info() != Eigen::Success || (h0_->vectorD().array() <= 0).any())
            throw SingularSystem("dual_norm: form is not definite on the homogeneous space");
    }
    Eigen::VectorXd l(hom.size());
    for (std::size_t k = 0; k < hom.size(); ++k) l[k] = L[hom[k]];
    return std::sqrt(std::max(0.0, l.dot(h0_->solve(l))));
}

void BvpSystem::relax_u(DofVector& y, const DofVector& load) const
{
    const std::vector<int>& fr = space_.free_u_dofs();
    if (fr.empty()) return;
    Eigen::VectorXd r = -(H_free_rows_ * y);
    for (std::size_t k = 0; k < fr.size(); ++k) r[k] += load[fr[k]];
    const Eigen::VectorXd du = uu_.solve(r);
    for (std::size_t k = 0; k < fr.size(); ++k) y[fr[k]] += du[k];
}

namespace {

// Nodal problem of the Gauss-Seidel sweep, scaled by 1/m_i:
//   1/2 a |zeta|^2 + b . zeta + G_rho(zeta) + D(zeta - anchor)
PointProblem nodal_problem(const MaterialParams& p, const DissipationDensity& d, double a, const Vec5& b,
                           const DevTensor3& anchor, double tol)
{
    PointProblem pb;
    pb.dissipation = &d;
    pb.anchor = anchor;
    pb.tolerance = tol;
    pb.smooth.modulus = a;
    if (p.rho > 0) {
        pb.smooth.value = [p, a, b](const Vec5& z) { return 0.5 * a * z.squaredNorm() + b.dot(z) + G_rho(p, DevTensor3(z)); };
        pb.smooth.gradient = [p, a, b](const Vec5& z) { return Vec5(a * z + b + grad_G_rho(p, DevTensor3(z)).v); };
        pb.smooth.hessian = [p, a](const Vec5& z) { return Mat5(a * Mat5::Identity() + hess_G_rho(p, DevTensor3(z))); };
        pb.smooth.lipschitz = a + lipschitz_F_rho(p) - 2.0 * p.c2;
    } else {
        pb.smooth.value = [a, b](const Vec5& z) { return 0.5 * a * z.squaredNorm() + b.dot(z); };
        pb.smooth.gradient = [a, b](const Vec5& z) { return Vec5(a * z + b); };
        pb.smooth.lipschitz = a;
        pb.origin_weight = p.c1;
        pb.ball_radius = p.c3;
    }
    return pb;
}

} // namespace

BvpSolution solve_bvp_step(const BvpStep& step, const BvpOptions& opt)
{
    if (!step.system) throw std::invalid_argument("solve_bvp_step: no system");
    const BvpSystem& sys = *step.system;
    const FeSpace& sp = sys.space();
    const MaterialParams& p = sys.params();
    const int n = sp.num_nodes();
    const int zo = sp.z_offset();
    if (step.dirichlet.size() != sp.num_dofs() || step.load.size() != sp.num_u() || step.anchor.size() != sp.num_z())
        throw std::invalid_argument("solve_bvp_step: size mismatch");

    DofVector y = step.start ? *step.start : step.dirichlet;
    if (!step.start) y.tail(sp.num_z()) = step.anchor;
    for (int d = 0; d < sp.num_u(); ++d)
        if (sp.u_dof_fixed(d)) y[d] = step.dirichlet[d];
    if (p.rho == 0)
        for (int i = 0; i < n; ++i) y.segment<5>(zo + 5 * i) = project_to_ball(node_z(sp, y, i), p.c3).v;

    const SparseMatrix& S = sys.form().S;
    const SparseMatrix Hzu = sys.form().H.bottomLeftCorner(sp.num_z(), sp.num_u());
    const Eigen::VectorXd& m = sp.lumped_mass();
    Eigen::VectorXd Sdiag(n);
    for (int i = 0; i < n; ++i) Sdiag[i] = S.coeff(i, i);

    BvpSolution sol;
    double prev_res = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        sys.relax_u(y, step.load);
        const Eigen::VectorXd hzu = Hzu * y.head(sp.num_u());
        double res = 0.0, scale = 0.0;
        const double node_tol = std::max({0.05 * opt.tolerance, 1e-12, std::min(1e-3, 0.01 * prev_res)});
        for (int i = 0; i < n; ++i) {
            Vec5 g = hzu.segment<5>(5 * i);
            for (SparseMatrix::InnerIterator it(S, i); it; ++it)
                if (it.row() != i) g += it.value() * y.segment<5>(zo + 5 * static_cast<int>(it.row()));
            const double a = Sdiag[i] / m[i];
            const Vec5 b = g / m[i];
            PointProblem pb = nodal_problem(p, sys.dissipation(), a, b,
                                            DevTensor3(Vec5(step.anchor.segment<5>(5 * i))), node_tol);
            const DevTensor3 zi = node_z(sp, y, i);
            const double r = stationarity_residual(pb, zi);
            res = std::max(res, r);
            scale = std::max(scale, b.norm());
            if (r <= node_tol * (1.0 + b.norm())) continue;
            pb.start = zi;
            y.segment<5>(zo + 5 * i) = solve_point(pb).z.v;
        }
        sol.sweeps = sweep;
        sol.residual = res / (1.0 + scale);
        prev_res = sol.residual;
        if (sol.residual <= opt.tolerance) {
            sys.relax_u(y, step.load);
            sol.y = y;
            sol.objective = sys.step_objective(y, step.load, step.anchor);
            sol.history.push_back(sol.objective);
            return sol;
        }
        sol.history.push_back(sys.step_objective(y, step.load, step.anchor));
    }
    throw NonConvergence("solve_bvp_step: residual " + std::to_string(sol.residual) + " after " +
                         std::to_string(opt.max_sweeps) + " sweeps");
}

// ---------------------------------------------------------------------------

namespace {

struct StepData {
    DofVector lift;  // joint
    DofVector load;  // 3n
};

StepData data_at(const FeSpace& sp, const LoadProgram& loads, double t)
{
    return {dirichlet_lifting(sp, loads, t), assemble_load(sp, loads, t)};
}

// <L(t), w> coefficients on joint DOFs: -H y_D + (l, 0).
DofVector L_vector(const BvpSystem& sys, const StepData& d)
{
    DofVector L = -(sys.form().H * d.lift);
    L.head(sys.space().num_u()) += d.load;
    return L;
}

double E_of(const BvpSystem& sys, const StepData& d, const DofVector& w)
{
    const DofVector y = w + d.lift;
    return sys.stored_energy(y) - d.load.dot(y.head(sys.space().num_u()));
}

} // namespace

EvolutionRecord run_incremental_bvp(std::shared_ptr<const BvpSystem> system, const LoadProgram& loads,
                                    const TimeGrid& grid, const std::optional<DofVector>& z0, const BvpOptions& opt)
{
    if (!system) throw std::invalid_argument("run_incremental_bvp: no system");
    grid.validate();
    loads.validate();
    if (grid.T() > loads.T() * (1 + 1e-12)) throw std::invalid_argument("run_incremental_bvp: grid exceeds the load program");
    const BvpSystem& sys = *system;
    const FeSpace& sp = sys.space();
    const MaterialParams& p = sys.params();

    EvolutionRecord rec;
    rec.system = system;
    rec.loads = loads;
    rec.grid = grid;

    DofVector zinit = z0 ? *z0 : DofVector::Zero(sp.num_z());
    if (zinit.size() != sp.num_z()) throw std::invalid_argument("run_incremental_bvp: z0 size mismatch");
    if (p.rho == 0)
        for (int i = 0; i < sp.num_nodes(); ++i)
            if (zinit.segment<5>(5 * i).norm() > p.c3)
                throw UnstableInitialState("run_incremental_bvp: |z0| > c3 at node " + std::to_string(i));

    const int N = grid.steps();
    std::vector<StepData> data;
    for (int i = 0; i <= N; ++i) data.push_back(data_at(sp, loads, grid.nodes[i]));

    // initial state: the t = 0 step anchored at z0 has to reproduce z0
    {
        BvpStep st{&sys, data[0].lift, data[0].load, zinit, std::nullopt};
        const BvpSolution s0 = solve_bvp_step(st, opt);
        rec.total_sweeps += s0.sweeps;
        double dev = 0.0;
        for (int i = 0; i < sp.num_nodes(); ++i)
            dev = std::max(dev, (s0.y.segment<5>(sp.z_offset() + 5 * i) - zinit.segment<5>(5 * i)).norm());
        if (dev > 1e-8)
            throw UnstableInitialState("run_incremental_bvp: initial state is not stable (z moves by " +
                                       std::to_string(dev) + ")");
        rec.states.push_back(s0.y);
    }
    for (int i = 1; i <= N; ++i) {
        DofVector start = rec.states.back();
        for (int d = 0; d < sp.num_u(); ++d)
            if (sp.u_dof_fixed(d)) start[d] = data[i].lift[d];
        const DofVector anchor = rec.states.back().tail(sp.num_z());
        BvpStep st{&sys, data[i].lift, data[i].load, anchor, start};
        const BvpSolution s = solve_bvp_step(st, opt);
        rec.total_sweeps += s.sweeps;
        rec.diss_increments.push_back(sys.distance(anchor, s.y.tail(sp.num_z())));
        rec.states.push_back(s.y);
    }

    // ledger in the homogeneous variables w = y - lift
    AprioriBound& ab = rec.apriori;
    double diss = 0.0, work = 0.0, power = 0.0, lam_max = 0.0, dsum = 0.0;
    DofVector L_prev;
    for (int i = 0; i <= N; ++i) {
        const DofVector w = rec.states[i] - data[i].lift;
        const DofVector L = L_vector(sys, data[i]);
        BvpLedger row;
        row.t = grid.nodes[i];
        row.stored_energy = sys.stored_energy(rec.states[i]);
        row.load_pairing = data[i].load.dot(rec.states[i].head(sp.num_u()));
        row.L_pairing = L.dot(w);
        row.q = sys.form().energy(data[i].lift) - data[i].load.dot(data[i].lift.head(sp.num_u()));
        row.energy = E_of(sys, data[i], w);
        if (i > 0) {
            const DofVector wp = rec.states[i - 1] - data[i - 1].lift;
            diss += rec.diss_increments[i - 1];
            work += E_of(sys, data[i], wp) - E_of(sys, data[i - 1], wp);
            power += (data[i].load - data[i - 1].load).dot(rec.states[i - 1].head(sp.num_u()));
            dsum += std::sqrt(2.0) * sys.dual_norm(L - L_prev);
        }
        row.dissipation = diss;
        row.work = work;
        row.load_power = power;
        row.residual = row.energy + diss - (rec.ledger.empty() ? row.energy : rec.ledger[0].energy) - work;
        rec.ledger.push_back(row);

        const double W0 = sys.stored_energy(w);
        if (i == 0) ab.C0 = W0 - L.dot(w);
        ab.observed = std::max(ab.observed, W0 + diss);
        lam_max = std::max(lam_max, std::sqrt(2.0) * sys.dual_norm(L));
        L_prev = L;
    }
    ab.K = lam_max + dsum;
    ab.M = 0.5 * (ab.K + std::sqrt(ab.K * ab.K + 4.0 * std::max(ab.C0, 0.0)));
    ab.bound = ab.C0 + ab.K * ab.M;
    ab.holds = ab.observed <= ab.bound * (1.0 + 1e-9) + 1e-12;

    if (p.nu == 0) rec.flags.push_back("nu = 0: outside the hypotheses of the joint space-time limit (nu > 0)");
    return rec;
}

// ---------------------------------------------------------------------------

namespace {

// Smooth fields on the refined mesh vanishing on the Dirichlet sides,
// projected onto the record's space.
std::vector<DofVector> smooth_competitor_directions(const BvpSystem& sys, int count)
{
    const FeSpace& coarse = sys.space();
    const FeSpace fine(coarse.mesh().refined());
    const Eigen::Vector3d L = coarse.mesh().extents();
    std::vector<DofVector> out;
    for (int k = 0; k < count; ++k) {
        DofVector y = fine.zeros();
        for (int i = 0; i < fine.num_nodes(); ++i) {
            const Eigen::Vector3d x = fine.mesh().node(i);
            double cut = 1.0;
            for (BoxSide s : coarse.mesh().dirichlet_sides()) {
                const int d = static_cast<int>(s) / 2;
                cut *= (static_cast<int>(s) % 2 == 0) ? x[d] / L[d] : 1.0 - x[d] / L[d];
            }
            const double f = k + 1.0;
            for (int c = 0; c < 3; ++c)
                y[3 * i + c] = cut * std::sin(M_PI * f * (x[0] / L[0] + 0.3 * c) + x[1] / L[1] - 0.5 * x[2] / L[2]);
            for (int c = 0; c < 5; ++c)
                y[fine.z_offset() + 5 * i + c] =
                    std::cos(M_PI * (f * x[(c + k) % 3] / L[(c + k) % 3] + 0.2 * c)) * std::sin(M_PI * x[(c + 1) % 3] / L[(c + 1) % 3] + 0.1 * k);
        }
        out.push_back(galerkin_project(coarse, fine, sys.params(), y).y);
    }
    return out;
}

} // namespace

EnergeticReport verify_energetic(const EvolutionRecord& record, int n_probes, double tol, std::uint64_t seed, int stride)
{
    EnergeticReport rep;
    rep.n_probes = n_probes;
    rep.seed = seed;
    if (!record.system || record.states.empty()) return rep;
    const BvpSystem& sys = *record.system;
    const FeSpace& sp = sys.space();
    const MaterialParams& p = sys.params();
    const std::vector<int>& hom = sp.homogeneous_dofs();

    double escale = 0.0;
    for (const BvpLedger& row : record.ledger) {
        rep.max_one_sided = std::max(rep.max_one_sided, row.residual);
        rep.max_gap = std::max(rep.max_gap, std::abs(row.residual));
        escale = std::max({escale, std::abs(row.energy), row.dissipation});
    }
    rep.one_sided_ok = rep.max_one_sided <= 1e-9 * (1.0 + escale);

    const int n_smooth = n_probes >= 8 ? 4 : 0;
    const std::vector<DofVector> smooth = n_smooth ? smooth_competitor_directions(sys, n_smooth) : std::vector<DofVector>{};

    auto admissible = [&](DofVector y) {
        if (p.rho == 0)
            for (int i = 0; i < sp.num_nodes(); ++i)
                y.segment<5>(sp.z_offset() + 5 * i) = project_to_ball(node_z(sp, y, i), p.c3).v;
        return y;
    };

    const int N = record.grid.steps();
    for (int i = 0; i <= N; ++i) {
        if (i % std::max(stride, 1) != 0 && i != N) continue;
        const double t = record.grid.nodes[i];
        const StepData d = data_at(sp, record.loads, t);
        const DofVector& y = record.states[i];
        const DofVector z = y.tail(sp.num_z());
        const double E = sys.stored_energy(y) - d.load.dot(y.head(sp.num_u()));
        const double hn = std::sqrt(std::max(0.0, 2.0 * sys.form().energy(y - d.lift))) + 1.0;

        NodeStability ns;
        ns.t = t;
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        auto violation = [&](const DofVector& yc) {
            const double Ec = sys.stored_energy(yc) - d.load.dot(yc.head(sp.num_u()));
            return E - (Ec + sys.distance(z, yc.tail(sp.num_z())));
        };

        BvpStep st{&sys, d.lift, d.load, z, y};
        try {
            BvpOptions o;
            o.tolerance = 1e-11;
            ns.optimal_gap = E - solve_bvp_step(st, o).objective;
        } catch (const NonConvergence&) {
            ns.optimal_gap = std::numeric_limits<double>::infinity();
        }

        ns.worst_probe = -std::numeric_limits<double>::infinity();
        int used = 0;
        {
            DofVector yc = y;
            sys.relax_u(yc, d.load);
            ns.worst_probe = std::max(ns.worst_probe, violation(yc));
            ++used;
        }
        const double scales[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
        for (const DofVector& dir : smooth) {
            const double dn = std::sqrt(std::max(1e-300, 2.0 * sys.form().energy(dir)));
            for (double s : scales)
                for (double sg : {1.0, -1.0}) {
                    if (used >= n_probes) break;
                    ns.worst_probe = std::max(ns.worst_probe, violation(admissible(y + sg * s * hn / dn * dir)));
                    ++used;
                }
        }
        while (used < n_probes) {
            DofVector dir = DofVector::Zero(sp.num_dofs());
            for (int k : hom) dir[k] = rng.normal();
            const double dn = std::sqrt(std::max(1e-300, 2.0 * sys.form().energy(dir)));
            const double s = scales[used % 5];
            ns.worst_probe = std::max(ns.worst_probe, violation(admissible(y + s * hn / dn * dir)));
            ++used;
        }
        ns.worst = std::max(ns.optimal_gap, ns.worst_probe);
        ns.passed = std::isfinite(E) && ns.worst <= tol * (1.0 + std::abs(E));
        rep.stable = rep.stable && ns.passed;
        rep.nodes.push_back(ns);
    }
    return rep;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const BvpSystem> BvpProblem::system(int n) const
{
    return system(n, params.rho, params.nu);
}

std::shared_ptr<const BvpSystem> BvpProblem::system(int n, double rho, double nu) const
{
    MaterialParams q = params;
    q.rho = rho;
    q.nu = nu;
    BoxMesh mesh(extents, {n, n, n}, dirichlet_sides);
    return std::make_shared<const BvpSystem>(FeSpace(std::move(mesh)), q, DissipationSpec(R));
}

LoadProgram traction_ramp_unload(double T, const Eigen::Vector3d& peak)
{
    LoadProgram lp = LoadProgram::zero(T);
    LoadFrame mid;
    mid.t = 0.5 * T;
    mid.traction.c = peak;
    lp.frames.insert(lp.frames.begin() + 1, mid);
    return lp;
}

EvolutionRecord spacetime_run(const BvpProblem& problem, double rho, double nu, double tau, int n)
{
    const double T = problem.loads.T();
    const int N = static_cast<int>(std::lround(T / tau));
    if (N < 1 || std::abs(N * tau - T) > 1e-9 * T)
        throw std::invalid_argument("spacetime_run: tau must divide T");
    return run_incremental_bvp(problem.system(n, rho, nu), problem.loads, TimeGrid::uniform(T, N), std::nullopt,
                               problem.options);
}

RecordDistance record_distance(const EvolutionRecord& a, const EvolutionRecord& b)
{
    const FeSpace& sa = a.system->space();
    const FeSpace& sb = b.system->space();
    SparseMatrix P;
    const bool same = sa.mesh().subdivisions() == sb.mesh().subdivisions();
    if (!same) P = prolongation(sa, sb);
    const SparseMatrix& H = b.system->form().H;

    std::set<double> times(a.grid.nodes.begin(), a.grid.nodes.end());
    times.insert(b.grid.nodes.begin(), b.grid.nodes.end());
    RecordDistance out;
    for (double t : times) {
        const int ia = a.grid.locate(t), ib = b.grid.locate(t);
        const DofVector ya = same ? a.states[ia] : DofVector(P * a.states[ia]);
        const DofVector d = ya - b.states[ib];
        out.state = std::max(out.state, std::sqrt(std::max(0.0, d.dot(H * d))));
        out.energy = std::max(out.energy, std::abs(a.ledger[ia].stored_energy - b.ledger[ib].stored_energy));
        out.dissipation = std::max(out.dissipation, std::abs(a.ledger[ia].dissipation - b.ledger[ib].dissipation));
    }
    return out;
}

HConvergenceTable nstep_h_convergence(const BvpProblem& problem, const std::vector<int>& ns, int N)
{
    HConvergenceTable tab;
    for (std::size_t k = 1; k < ns.size(); ++k)
        if (ns[k] != 2 * ns[k - 1]) throw std::invalid_argument("nstep_h_convergence: meshes must be nested by halving");
    const TimeGrid grid = TimeGrid::uniform(problem.loads.T(), N);
    for (int n : ns) tab.records.push_back(run_incremental_bvp(problem.system(n), problem.loads, grid, std::nullopt, problem.options));
    for (std::size_t k = 0; k < ns.size(); ++k) {
        HConvergenceRow row;
        row.n = ns[k];
        row.h = tab.records[k].system->space().mesh().h();
        if (k + 1 < ns.size()) {
            const EvolutionRecord& a = tab.records[k];
            const EvolutionRecord& b = tab.records[k + 1];
            const SparseMatrix P = prolongation(a.system->space(), b.system->space());
            const SparseMatrix& H = b.system->form().H;
            for (int i = 0; i <= N; ++i) {
                const DofVector d = P * a.states[i] - b.states[i];
                row.step_diffs.push_back(std::sqrt(std::max(0.0, d.dot(H * d))));
            }
            row.diff = *std::max_element(row.step_diffs.begin(), row.step_diffs.end());
        }
        tab.rows.push_back(row);
    }
    for (std::size_t k = 1; k + 1 < tab.rows.size(); ++k) {
        const double prev = tab.rows[k - 1].diff, cur = tab.rows[k].diff;
        if (!(cur < prev || (prev == 0.0 && cur == 0.0))) tab.monotone = false;
    }
    return tab;
}

void write_bvp_ledger_csv(std::ostream& os, const EvolutionRecord& record)
{
    csv::write_row(os, std::vector<std::string>{"t", "stored_energy", "load_pairing", "dissipation", "load_power",
                                                "L_pairing", "q", "energy", "work", "residual"});
    for (const BvpLedger& r : record.ledger)
        csv::write_row(os, std::vector<double>{r.t, r.stored_energy, r.load_pairing, r.dissipation, r.load_power,
                                               r.L_pairing, r.q, r.energy, r.work, r.residual});
}

} // namespace sma
