#include "sma/constitutive.hpp"

#include "sma/csv.hpp"
#include "sma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sma {

TimeGrid TimeGrid::uniform(double T, int N)
{
    if (!(T > 0) || N < 1) throw std::invalid_argument("TimeGrid::uniform: need T > 0 and N >= 1");
    TimeGrid g;
    g.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) g.nodes[i] = T * static_cast<double>(i) / N;
    g.nodes[N] = T;
    return g;
}

double TimeGrid::tau() const
{
    double m = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) m = std::max(m, nodes[i] - nodes[i - 1]);
    return m;
}

int TimeGrid::locate(double t) const
{
    const double eps = 1e-12 * std::max(1.0, std::abs(T()));
    auto it = std::upper_bound(nodes.begin(), nodes.end(), t + eps);
    const int i = static_cast<int>(it - nodes.begin()) - 1;
    return std::clamp(i, 0, steps());
}

void TimeGrid::validate() const
{
    if (nodes.size() < 2) throw std::invalid_argument("TimeGrid: need at least one step");
    if (nodes.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("TimeGrid: nodes must increase strictly");
}

StressPath StressPath::constant(double T, const SymTensor3& s) { return {{0.0, T}, {s, s}}; }

StressPath StressPath::ramp_unload(double T, double peak, const DevTensor3& direction)
{
    const double n = norm(direction);
    if (!(n > 0)) throw std::invalid_argument("ramp_unload: zero direction");
    const SymTensor3 top = embed((peak / n) * direction);
    return {{0.0, 0.5 * T, T}, {SymTensor3::zero(), top, SymTensor3::zero()}};
}

SymTensor3 StressPath::at(double t) const
{
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    const double t0 = times[k - 1], t1 = times[k];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * values[k - 1] + w * values[k];
}

void StressPath::validate() const
{
    if (times.size() < 2 || times.size() != values.size())
        throw std::invalid_argument("StressPath: need >= 2 breakpoints with matching values");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("StressPath: times must increase strictly");
}

DevTensor3 default_direction()
{
    Vec5 v;
    v << 1.0, 2.0, 0.5, -1.0, 0.3;
    return DevTensor3(v.normalized());
}

PointProblem reduced_step_problem(const MaterialParams& p, const DissipationDensity& d,
                                  const SymTensor3& sigma, const DevTensor3& z_prev,
                                  const StepOptions& opt)
{
    const Vec5 b = dev(sigma).v;
    PointProblem pb;
    pb.dissipation = &d;
    pb.scale = 1.0;
    pb.anchor = z_prev;
    pb.start = z_prev;
    pb.tolerance = opt.tolerance;
    pb.max_iterations = opt.max_iterations;
    pb.smooth.modulus = 2.0 * p.c2;
    if (p.rho > 0) {
        pb.smooth.value = [p, b](const Vec5& z) { return F_rho(p, DevTensor3(z)) - b.dot(z); };
        pb.smooth.gradient = [p, b](const Vec5& z) { return Vec5(grad_F_rho(p, DevTensor3(z)).v - b); };
        pb.smooth.hessian = [p](const Vec5& z) { return hess_F_rho(p, DevTensor3(z)); };
        pb.smooth.lipschitz = lipschitz_F_rho(p);
    } else {
        const double c2 = p.c2;
        pb.smooth.value = [c2, b](const Vec5& z) { return c2 * z.squaredNorm() - b.dot(z); };
        pb.smooth.gradient = [c2, b](const Vec5& z) { return Vec5(2.0 * c2 * z - b); };
        pb.smooth.lipschitz = 2.0 * c2;
        pb.origin_weight = p.c1;
        pb.ball_radius = p.c3;
    }
    return pb;
}

PointState incremental_step(const MaterialParams& p, const DissipationDensity& d,
                            const SymTensor3& sigma, const DevTensor3& z_prev, const StepOptions& opt)
{
    if (p.rho == 0 && norm(z_prev) > p.c3)
        throw std::invalid_argument("incremental_step: |z_prev| > c3 with rho = 0");
    const PointSolution sol = solve_point(reduced_step_problem(p, d, sigma, z_prev, opt));
    PointState y;
    y.z = sol.z;
    y.eps = apply_C_inverse(p.elasticity, sigma) + embed(sol.z);
    return y;
}

ExtendedReal step_energy(const MaterialParams& p, const SymTensor3& sigma, const PointState& y)
{
    const ExtendedReal w = W_rho(p, y.eps, y.z);
    if (w.is_infinite()) return w;
    return w.value() - ddot(sigma, y.eps);
}

namespace {

// E(y) - min_{y'} [E(y') + D(z' - z)] at stress sigma; zero for stable states.
double optimal_competitor_gap(const MaterialParams& p, const DissipationDensity& d,
                              const SymTensor3& sigma, const PointState& y, double* e_out = nullptr)
{
    const ExtendedReal e = step_energy(p, sigma, y);
    if (e.is_infinite()) return INFINITY;
    const DevTensor3 anchor = p.rho == 0 ? project_to_ball(y.z, p.c3) : y.z;
    const PointState best = incremental_step(p, d, sigma, anchor);
    if (e_out) *e_out = e.value();
    return e.value() - (step_energy(p, sigma, best).value() + d.value(best.z - y.z));
}

} // namespace

PointTrajectory run_constitutive(const MaterialParams& p, const DissipationDensity& d,
                                 const StressPath& path, const TimeGrid& grid,
                                 const PointState& init, const StepOptions& opt)
{
    p.validate();
    path.validate();
    grid.validate();

    const SymTensor3 s0 = path.at(0.0);
    double e0 = 0.0;
    const double gap = optimal_competitor_gap(p, d, s0, init, &e0);
    if (!(gap <= 1e-8 * (1.0 + std::abs(e0)))) {
        std::ostringstream os;
        os << "run_constitutive: initial state is not stable at sigma(0), violation " << gap;
        throw UnstableInitialState(os.str());
    }

    PointTrajectory tr;
    tr.grid = grid;
    const int N = grid.steps();
    tr.stresses.reserve(N + 1);
    tr.states.reserve(N + 1);
    tr.ledger.reserve(N + 1);
    tr.stresses.push_back(s0);
    tr.states.push_back(init);

    PointLedger l0;
    l0.t = 0.0;
    l0.stored_energy = W_rho(p, init.eps, init.z).value();
    l0.energy = l0.stored_energy - ddot(s0, init.eps);
    tr.ledger.push_back(l0);

    for (int i = 1; i <= N; ++i) {
        const SymTensor3 s = path.at(grid.nodes[i]);
        const PointState& prev = tr.states.back();
        const PointState y = incremental_step(p, d, s, prev.z, opt);
        const double dd = d.value(y.z - prev.z);
        const PointLedger& lp = tr.ledger.back();

        PointLedger l;
        l.t = grid.nodes[i];
        l.stored_energy = W_rho(p, y.eps, y.z).value();
        l.energy = l.stored_energy - ddot(s, y.eps);
        l.dissipation = lp.dissipation + dd;
        l.work = lp.work + ddot(s - tr.stresses.back(), prev.eps);
        l.residual = (l.energy + l.dissipation) - (l0.energy - l.work);

        tr.stresses.push_back(s);
        tr.states.push_back(y);
        tr.diss_increments.push_back(dd);
        tr.ledger.push_back(l);
    }
    return tr;
}

StabilityReport verify_stability(const MaterialParams& p, const DissipationDensity& d,
                                 const SymTensor3& sigma, const PointState& state, int n_probes,
                                 double tol, std::uint64_t seed)
{
    if (n_probes < 1) throw std::invalid_argument("verify_stability: n_probes must be >= 1");
    StabilityReport rep;
    rep.seed = seed;
    rep.n_probes = n_probes;

    const ExtendedReal e = step_energy(p, sigma, state);
    if (e.is_infinite()) {
        rep.worst_probe = rep.optimal_competitor = rep.first_order = rep.worst_violation = INFINITY;
        return rep;
    }

    // Random competitors, uniform in the joint 11-dimensional ball of radius 2 c3.
    CounterRng rng(seed);
    const double radius = 2.0 * p.c3;
    const double s2 = std::sqrt(2.0);
    rep.worst_probe = -INFINITY;
    for (int k = 0; k < n_probes; ++k) {
        Eigen::Matrix<double, 11, 1> v;
        for (int j = 0; j < 11; ++j) v[j] = rng.normal();
        v *= radius * std::pow(rng.uniform(), 1.0 / 11.0) / v.norm();
        PointState c = state;
        for (int j = 0; j < 3; ++j) c.eps[j] += v[j];
        for (int j = 3; j < 6; ++j) c.eps[j] += v[j] / s2;
        for (int j = 0; j < 5; ++j) c.z[j] += v[6 + j];
        const ExtendedReal ec = step_energy(p, sigma, c);
        if (ec.is_infinite()) continue;
        rep.worst_probe = std::max(rep.worst_probe, e.value() - ec.value() - d.value(c.z - state.z));
    }

    rep.optimal_competitor = optimal_competitor_gap(p, d, sigma, state);

    // First-order conditions, blockwise: C(eps - z) = sigma and z stationary for
    // G|dev(eps) - z|^2 + F(z) + D(z - z_state).
    const double r_eps = norm(apply_C(p.elasticity, state.eps - embed(state.z)) - sigma);
    const Vec5 e_dev = dev(state.eps).v;
    const double G = p.elasticity.G;
    PointProblem pb;
    pb.dissipation = &d;
    pb.anchor = state.z;
    if (p.rho > 0) {
        pb.smooth.value = [p, e_dev, G](const Vec5& z) {
            return G * (e_dev - z).squaredNorm() + F_rho(p, DevTensor3(z));
        };
        pb.smooth.gradient = [p, e_dev, G](const Vec5& z) {
            return Vec5(2.0 * G * (z - e_dev) + grad_F_rho(p, DevTensor3(z)).v);
        };
        pb.smooth.lipschitz = 2.0 * G + lipschitz_F_rho(p);
    } else {
        const double c2 = p.c2;
        pb.smooth.value = [c2, e_dev, G](const Vec5& z) { return G * (e_dev - z).squaredNorm() + c2 * z.squaredNorm(); };
        pb.smooth.gradient = [c2, e_dev, G](const Vec5& z) { return Vec5(2.0 * G * (z - e_dev) + 2.0 * c2 * z); };
        pb.smooth.lipschitz = 2.0 * G + 2.0 * c2;
        pb.origin_weight = p.c1;
        pb.ball_radius = p.c3;
    }
    rep.first_order = r_eps + stationarity_residual(pb, state.z);

    rep.worst_violation = std::max({rep.worst_probe, rep.optimal_competitor, rep.first_order});
    rep.passed = rep.worst_violation <= tol;
    return rep;
}

std::vector<double> energy_balance_residual(const PointTrajectory& traj)
{
    std::vector<double> r;
    r.reserve(traj.ledger.size());
    for (const auto& l : traj.ledger) r.push_back(l.residual);
    return r;
}

TrajectoryDistance trajectory_distance(const PointTrajectory& a, const PointTrajectory& ref, bool interpolant)
{
    std::vector<double> times = a.grid.nodes;
    if (interpolant) {
        times.insert(times.end(), ref.grid.nodes.begin(), ref.grid.nodes.end());
        std::sort(times.begin(), times.end());
    }
    TrajectoryDistance out;
    for (double t : times) {
        const int i = a.grid.locate(t);
        const int k = ref.grid.locate(t);
        const double de = norm(a.states[i].eps - ref.states[k].eps);
        const double dz = norm(a.states[i].z - ref.states[k].z);
        out.eps = std::max(out.eps, de);
        out.z = std::max(out.z, dz);
        out.state = std::max(out.state, std::hypot(de, dz));
        out.energy = std::max(out.energy, std::abs(a.ledger[i].stored_energy - ref.ledger[k].stored_energy));
        out.dissipation = std::max(out.dissipation, std::abs(a.ledger[i].dissipation - ref.ledger[k].dissipation));
    }
    return out;
}

namespace {

std::optional<double> fit_order(const std::vector<double>& taus, const std::vector<double>& errs)
{
    if (taus.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double x = std::log(taus[i]), y = std::log(errs[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

} // namespace

TemporalStudy temporal_error_study(const MaterialParams& p, const DissipationDensity& d,
                                   const StressPath& path, const std::vector<double>& taus,
                                   double reference_tau, const PointState& init)
{
    if (!(p.rho > 0)) throw std::invalid_argument("temporal_error_study: requires rho > 0");
    if (taus.empty()) throw std::invalid_argument("temporal_error_study: empty tau list");
    const double tmin = *std::min_element(taus.begin(), taus.end());
    if (reference_tau > tmin / 8.0 * (1.0 + 1e-12))
        throw std::invalid_argument("temporal_error_study: reference_tau must be <= min(taus)/8");

    const double T = path.times.back();
    auto grid_for = [T](double tau) { return TimeGrid::uniform(T, std::max(1, static_cast<int>(std::lround(T / tau)))); };
    const PointTrajectory ref = run_constitutive(p, d, path, grid_for(reference_tau), init);

    TemporalStudy st;
    st.reference_tau = reference_tau;
    std::vector<double> ts, es;
    double emax = 0.0;
    for (double tau : taus) {
        const PointTrajectory tr = run_constitutive(p, d, path, grid_for(tau), init);
        const TrajectoryDistance dist = trajectory_distance(tr, ref, true);
        const TrajectoryDistance nodal = trajectory_distance(tr, ref, false);
        st.rows.push_back({tau, dist.eps, dist.z, dist.state, nodal.state});
        ts.push_back(tau);
        es.push_back(dist.state);
        emax = std::max(emax, nodal.state);
    }
    if (emax < 1e-12) {
        st.degenerate = true;
        return st;
    }
    st.order = fit_order(ts, es);
    return st;
}

DependenceReport continuous_dependence_check(const MaterialParams& p, const DissipationDensity& d,
                                             const std::vector<StepPair>& pairs, double slack)
{
    DependenceReport rep;
    rep.slack = slack;
    const double a = p.alpha();
    for (const auto& pr : pairs) {
        const PointState y1 = incremental_step(p, d, pr.sigma1, pr.zbar1);
        const PointState y2 = incremental_step(p, d, pr.sigma2, pr.zbar2);
        const double de = norm(y1.eps - y2.eps), dz = norm(y1.z - y2.z), ds = norm(pr.sigma1 - pr.sigma2);
        DependenceRow row;
        row.lhs = de * de + dz * dz;
        row.rhs = ds * ds / (a * a) + 4.0 / a * d.value(pr.zbar1 - pr.zbar2);
        row.holds = row.lhs <= row.rhs + slack;
        rep.all_hold = rep.all_hold && row.holds;
        rep.rows.push_back(row);
    }
    return rep;
}

double trajectory_dependence_ratio(const MaterialParams& p, const DissipationDensity& d,
                                   const StressPath& path1, const StressPath& path2, const TimeGrid& grid)
{
    const PointState i1 = incremental_step(p, d, path1.at(0.0), DevTensor3::zero());
    const PointState i2 = incremental_step(p, d, path2.at(0.0), DevTensor3::zero());
    const PointTrajectory a = run_constitutive(p, d, path1, grid, i1);
    const PointTrajectory b = run_constitutive(p, d, path2, grid, i2);

    auto dy2 = [&](int i) {
        const double de = norm(a.states[i].eps - b.states[i].eps), dz = norm(a.states[i].z - b.states[i].z);
        return de * de + dz * dz;
    };
    double sup_ds = 0.0, var_ds = 0.0, ratio = 0.0;
    for (int i = 0; i <= grid.steps(); ++i) {
        const SymTensor3 ds = a.stresses[i] - b.stresses[i];
        sup_ds = std::max(sup_ds, norm(ds));
        if (i > 0) var_ds += norm(ds - (a.stresses[i - 1] - b.stresses[i - 1]));
        const double data = dy2(0) + (sup_ds + var_ds) * (sup_ds + var_ds);
        if (data > 0) ratio = std::max(ratio, dy2(i) / data);
    }
    return ratio;
}

void write_trajectory_csv(std::ostream& os, const PointTrajectory& traj)
{
    csv::write_row(os, std::vector<std::string>{"t", "eps_xx", "eps_yy", "eps_zz", "eps_yz", "eps_xz", "eps_xy",
                                                "z_1", "z_2", "z_3", "z_4", "z_5", "stored_energy",
                                                "dissipation", "work", "residual"});
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        std::vector<double> row;
        const auto& s = traj.states[i];
        const auto& l = traj.ledger[i];
        row.push_back(l.t);
        for (double c : s.eps.c) row.push_back(c);
        for (int j = 0; j < 5; ++j) row.push_back(s.z[j]);
        row.insert(row.end(), {l.stored_energy, l.dissipation, l.work, l.residual});
        csv::write_row(os, row);
    }
}

} // namespace sma
