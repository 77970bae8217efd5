// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "sma/asymptotics.hpp"
#include "sma/constitutive.hpp"
#include "sma/convex_solver.hpp"
#include "sma/fem_space.hpp"
#include "sma/quasistatic.hpp"
#include "sma/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace sma;

namespace {

// pinned tolerances
constexpr double kDependenceSlack = 1e-8;
constexpr double kMinOrder = 0.45;
constexpr double kBalanceTol = 1e-10;
constexpr double kGapShrink = 0.75;
constexpr double kStabilityTol = 1e-8;
constexpr int kProbes = 200;
constexpr double kBallTol = 1e-14;
constexpr double kOrthTol = 1e-10;
constexpr double kFinalZ = 1e-6;
constexpr double kMinDiss = 0.1;
constexpr double kGammaGap = 1e-3;
constexpr double kBlowUp = 1e6;
constexpr double kGradTol = 1e-6;

int failures = 0;

struct Line {
    int id;
    std::string text;
};
std::vector<Line> lines;

// constitutive runs of the whole session, for criteria 3 and 6
std::vector<std::pair<double, PointTrajectory>> point_runs;
// BVP runs with rho = 0, for criterion 6
std::vector<EvolutionRecord> ball_records;

void report(int id, const std::string& name, const std::function<bool(std::ostringstream&)>& body)
{
    std::ostringstream detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!ok) ++failures;
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d ", ok ? "PASS" : "FAIL", id);
    char tail[32];
    std::snprintf(tail, sizeof tail, "; %.2f s]", secs);
    std::string d = detail.str();
    while (d.size() >= 2 && d.compare(d.size() - 2, 2, "; ") == 0) d.resize(d.size() - 2);
    lines.push_back({id, head + name + " [" + d + tail});
    std::fprintf(stderr, "criterion %d done\n", id);
}

MaterialParams params(double rho, double nu = 0.0)
{
    MaterialParams p;
    p.rho = rho;
    p.nu = nu;
    return p;
}

Vec5 rand5(CounterRng& rng)
{
    Vec5 v;
    for (int i = 0; i < 5; ++i) v[i] = rng.normal();
    return v;
}

PointTrajectory run_point(const MaterialParams& p, const StressPath& path, int N)
{
    const DissipationSpec d(p.R);
    PointTrajectory tr = run_constitutive(p, d, path, TimeGrid::uniform(path.times.back(), N), {});
    point_runs.emplace_back(p.rho, tr);
    return tr;
}

double max_z(const EvolutionRecord& rec)
{
    const FeSpace& sp = rec.system->space();
    double m = 0.0;
    for (const DofVector& y : rec.states)
        for (int i = 0; i < sp.num_nodes(); ++i) m = std::max(m, y.segment<5>(sp.z_offset() + 5 * i).norm());
    return m;
}

BvpProblem traction_problem(double rho, double nu, double peak)
{
    BvpProblem pb;
    pb.params = params(rho, nu);
    pb.loads = traction_ramp_unload(1.0, Eigen::Vector3d(0.0, peak, 0.0));
    return pb;
}

bool criterion1(std::ostringstream& out)
{
    CounterRng rng(1001);
    bool ok = true;
    for (double rho : {0.0, 0.1}) {
        const MaterialParams p = params(rho);
        const DissipationSpec d(p.R);
        std::vector<StepPair> pairs;
        for (int k = 0; k < 100; ++k) {
            StepPair s;
            s.sigma1 = embed(DevTensor3(rand5(rng).normalized() * rng.uniform(0, 3.5))) +
                       rng.normal() * SymTensor3::identity();
            s.sigma2 = k % 2 ? s.sigma1 + embed(DevTensor3(rand5(rng) * 0.05))
                             : embed(DevTensor3(rand5(rng).normalized() * rng.uniform(0, 3.5)));
            s.zbar1 = DevTensor3(rand5(rng).normalized() * rng.uniform(0, p.c3));
            s.zbar2 = k % 3 ? DevTensor3(rand5(rng).normalized() * rng.uniform(0, p.c3)) : s.zbar1;
            pairs.push_back(s);
        }
        const DependenceReport rep = continuous_dependence_check(p, d, pairs, kDependenceSlack);
        double worst = -1e300;
        for (const auto& r : rep.rows) worst = std::max(worst, r.lhs - r.rhs);
        out << "rho=" << rho << ": 100 pairs, max lhs-rhs " << worst << "; ";
        ok = ok && rep.all_hold && rep.rows.size() == 100;
    }
    return ok;
}

bool criterion2(std::ostringstream& out)
{
    const MaterialParams p = params(0.1);
    const DissipationSpec d(p.R);
    const StressPath path = StressPath::ramp_unload(1.0, 3.0, default_direction());
    const TemporalStudy st =
        temporal_error_study(p, d, path, {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}, 1.0 / 2048);
    out << "errors";
    for (const auto& r : st.rows) out << ' ' << r.err;
    out << "; fitted order " << (st.order ? *st.order : NAN);
    for (int N : {16, 32, 64, 128, 256, 2048}) run_point(p, path, N);
    return st.order && *st.order >= kMinOrder && !st.degenerate;
}

bool criterion3(std::ostringstream& out)
{
    bool ok = true;
    for (double rho : {0.0, 0.1}) {
        const MaterialParams p = params(rho);
        const StressPath path = StressPath::ramp_unload(1.0, 3.0, default_direction());
        double prev = -1;
        out << "rho=" << rho << " gaps";
        for (int N : {16, 32, 64, 128, 256}) {
            const auto r = energy_balance_residual(run_point(p, path, N));
            double gap = 0;
            for (double x : r) gap = std::max(gap, std::abs(x));
            out << ' ' << gap;
            if (prev > 0 && !(gap <= kGapShrink * prev)) ok = false;
            prev = gap;
        }
        out << "; ";
    }
    double worst = -1e300;
    for (const auto& [rho, tr] : point_runs)
        for (const PointLedger& l : tr.ledger) worst = std::max(worst, l.residual);
    out << "max one-sided residual over " << point_runs.size() << " runs " << worst;
    return ok && worst <= kBalanceTol;
}

bool criterion4(std::ostringstream& out)
{
    bool ok = true;
    int checked = 0;
    for (double rho : {0.0, 0.1}) {
        const MaterialParams p = params(rho);
        const DissipationSpec d(p.R);
        const PointTrajectory tr = run_point(p, StressPath::ramp_unload(1.0, 3.0, default_direction()), 64);
        for (std::size_t i = 0; i < tr.states.size(); ++i) {
            const StabilityReport r =
                verify_stability(p, d, tr.stresses[i], tr.states[i], kProbes, kStabilityTol, 4000 + i);
            ok = ok && r.passed;
            ++checked;
        }
        // perturbed: move z off the minimizer at the peak
        PointState bad = tr.states[32];
        bad.z += 0.05 * default_direction();
        if (rho == 0) bad.z = DevTensor3(0.9 * bad.z.v);
        const bool flagged = !verify_stability(p, d, tr.stresses[32], bad, kProbes, kStabilityTol, 4999).passed;
        out << "rho=" << rho << " perturbed flagged=" << flagged << "; ";
        ok = ok && flagged;
    }
    // incremental BVP states
    const EvolutionRecord rec = spacetime_run(traction_problem(0.1, 0.01, 2.0), 0.1, 0.01, 1.0 / 8, 2);
    const EnergeticReport er = verify_energetic(rec, kProbes, kStabilityTol, 4);
    EvolutionRecord bad = rec;
    const FeSpace& sp = rec.system->space();
    int node = 0;
    double best = 0;
    for (int i = 0; i < sp.num_nodes(); ++i) {
        const double m = rec.states[4].segment<5>(sp.z_offset() + 5 * i).norm();
        if (m > best) { best = m; node = i; }
    }
    for (auto& y : bad.states) y.segment<5>(sp.z_offset() + 5 * node) *= 1.1;
    const bool bvp_flagged = !verify_energetic(bad, kProbes, kStabilityTol, 4, 4).stable;
    out << checked << " point states; BVP nodes " << er.nodes.size() << " stable=" << er.stable
        << " perturbed flagged=" << bvp_flagged;
    return ok && er.stable && bvp_flagged;
}

// Brute force over span{u, v} on a (n+1)^2 grid.  Grid points outside the
// ball are mapped radially onto it, otherwise a tangent optimum on the sphere
// is only seen through the few grid points that happen to lie close to it.
Vec5 planar_oracle(const PointProblem& pb, const Vec5& u, const Vec5& v, double half, int n, double& step)
{
    const Vec5 e1 = u.normalized();
    Vec5 e2 = v - v.dot(e1) * e1;
    if (e2.norm() < 1e-12) e2 = Vec5::Unit(0) - e1[0] * e1;
    e2.normalize();
    step = 2 * half / n;
    double best = INFINITY;
    Vec5 arg = Vec5::Zero();
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            Vec5 z = (-half + i * step) * e1 + (-half + j * step) * e2;
            if (pb.ball_radius && z.norm() > *pb.ball_radius) z *= *pb.ball_radius / z.norm();
            const double f = objective_value(pb, DevTensor3(z));
            if (f < best) {
                best = f;
                arg = z;
            }
        }
    return arg;
}

bool criterion5(std::ostringstream& out)
{
    CounterRng rng(5005);
    bool ok = true;
    for (double rho : {0.0, 0.1}) {
        const MaterialParams p = params(rho);
        const DissipationSpec d(p.R);
        double worst = 0, worse = -INFINITY;
        for (int k = 0; k < 20; ++k) {
            const Vec5 sd = rand5(rng).normalized() * rng.uniform(0.5, 3.5);
            const Vec5 zbar = rand5(rng).normalized() * rng.uniform(0, p.c3);
            const SymTensor3 sigma = embed(DevTensor3(sd)) + rng.normal() * SymTensor3::identity();
            const PointState y = incremental_step(p, d, sigma, DevTensor3(zbar));
            const PointProblem pb = reduced_step_problem(p, d, sigma, DevTensor3(zbar));
            double step;
            const Vec5 o = planar_oracle(pb, sd, zbar, rho == 0 ? 1.05 * p.c3 : 1.5, 400, step);
            worst = std::max(worst, (y.z.v - o).norm() / step);
            worse = std::max(worse, objective_value(pb, y.z) - objective_value(pb, DevTensor3(o)));
        }
        out << "rho=" << rho << " max distance " << worst << " grid steps, max objective excess " << worse << "; ";
        ok = ok && worst <= 2.0 && worse <= 1e-12;
    }
    return ok;
}

bool criterion6(std::ostringstream& out)
{
    double worst_point = 0;
    int n_point = 0;
    for (const auto& [rho, tr] : point_runs) {
        if (rho != 0) continue;
        ++n_point;
        for (const PointState& s : tr.states) worst_point = std::max(worst_point, norm(s.z));
    }
    double worst_bvp = 0;
    for (const EvolutionRecord& r : ball_records) worst_bvp = std::max(worst_bvp, max_z(r));

    FeSpace coarse(BoxMesh::cube(2));
    FeSpace fine(coarse.mesh().refined());
    CounterRng rng(6006);
    const double c3 = params(0).c3;
    double worst_interp = 0;
    for (int k = 0; k < 50; ++k) {
        DofVector z(fine.num_z());
        for (int i = 0; i < fine.num_nodes(); ++i)
            z.segment<5>(5 * i) = rand5(rng).normalized() * c3 * std::sqrt(rng.uniform());
        if (k % 5 == 0)  // saturated fields
            for (int i = 0; i < fine.num_nodes(); ++i) z.segment<5>(5 * i).normalize();
        if (k % 5 == 1)  // saturated and constant
            for (int i = 0; i < fine.num_nodes(); ++i) z.segment<5>(5 * i) = c3 * default_direction().v;
        const DofVector ic = interp_constrained(coarse, fine, z);
        for (int i = 0; i < coarse.num_nodes(); ++i) worst_interp = std::max(worst_interp, ic.segment<5>(5 * i).norm());
    }
    out << "max|z| point " << worst_point << " over " << n_point << " runs, BVP " << worst_bvp << " over "
        << ball_records.size() << " runs, interpolant " << worst_interp << " on 50 fields";
    return n_point > 0 && !ball_records.empty() && worst_point <= c3 + kBallTol && worst_bvp <= c3 + kBallTol &&
           worst_interp <= c3 + kBallTol;
}

bool criterion7(std::ostringstream& out)
{
    bool ok = true;
    const MaterialParams p = params(0.0, 0.01);
    for (int n : {2, 4}) {
        FeSpace coarse(BoxMesh::cube(n));
        FeSpace fine(coarse.mesh().refined());
        const QuadraticForm hf = assemble_A_nu(fine, p);
        const SparseMatrix P = prolongation(coarse, fine);
        CounterRng rng(7000 + n);
        double worst_orth = 0, worst_ratio = 0;
        for (int k = 0; k < 20; ++k) {
            DofVector y(fine.num_dofs());
            for (int i = 0; i < y.size(); ++i) y[i] = rng.normal();
            for (int dof = 0; dof < fine.num_u(); ++dof)
                if (fine.u_dof_fixed(dof)) y[dof] = 0.0;
            const Projection pr = galerkin_project(coarse, fine, p, y);
            const DofVector py = P * pr.y;
            worst_orth = std::max(worst_orth, pr.orthogonality);
            worst_ratio = std::max(worst_ratio, hf.energy(py) / hf.energy(y));
        }
        out << "n=" << n << " orth " << worst_orth << " energy ratio " << worst_ratio << "; ";
        ok = ok && worst_orth <= kOrthTol && worst_ratio <= 1.0;
    }
    return ok;
}

bool criterion8(std::ostringstream& out)
{
    const MaterialParams p = params(0.0);
    const PointTrajectory tr = run_point(p, StressPath::ramp_unload(1.0, 3.0, default_direction()), 200);
    double zmax = 0;
    for (const PointState& s : tr.states) zmax = std::max(zmax, norm(s.z));
    const double zT = norm(tr.states.back().z);
    const double diss = tr.ledger.back().dissipation;
    const double loop = norm(tr.states.back().eps - tr.states.front().eps);
    out << "max|z| " << zmax << ", final |z| " << zT << ", dissipation " << diss << ", loop gap " << loop;
    return zT <= kFinalZ && diss >= kMinDiss && loop <= kFinalZ && zmax > 0.5;
}

bool criterion9(std::ostringstream& out)
{
    const MaterialParams p;
    const auto samples = gamma_sample_grid(p, 50);
    std::vector<double> rhos;
    for (int k = 1; k <= 12; ++k) rhos.push_back(std::pow(10.0, -k));
    const GammaReport rep = gamma_check_F(p, rhos, samples);
    // closed-form F0 inside the ball
    MaterialParams q = p;
    q.rho = 1e-4;
    double gap = 0;
    for (const DevTensor3& a : samples) {
        const double r = norm(a);
        if (r <= p.c3) gap = std::max(gap, std::abs(p.c1 * r + p.c2 * r * r - F_rho(q, a)));
    }
    out << samples.size() << " samples (" << rep.samples_inside << " inside), monotone=" << rep.monotone
        << ", gap at 1e-4 " << gap << ", min outside at " << rhos.back() << ": " << rep.rows.back().min_outside;
    return samples.size() == 50 && rep.monotone && rep.zero_at_origin && gap <= kGammaGap &&
           rep.rows[3].max_gap_inside <= kGammaGap && rep.rows.back().min_outside > kBlowUp;
}

bool criterion10(std::ostringstream& out)
{
    const double nu = 0.01;
    const BvpProblem pb = traction_problem(0.1, nu, 2.0);
    LimitOptions opt;
    opt.inter_level = true;
    bool ok = true;
    auto show = [&](const char* name, const LimitTable& t, bool evolution) {
        out << name << ':';
        for (const LimitRow& r : t.rows) out << ' ' << r.state_diff;
        if (evolution) out << " (apriori " << (t.apriori_holds ? "ok" : "VIOLATED") << ", max ratio " << t.apriori_ratio << ')';
        out << "; ";
        ok = ok && t.decreasing && t.rows.size() >= 2 && (!evolution || t.apriori_holds);
    };

    LimitSchedule tau;
    tau.rho = {0.1};
    tau.nu = {nu};
    tau.tau = {1.0 / 8, 1.0 / 16, 1.0 / 32};
    tau.n = {4};
    tau.target_terminal();
    show("tau", limit_evolution(pb, tau, opt), true);

    LimitSchedule rho;
    rho.rho = {0.1, 0.01, 0.001};
    rho.nu = {nu};
    rho.tau = {1.0 / 16};
    rho.n = {4};
    rho.target_terminal();
    show("rho", limit_evolution(pb, rho, opt), true);

    LimitSchedule h;
    h.rho = {0.1};
    h.nu = {nu};
    h.tau = {1.0 / 8};
    h.n = {2, 4, 8};
    h.target_terminal();
    show("h", limit_evolution(pb, h, opt), true);

    LimitSchedule joint;
    joint.rho = {0.1, 0.01, 0.001};
    joint.nu = {nu};
    joint.tau = {1.0 / 8, 1.0 / 16, 1.0 / 32};
    joint.n = {2, 4, 8};
    joint.target_terminal();
    show("joint", limit_evolution(pb, joint, opt), true);

    // minimum problem at the load peak
    LimitSchedule mrho = rho;
    show("min rho", limit_minproblem(pb, 0.5, mrho, opt), false);
    LimitSchedule mh = h;
    show("min h", limit_minproblem(pb, 0.5, mh, opt), false);
    return ok;
}

bool criterion11(std::ostringstream& out)
{
    CounterRng rng(1111);
    const MaterialParams p = params(0.1);
    const DissipationSpec d(p.R);
    auto fd_check = [](const std::function<double(const Vec5&)>& f, const Vec5& g, const Vec5& a) {
        const double h = 1e-5 * std::max(1.0, a.norm());
        Vec5 fd;
        for (int i = 0; i < 5; ++i) {
            Vec5 ap = a, am = a;
            ap[i] += h;
            am[i] -= h;
            fd[i] = (f(ap) - f(am)) / (2 * h);
        }
        return (g - fd).norm() / std::max(1.0, g.norm());
    };
    double worst_F = 0, worst_step = 0;
    for (int k = 0; k < 100; ++k) {
        const Vec5 a = rand5(rng).normalized() * rng.uniform(0, 2.0 * p.c3);
        worst_F = std::max(worst_F, fd_check([&](const Vec5& x) { return F_rho(p, DevTensor3(x)); },
                                             grad_F_rho(p, DevTensor3(a)).v, a));
    }
    for (int k = 0; k < 100; ++k) {
        const SymTensor3 sigma = embed(DevTensor3(rand5(rng).normalized() * rng.uniform(0, 3.5)));
        const DevTensor3 zbar(rand5(rng).normalized() * rng.uniform(0, p.c3));
        const PointProblem pb = reduced_step_problem(p, d, sigma, zbar);
        const Vec5 z = rand5(rng).normalized() * rng.uniform(0, 1.5 * p.c3);
        worst_step = std::max(worst_step, fd_check(pb.smooth.value, pb.smooth.gradient(z), z));
    }
    out << "grad_F_rho " << worst_F << ", reduced step " << worst_step << " (relative, 100 points each)";
    return worst_F <= kGradTol && worst_step <= kGradTol;
}

} // namespace

int main()
{
    const auto t0 = std::chrono::steady_clock::now();
    // the rho = 0 BVP run that criterion 6 inspects
    ball_records.push_back(spacetime_run(traction_problem(0.0, 0.01, 3.0), 0.0, 0.01, 1.0 / 16, 2));

    report(1, "single-step continuous dependence", criterion1);
    report(2, "temporal rate of order 1/2", criterion2);
    report(4, "stability certification", criterion4);
    report(5, "step against the planar brute-force oracle", criterion5);
    report(7, "Galerkin projector", criterion7);
    report(8, "superelastic hysteresis", criterion8);
    report(9, "monotone Gamma-family", criterion9);
    report(10, "BVP convergence tables and a priori bound", criterion10);
    report(11, "gradient checks", criterion11);
    // these two read the runs collected above
    report(3, "discrete one-sided energy inequality", criterion3);
    report(6, "constraint exactness for rho = 0", criterion6);

    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
    for (const Line& l : lines) std::printf("%s\n", l.text.c_str());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s: %d criteria failed, %.1f s\n", failures ? "FAILED" : "ALL PASSED", failures, secs);
    return failures ? 1 : 0;
}
