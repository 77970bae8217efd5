#include "sma/asymptotics.hpp"

#include "sma/csv.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sma {

int LimitSchedule::size() const
{
    return static_cast<int>(std::max({rho.size(), nu.size(), tau.size(), n.size()}));
}

namespace {

template <class T>
T pick(const std::vector<T>& v, int k)
{
    return v.size() == 1 ? v[0] : v.at(k);
}

template <class T>
bool non_increasing(const std::vector<T>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1]) return false;
    return true;
}

// Runs fn(k) for k = 0..count-1 on up to `threads` threads.
void parallel_for(int count, int threads, const std::function<void(int)>& fn)
{
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int k = w; k < count; k += threads) {
                try {
                    fn(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int steps_for(double T, double tau)
{
    const int N = static_cast<int>(std::lround(T / tau));
    if (N < 1 || std::abs(N * tau - T) > 1e-9 * T) throw std::invalid_argument("limit schedule: tau must divide T");
    return N;
}

void finish(LimitTable& t)
{
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        const double prev = t.rows[i - 1].state_diff, cur = t.rows[i].state_diff;
        if (!(cur < prev || (prev == 0.0 && cur == 0.0))) t.decreasing = false;
    }
    for (const LimitRow& r : t.rows)
        if (r.state_diff > 0) t.energy_ratio = std::max(t.energy_ratio, r.energy_diff / r.state_diff);
}

} // namespace

double LimitSchedule::rho_at(int k) const { return pick(rho, k); }
double LimitSchedule::nu_at(int k) const { return pick(nu, k); }
double LimitSchedule::tau_at(int k) const { return pick(tau, k); }
int LimitSchedule::n_at(int k) const { return pick(n, k); }

void LimitSchedule::target_terminal()
{
    const int K = size();
    rho_star = rho_at(K - 1);
    nu_star = nu_at(K - 1);
    tau_star = tau_at(K - 1);
    n_star = n_at(K - 1);
}

std::vector<std::string> LimitSchedule::violations() const
{
    std::vector<std::string> v;
    const std::size_t K = static_cast<std::size_t>(size());
    auto len_ok = [K](std::size_t s) { return s == 1 || s == K; };
    if (rho.empty() || nu.empty() || tau.empty() || n.empty()) v.push_back("schedule sequences must be non-empty");
    if (!len_ok(rho.size()) || !len_ok(nu.size()) || !len_ok(tau.size()) || !len_ok(n.size()))
        v.push_back("schedule sequences must have length 1 or a common length");
    if (!non_increasing(rho)) v.push_back("rho sequence must be non-increasing");
    if (!non_increasing(nu)) v.push_back("nu sequence must be non-increasing");
    if (!non_increasing(tau)) v.push_back("tau sequence must be non-increasing");
    for (std::size_t i = 1; i < n.size(); ++i)
        if (n[i] < n[i - 1]) v.push_back("n sequence must be non-decreasing (h non-increasing)");
    for (double r : rho)
        if (r < 0) v.push_back("rho must be >= 0");
    for (double x : nu)
        if (x < 0) v.push_back("nu must be >= 0");
    for (double x : tau)
        if (!(x > 0)) v.push_back("tau must be > 0");
    for (int x : n)
        if (x < 1) v.push_back("n must be >= 1");
    if (rho_star < 0 || nu_star < 0 || tau_star < 0 || n_star < 0) v.push_back("targets must be >= 0");
    return v;
}

void LimitSchedule::validate() const
{
    const auto v = violations();
    if (v.empty()) return;
    std::ostringstream os;
    os << "LimitSchedule:";
    for (const auto& s : v) os << ' ' << s << ';';
    throw std::invalid_argument(os.str());
}

// ---------------------------------------------------------------------------

std::vector<DevTensor3> gamma_sample_grid(const MaterialParams& p, int count)
{
    std::vector<DevTensor3> out;
    for (int k = 0; k < count; ++k) {
        const double r = 1.5 * p.c3 * k / (count - 1);
        Vec5 dir;
        for (int j = 0; j < 5; ++j) dir[j] = std::cos(1.3 * k + 0.7 * j * j + 0.4 * j);
        out.emplace_back(Vec5(r * dir.normalized()));
    }
    return out;
}

GammaReport gamma_check_F(const MaterialParams& p, const std::vector<double>& rhos, const std::vector<DevTensor3>& samples)
{
    for (std::size_t i = 0; i < rhos.size(); ++i)
        if (!(rhos[i] > 0) || (i > 0 && !(rhos[i] < rhos[i - 1])))
            throw std::invalid_argument("gamma_check_F: rho sequence must be positive and strictly decreasing");
    GammaReport rep;
    for (const DevTensor3& a : samples) (norm(a) <= p.c3 ? rep.samples_inside : rep.samples_outside)++;
    std::vector<double> prev;
    for (double rho : rhos) {
        MaterialParams q = p;
        q.rho = rho;
        GammaRow row;
        row.rho = rho;
        row.min_outside = std::numeric_limits<double>::infinity();
        std::vector<double> vals;
        for (const DevTensor3& a : samples) {
            const double f = F_rho(q, a);
            vals.push_back(f);
            const ExtendedReal f0 = F0(p, a);
            if (f0.is_finite())
                row.max_gap_inside = std::max(row.max_gap_inside, f0.value() - f);
            else
                row.min_outside = std::min(row.min_outside, f);
            if (norm(a) == 0.0 && f != 0.0) rep.zero_at_origin = false;
        }
        if (!prev.empty())
            for (std::size_t i = 0; i < vals.size(); ++i)
                if (!(vals[i] >= prev[i])) row.monotone_from_previous = false;
        rep.monotone = rep.monotone && row.monotone_from_previous;
        rep.rows.push_back(row);
        prev = vals;
    }
    return rep;
}

// ---------------------------------------------------------------------------

LimitTable limit_constitutive(const MaterialParams& p, const DissipationDensity& d, const StressPath& path,
                              const LimitSchedule& s, const LimitOptions& opt)
{
    s.validate();
    const int K = s.size();
    const double T = path.times.back();
    auto run = [&](double rho, double tau) {
        MaterialParams q = p;
        q.rho = rho;
        const PointState init{apply_C_inverse(q.elasticity, path.at(0.0)), DevTensor3::zero()};
        return run_constitutive(q, d, path, TimeGrid::uniform(T, steps_for(T, tau)), init);
    };

    std::vector<PointTrajectory> runs(K + 1);
    double tau_min = s.tau_at(0);
    for (int k = 0; k < K; ++k) tau_min = std::min(tau_min, s.tau_at(k));
    const double tau_ref = s.tau_star > 0 ? s.tau_star : tau_min / 8.0;
    parallel_for(opt.inter_level ? K : K + 1, opt.threads, [&](int k) {
        runs[k] = k < K ? run(s.rho_at(k), s.tau_at(k)) : run(s.rho_star, tau_ref);
    });

    LimitTable t;
    t.label = s.label;
    std::ostringstream ref;
    if (opt.inter_level)
        ref << "next member";
    else
        ref << "rho=" << s.rho_star << " tau=" << tau_ref;
    t.reference = ref.str();
    const int rows = opt.inter_level ? K - 1 : K;
    for (int k = 0; k < rows; ++k) {
        const TrajectoryDistance dist = trajectory_distance(runs[k], opt.inter_level ? runs[k + 1] : runs[K]);
        t.rows.push_back({k, s.rho_at(k), 0.0, s.tau_at(k), 0.0, dist.state, dist.energy, dist.dissipation});
    }
    finish(t);
    return t;
}

namespace {

struct StepResult {
    std::shared_ptr<const BvpSystem> sys;
    DofVector y;
    double energy = 0.0, diss = 0.0;
};

StepResult min_member(const BvpProblem& pb, double t, int n, double rho, double nu)
{
    StepResult r;
    r.sys = pb.system(n, rho, nu);
    const FeSpace& sp = r.sys->space();
    const DofVector z0 = DofVector::Zero(sp.num_z());
    BvpStep st{r.sys.get(), dirichlet_lifting(sp, pb.loads, t), assemble_load(sp, pb.loads, t), z0, std::nullopt};
    r.y = solve_bvp_step(st, pb.options).y;
    r.energy = r.sys->stored_energy(r.y);
    r.diss = r.sys->distance(z0, r.y.tail(sp.num_z()));
    return r;
}

} // namespace

LimitTable limit_minproblem(const BvpProblem& problem, double t, const LimitSchedule& s, const LimitOptions& opt)
{
    s.validate();
    const int K = s.size();
    int n_max = 1;
    for (int k = 0; k < K; ++k) n_max = std::max(n_max, s.n_at(k));
    const int n_ref = s.n_star > 0 ? s.n_star : 2 * n_max;

    std::vector<StepResult> res(K + 1);
    parallel_for(opt.inter_level ? K : K + 1, opt.threads, [&](int k) {
        res[k] = k < K ? min_member(problem, t, s.n_at(k), s.rho_at(k), s.nu_at(k))
                       : min_member(problem, t, n_ref, s.rho_star, s.nu_star);
    });

    LimitTable tab;
    tab.label = s.label;
    std::ostringstream ref;
    if (opt.inter_level)
        ref << "next member";
    else
        ref << "rho=" << s.rho_star << " nu=" << s.nu_star << " n=" << n_ref;
    tab.reference = ref.str();
    const int rows = opt.inter_level ? K - 1 : K;
    for (int k = 0; k < rows; ++k) {
        const StepResult& a = res[k];
        const StepResult& b = opt.inter_level ? res[k + 1] : res[K];
        const DofVector ya = a.sys->space().mesh().subdivisions() == b.sys->space().mesh().subdivisions()
                                 ? a.y
                                 : DofVector(prolongation(a.sys->space(), b.sys->space()) * a.y);
        const DofVector dy = ya - b.y;
        LimitRow row{k, s.rho_at(k), s.nu_at(k), 0.0, a.sys->space().mesh().h(), 0.0, 0.0, 0.0};
        row.state_diff = std::sqrt(std::max(0.0, dy.dot(b.sys->form().H * dy)));
        row.energy_diff = std::abs(a.energy - b.energy);
        row.diss_diff = std::abs(a.diss - b.diss);
        tab.rows.push_back(row);
    }
    finish(tab);
    return tab;
}

LimitTable limit_evolution(const BvpProblem& problem, const LimitSchedule& s, const LimitOptions& opt)
{
    s.validate();
    const int K = s.size();
    int n_max = 1;
    double tau_min = s.tau_at(0);
    for (int k = 0; k < K; ++k) {
        n_max = std::max(n_max, s.n_at(k));
        tau_min = std::min(tau_min, s.tau_at(k));
    }
    const int n_ref = s.n_star > 0 ? s.n_star : 2 * n_max;
    const double tau_ref = s.tau_star > 0 ? s.tau_star : tau_min / 2.0;

    std::vector<EvolutionRecord> recs(K + 1);
    parallel_for(opt.inter_level ? K : K + 1, opt.threads, [&](int k) {
        recs[k] = k < K ? spacetime_run(problem, s.rho_at(k), s.nu_at(k), s.tau_at(k), s.n_at(k))
                        : spacetime_run(problem, s.rho_star, s.nu_star, tau_ref, n_ref);
    });

    LimitTable tab;
    tab.label = s.label;
    std::ostringstream ref;
    if (opt.inter_level)
        ref << "next member";
    else
        ref << "rho=" << s.rho_star << " nu=" << s.nu_star << " tau=" << tau_ref << " n=" << n_ref;
    tab.reference = ref.str();
    const int rows = opt.inter_level ? K - 1 : K;
    for (int k = 0; k < rows; ++k) {
        const RecordDistance d = record_distance(recs[k], opt.inter_level ? recs[k + 1] : recs[K]);
        tab.rows.push_back({k, s.rho_at(k), s.nu_at(k), s.tau_at(k), recs[k].system->space().mesh().h(), d.state,
                            d.energy, d.dissipation});
    }
    for (int k = 0; k < (opt.inter_level ? K : K + 1); ++k) {
        const AprioriBound& b = recs[k].apriori;
        tab.apriori_holds = tab.apriori_holds && b.holds;
        if (b.bound > 0) tab.apriori_ratio = std::max(tab.apriori_ratio, b.observed / b.bound);
    }
    finish(tab);
    return tab;
}

void write_limit_csv(std::ostream& os, const LimitTable& t)
{
    csv::write_row(os, std::vector<std::string>{"k", "rho", "nu", "tau", "h", "state_diff", "energy_diff", "diss_diff"});
    for (const LimitRow& r : t.rows)
        csv::write_row(os, std::vector<double>{static_cast<double>(r.k), r.rho, r.nu, r.tau, r.h, r.state_diff,
                                               r.energy_diff, r.diss_diff});
}

} // namespace sma
