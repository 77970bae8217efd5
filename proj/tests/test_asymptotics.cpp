#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sma/asymptotics.hpp"
#include "sma/csv.hpp"

#include <cmath>
#include <sstream>

using namespace sma;

namespace {

// Independent evaluation of the limit energy inside the ball.
double F0_oracle(const MaterialParams& p, double r) { return p.c1 * r + p.c2 * r * r; }

BvpProblem traction_problem(double peak)
{
    BvpProblem pb;
    pb.loads = traction_ramp_unload(1.0, Eigen::Vector3d(0.0, peak, 0.0));
    return pb;
}

} // namespace

TEST_CASE("gamma family: monotone, pinned at the origin, converging inside and diverging outside")
{
    MaterialParams p;
    const auto samples = gamma_sample_grid(p, 50);
    REQUIRE(samples.size() == 50);
    std::vector<double> rhos;
    for (int k = 1; k <= 12; ++k) rhos.push_back(std::pow(10.0, -k));
    const GammaReport rep = gamma_check_F(p, rhos, samples);
    CHECK(rep.monotone);
    CHECK(rep.zero_at_origin);
    CHECK(rep.samples_inside > 0);
    CHECK(rep.samples_outside > 0);
    CHECK(rep.rows[3].rho == doctest::Approx(1e-4));
    CHECK(rep.rows[3].max_gap_inside <= 1e-3);
    CHECK(rep.rows.back().min_outside > 1e6);

    // gap against the closed form, not F0 from the library
    MaterialParams q = p;
    q.rho = 1e-4;
    for (const DevTensor3& a : samples) {
        const double r = norm(a);
        if (r > p.c3) continue;
        const double gap = F0_oracle(p, r) - F_rho(q, a);
        CHECK(gap >= -1e-15);
        CHECK(gap <= 1e-3);
    }
    // |a| = 1.5 c3 blows up
    const Vec5 far = 1.5 * p.c3 * Vec5::Unit(2);
    q.rho = 1e-6;
    CHECK(F_rho(q, DevTensor3(far)) > 1e6);

    CHECK_THROWS_AS(gamma_check_F(p, {0.1, 0.1}, samples), std::invalid_argument);
}

TEST_CASE("schedule validation lists every violation")
{
    LimitSchedule s;
    s.rho = {0.1, 0.2};
    s.nu = {0.01, 0.02};
    s.tau = {0.1, 0.2, 0.3};
    s.n = {4, 2};
    const auto v = s.violations();
    CHECK(v.size() >= 5);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    LimitSchedule ok;
    ok.rho = {0.1, 0.01};
    ok.target_terminal();
    CHECK(ok.violations().empty());
    CHECK(ok.rho_star == 0.01);
}

TEST_CASE("constitutive arrow b: rho down at fixed tau")
{
    MaterialParams p;
    DissipationSpec d(0.5);
    LimitSchedule s;
    s.label = "b";
    s.rho = {1e-1, 1e-2, 1e-3, 1e-4};
    s.tau = {1.0 / 64};
    s.rho_star = 0.0;
    s.tau_star = 1.0 / 64;

    // crossing the activation threshold of the limit model
    const StressPath cross = StressPath::ramp_unload(1.0, 3.0, default_direction());
    const LimitTable t = limit_constitutive(p, d, cross, s);
    REQUIRE(t.rows.size() == 4);
    CHECK(t.decreasing);
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        const double rate = std::log(t.rows[k - 1].state_diff / t.rows[k].state_diff) / std::log(10.0);
        CHECK(rate > 0.5);
    }
    // near the threshold the regularized z is about (rho^2/2)^(1/3)
    CHECK(t.rows.back().state_diff == doctest::Approx(std::cbrt(0.5e-8)).epsilon(0.1));

    // below it the gap is of order rho
    const StressPath below = StressPath::ramp_unload(1.0, 0.9, default_direction());
    const LimitTable u = limit_constitutive(p, d, below, s);
    CHECK(u.decreasing);
    CHECK(u.rows.back().state_diff <= 1e-4);
}

TEST_CASE("constitutive arrow a: tau down at rho > 0 with order about 1/2")
{
    MaterialParams p;
    DissipationSpec d(0.5);
    LimitSchedule s;
    s.rho = {0.1};
    s.tau = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    s.rho_star = 0.1;
    s.tau_star = 0.0;
    const StressPath path = StressPath::ramp_unload(1.0, 3.0, default_direction());
    LimitOptions opt;
    opt.threads = 2;
    const LimitTable t = limit_constitutive(p, d, path, s, opt);
    CHECK(t.decreasing);
    const double order = std::log2(t.rows.front().state_diff / t.rows.back().state_diff) / 3.0;
    CHECK(order >= 0.45);
    CHECK(t.energy_ratio > 0.0);
}

TEST_CASE("constant schedules give zero differences")
{
    MaterialParams p;
    DissipationSpec d(0.5);
    LimitSchedule s;
    s.rho = {0.1, 0.1, 0.1};
    s.tau = {0.125};
    s.target_terminal();
    const StressPath path = StressPath::ramp_unload(1.0, 2.0, default_direction());
    const LimitTable t = limit_constitutive(p, d, path, s);
    CHECK(t.decreasing);
    for (const LimitRow& r : t.rows) {
        CHECK(r.state_diff == 0.0);
        CHECK(r.energy_diff == 0.0);
        CHECK(r.diss_diff == 0.0);
    }

    BvpProblem pb = traction_problem(2.0);
    LimitSchedule m;
    m.rho = {0.1, 0.1};
    m.nu = {0.01};
    m.n = {2};
    m.target_terminal();
    const LimitTable mt = limit_minproblem(pb, 0.5, m);
    for (const LimitRow& r : mt.rows) CHECK(r.state_diff == 0.0);
}

TEST_CASE("minimum problem: rho down and h down")
{
    BvpProblem pb = traction_problem(2.0);
    LimitSchedule s;
    s.rho = {1e-1, 1e-2, 1e-3};
    s.nu = {0.01};
    s.n = {2};
    s.rho_star = 0.0;
    s.nu_star = 0.01;
    s.n_star = 2;
    const LimitTable t = limit_minproblem(pb, 0.5, s);
    CHECK(t.decreasing);
    CHECK(t.rows.back().state_diff < t.rows.front().state_diff);

    LimitSchedule h;
    h.rho = {0.1};
    h.nu = {0.01};
    h.n = {1, 2, 4};
    h.rho_star = 0.1;
    h.nu_star = 0.01;
    h.n_star = 0;
    const LimitTable th = limit_minproblem(pb, 0.5, h);
    REQUIRE(th.rows.size() == 3);
    CHECK(th.decreasing);
    CHECK(th.rows[0].h > th.rows[2].h);
}

TEST_CASE("evolution: tau arrow and a joint arrow between levels")
{
    BvpProblem pb = traction_problem(2.0);
    LimitSchedule s;
    s.rho = {0.1};
    s.nu = {0.01};
    s.tau = {0.25, 0.125, 0.0625};
    s.n = {2};
    s.rho_star = 0.1;
    s.nu_star = 0.01;
    s.tau_star = 0.0;
    s.n_star = 2;
    const LimitTable t = limit_evolution(pb, s);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.decreasing);
    CHECK(t.apriori_holds);
    CHECK(t.apriori_ratio > 0.0);
    CHECK(t.apriori_ratio <= 1.0);

    LimitSchedule j;
    j.rho = {0.1, 0.01, 0.001};
    j.nu = {0.01};
    j.tau = {0.25, 0.125, 0.0625};
    j.n = {1, 2, 4};
    j.target_terminal();
    LimitOptions opt;
    opt.inter_level = true;
    const LimitTable tj = limit_evolution(pb, j, opt);
    REQUIRE(tj.rows.size() == 2);
    CHECK(tj.reference == "next member");
    for (const LimitRow& r : tj.rows) CHECK(std::isfinite(r.state_diff));
}

TEST_CASE("limit CSV has the documented columns and round-trips")
{
    LimitTable t;
    t.rows.push_back({0, 0.1, 0.01, 0.125, 0.5, 1.0 / 3.0, 2e-17, 0.0});
    std::ostringstream os;
    write_limit_csv(os, t);
    std::istringstream is(os.str());
    const csv::Table tab = csv::read(is);
    CHECK(tab.header == std::vector<std::string>{"k", "rho", "nu", "tau", "h", "state_diff", "energy_diff", "diss_diff"});
    REQUIRE(tab.rows.size() == 1);
    CHECK(std::stod(tab.rows[0][5]) == 1.0 / 3.0);
    CHECK(std::stod(tab.rows[0][6]) == 2e-17);
}
