#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sma/dissipation.hpp"
#include "sma/rng.hpp"

using namespace sma;

namespace {

DevTensor3 random_dev(CounterRng& rng, double scale = 1.0)
{
    Vec5 v;
    for (int i = 0; i < 5; ++i) v[i] = scale * rng.normal();
    return DevTensor3(v);
}

DevTensor3 unit_e()
{
    Vec5 v;
    v << 1, -2, 0.5, 0.25, 1;
    return DevTensor3(v.normalized());
}

} // namespace

TEST_CASE("D_eval examples and properties")
{
    const DissipationSpec d(0.5);
    CHECK(D_eval(d, DevTensor3::zero()) == 0.0);
    CHECK(D_eval(d, 2.0 * unit_e()) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(DissipationSpec(0.0), std::invalid_argument);

    CounterRng rng(31);
    for (int k = 0; k < 500; ++k) {
        const DevTensor3 b = random_dev(rng), c = random_dev(rng);
        CHECK(d.value(b + c) <= d.value(b) + d.value(c) + 1e-15);
        const double lam = rng.uniform(0, 10);
        CHECK(d.value(lam * b) == doctest::Approx(lam * d.value(b)).epsilon(1e-14));
        CHECK(d.value(b) >= d.lower_constant() * norm(b) * (1 - 1e-15));
        CHECK(d.value(b) <= d.upper_constant() * norm(b) * (1 + 1e-15));
    }
}

TEST_CASE("prox_D examples")
{
    const DissipationSpec d(1.0);
    CHECK(norm(prox_D(d, 1.0, DevTensor3::zero())) == 0.0);
    CHECK(norm(prox_D(d, 1.0, 0.5 * unit_e())) == 0.0);

    // brute-force line search along e
    const DevTensor3 x = 3.0 * unit_e();
    double best_t = 0, best = 1e300;
    for (int i = 0; i <= 30000; ++i) {
        const double t = 1e-4 * i;
        const double f = 0.5 * (t - 3.0) * (t - 3.0) + std::abs(t);
        if (f < best) { best = f; best_t = t; }
    }
    CHECK((prox_D(d, 1.0, x).v - best_t * unit_e().v).norm() <= 1e-4);
    CHECK((prox_D(d, 1.0, x).v - 2.0 * unit_e().v).norm() <= 1e-14);
    CHECK_THROWS_AS(prox_D(d, 0.0, x), std::invalid_argument);
}

TEST_CASE("prox_D subgradient optimality")
{
    CounterRng rng(32);
    const DissipationSpec d(0.7);
    for (int k = 0; k < 500; ++k) {
        const DevTensor3 x = random_dev(rng, rng.uniform(0.01, 2));
        const double lam = rng.uniform(0.1, 3);
        const DevTensor3 y = prox_D(d, lam, x);
        if (norm(y) == 0)
            CHECK(norm(y - x) <= lam * d.R() + 1e-10);
        else
            CHECK(((x - y).v - lam * d.R() * y.v / norm(y)).norm() <= 1e-10);
    }
}

TEST_CASE("diss_over_path")
{
    const DissipationSpec d(0.5);
    const DevTensor3 a = 1.3 * unit_e();
    CHECK(diss_over_path(d, {a, a, a}) == 0.0);
    for (int k : {1, 2, 7, 50}) {
        std::vector<DevTensor3> path;
        for (int i = 0; i <= k; ++i) path.push_back((double(i) / k) * a);
        CHECK(diss_over_path(d, path) == doctest::Approx(d.value(a)).epsilon(1e-13));
    }
    CHECK(diss_over_path(d, {DevTensor3::zero(), a, DevTensor3::zero()}) == doctest::Approx(2 * d.value(a)).epsilon(1e-15));
    CHECK_THROWS_AS(diss_over_path(d, {}), std::invalid_argument);

    // duplication of samples does not change the sum
    CounterRng rng(33);
    std::vector<DevTensor3> p, q;
    for (int i = 0; i < 20; ++i) {
        p.push_back(random_dev(rng));
        q.push_back(p.back());
        if (i % 3 == 0) q.push_back(p.back());
    }
    CHECK(diss_over_path(d, p) == diss_over_path(d, q));
}
