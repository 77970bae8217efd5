#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sma/material.hpp"
#include "sma/rng.hpp"

#include <Eigen/Eigenvalues>

using namespace sma;

namespace {

MaterialParams defaults(double rho = 0.1)
{
    MaterialParams p;
    p.rho = rho;
    return p;
}

DevTensor3 random_dev(CounterRng& rng, double rmax)
{
    Vec5 v;
    for (int i = 0; i < 5; ++i) v[i] = rng.normal();
    return DevTensor3(v.normalized() * rmax * rng.uniform());
}

DevTensor3 with_norm(double r)
{
    Vec5 v;
    v << 0.3, -0.2, 0.7, 0.1, 0.5;
    return DevTensor3(v.normalized() * r);
}

SymTensor3 random_sym(CounterRng& rng)
{
    SymTensor3 a;
    for (double& c : a.c) c = rng.uniform(-1, 1);
    return a;
}

// phi obtained by integrating the hat-shaped phi'' twice (trapezoid rule).
double phi_by_quadrature(double r, double c3, double delta)
{
    if (r <= c3) return 0.0;
    const int n = 200000;
    const double h = (r - c3) / n;
    auto hat = [&](double s) {
        if (s <= 0) return 0.0;
        if (s <= delta) return 6.0 * s / (delta * delta);
        if (s <= 2 * delta) return 6.0 * (2 * delta - s) / (delta * delta);
        return 0.0;
    };
    double d1 = 0.0, val = 0.0, prev_d1 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s0 = i * h, s1 = (i + 1) * h;
        d1 += 0.5 * h * (hat(s0) + hat(s1));
        val += 0.5 * h * (prev_d1 + d1);
        prev_d1 = d1;
    }
    return val;
}

} // namespace

TEST_CASE("F0 examples")
{
    const MaterialParams p = defaults(0);
    CHECK(F0(p, DevTensor3::zero()) == ExtendedReal(0.0));
    CHECK(F0(p, with_norm(1.0)).value() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(F0(p, with_norm(1.01)).is_infinite());
    CHECK(ExtendedReal(1e300) < ExtendedReal::infinity());
    CHECK_THROWS_AS(ExtendedReal::infinity().value(), std::domain_error);
}

TEST_CASE("F_rho examples")
{
    MaterialParams p = defaults(1.0);
    CHECK(F_rho(p, DevTensor3::zero()) == 0.0);
    CHECK(F_rho(p, with_norm(1.0)) == doctest::Approx(std::sqrt(2.0) - 1 + 0.5).epsilon(1e-14));
    CHECK(norm(grad_F_rho(p, DevTensor3::zero())) == 0.0);
    p.rho = 0;
    CHECK_THROWS_AS(F_rho(p, with_norm(0.5)), std::invalid_argument);
}

TEST_CASE("penalty phi matches double integration of its hat-shaped second derivative")
{
    const double c3 = 1.0, d = 0.1;
    for (double r : {0.5, 1.0, 1.03, 1.1, 1.15, 1.2, 1.5, 2.0}) {
        CHECK(phi(r, c3, d) == doctest::Approx(phi_by_quadrature(r, c3, d)).epsilon(1e-8));
        CHECK((phi(r, c3, d) == 0.0) == (r <= c3));
        CHECK(d2phi(r, c3, d) >= 0.0);
        CHECK(dphi(r, c3, d) <= 6.0);
    }
    // C^1 of phi' across the knots
    for (double k : {1.0, 1.1, 1.2}) {
        CHECK(dphi(k - 1e-12, c3, d) == doctest::Approx(dphi(k + 1e-12, c3, d)).epsilon(1e-9));
        CHECK(d2phi(k - 1e-12, c3, d) == doctest::Approx(d2phi(k + 1e-12, c3, d)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("monotone family and upper bound by F0")
{
    MaterialParams p = defaults();
    for (int i = 0; i <= 40; ++i) {
        const DevTensor3 a = with_norm(2.0 * i / 40.0);
        double prev = -1.0;
        for (double rho = 1.0; rho > 1e-4; rho *= 0.5) {
            p.rho = rho;
            const double f = F_rho(p, a);
            CHECK(f >= prev);
            prev = f;
            CHECK(ExtendedReal(f) <= F0(p, a));
        }
    }
}

TEST_CASE("gradient and Hessian against central differences")
{
    CounterRng rng(21);
    for (double rho : {1.0, 0.1, 0.01}) {
        MaterialParams p = defaults(rho);
        for (int k = 0; k < 100; ++k) {
            const DevTensor3 a = random_dev(rng, 2.0 * p.c3);
            const Vec5 g = grad_F_rho(p, a).v;
            const Mat5 H = hess_F_rho(p, a);
            const double h = 1e-5 * std::max(1.0, norm(a));
            Vec5 fd;
            Mat5 fdH;
            for (int i = 0; i < 5; ++i) {
                DevTensor3 ap = a, am = a;
                ap[i] += h;
                am[i] -= h;
                fd[i] = (F_rho(p, ap) - F_rho(p, am)) / (2 * h);
                fdH.col(i) = (grad_F_rho(p, ap).v - grad_F_rho(p, am).v) / (2 * h);
            }
            CHECK((g - fd).norm() <= 1e-6 * (1 + g.norm()));
            CHECK((H - H.transpose()).norm() < 1e-12 * (1 + H.norm()));
            // phi'' has kinks, so the Hessian check is looser near them
            CHECK((H - fdH).norm() <= 1e-3 * (1 + H.norm()));
            const double lmin = Eigen::SelfAdjointEigenSolver<Mat5>(H).eigenvalues()[0];
            CHECK(lmin >= 2 * p.c2 - 1e-9);
            CHECK(Eigen::SelfAdjointEigenSolver<Mat5>(H).eigenvalues()[4] <= lipschitz_F_rho(p) * (1 + 1e-12));
        }
    }
}

TEST_CASE("G_rho is F_rho without the quadratic term")
{
    CounterRng rng(22);
    MaterialParams p = defaults(0.05);
    for (int k = 0; k < 50; ++k) {
        const DevTensor3 a = random_dev(rng, 2.0);
        CHECK(G_rho(p, a) == doctest::Approx(F_rho(p, a) - p.c2 * a.v.squaredNorm()).epsilon(1e-12));
        CHECK((grad_G_rho(p, a).v + 2 * p.c2 * a.v - grad_F_rho(p, a).v).norm() < 1e-12);
    }
}

TEST_CASE("alpha is the smallest eigenvalue of the quadratic part of W")
{
    CounterRng rng(23);
    for (int k = 0; k < 20; ++k) {
        MaterialParams p;
        p.elasticity = {rng.uniform(0.2, 3), rng.uniform(0.2, 3)};
        p.c2 = rng.uniform(0.1, 2);
        // Q(y) = 1/2 C(eps - z):(eps - z) + c2 |z|^2 in orthonormal coordinates (Mandel eps, dev z)
        auto Q = [&](const Eigen::Matrix<double, 11, 1>& y) {
            SymTensor3 e;
            const double s2 = std::sqrt(2.0);
            for (int i = 0; i < 3; ++i) e[i] = y[i];
            for (int i = 3; i < 6; ++i) e[i] = y[i] / s2;
            const DevTensor3 z(y.tail<5>());
            const SymTensor3 d = e - embed(z);
            return 0.5 * ddot(apply_C(p.elasticity, d), d) + p.c2 * z.v.squaredNorm();
        };
        Eigen::Matrix<double, 11, 11> M;
        for (int i = 0; i < 11; ++i)
            for (int j = 0; j < 11; ++j) {
                Eigen::Matrix<double, 11, 1> ei = Eigen::Matrix<double, 11, 1>::Unit(i), ej = Eigen::Matrix<double, 11, 1>::Unit(j);
                M(i, j) = 0.5 * (Q(ei + ej) - Q(ei) - Q(ej));
            }
        const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 11, 11>>(M).eigenvalues()[0];
        CHECK(p.alpha() == doctest::Approx(lmin).epsilon(1e-10));
    }
    MaterialParams p;
    CHECK(p.alpha() == doctest::Approx((2.5 - std::sqrt(4.25)) / 2).epsilon(1e-14));
}

TEST_CASE("W_rho examples, lower bound and convexity witness")
{
    CounterRng rng(24);
    for (double rho : {0.0, 0.1}) {
        const MaterialParams p = defaults(rho);
        CHECK(W_rho(p, SymTensor3::zero(), DevTensor3::zero()) == ExtendedReal(0.0));
        const DevTensor3 z = with_norm(0.7);
        const ExtendedReal wz = W_rho(p, embed(z), z);
        if (rho > 0)
            CHECK(wz.value() == doctest::Approx(F_rho(p, z)).epsilon(1e-14));
        else
            CHECK(wz.value() == doctest::Approx(F0(p, z).value()).epsilon(1e-14));

        const double a = p.alpha();
        for (int k = 0; k < 200; ++k) {
            const SymTensor3 e1 = random_sym(rng), e2 = random_sym(rng);
            const DevTensor3 z1 = random_dev(rng, p.c3), z2 = random_dev(rng, p.c3);
            const double w1 = W_rho(p, e1, z1).value(), w2 = W_rho(p, e2, z2).value();
            const double wm = W_rho(p, 0.5 * (e1 + e2), 0.5 * (z1 + z2)).value();
            const double d2 = ddot(e1 - e2, e1 - e2) + (z1 - z2).v.squaredNorm();
            CHECK(wm <= 0.5 * (w1 + w2) - a / 4 * d2 * (1 - 1e-9));
            const SymTensor3 ed = embed(dev(e1));
            const double lb = p.elasticity.G * ddot(ed - embed(z1), ed - embed(z1)) +
                              0.5 * p.elasticity.kappa * e1.trace() * e1.trace() + p.c2 * z1.v.squaredNorm();
            CHECK(w1 >= lb * (1 - 1e-12));
        }
    }
}

TEST_CASE("parameter validation lists every violation")
{
    MaterialParams p;
    p.c3 = -1;
    p.R = 0;
    const auto v = p.violations();
    REQUIRE(v.size() == 2);
    CHECK(v[0] == "c3 must be > 0");
    CHECK(v[1] == "R must be > 0");
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("project_to_ball never exceeds the radius")
{
    CounterRng rng(25);
    for (int k = 0; k < 1000; ++k) {
        const DevTensor3 z = random_dev(rng, 5.0);
        const double r = rng.uniform(0.1, 2);
        CHECK(norm(project_to_ball(z, r)) <= r);
    }
}
