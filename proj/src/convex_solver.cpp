#include "sma/convex_solver.hpp"

#include "sma/material.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sma {

namespace {

bool has_dissipation(const PointProblem& pb) { return pb.dissipation && pb.scale > 0; }
bool has_radial(const PointProblem& pb) { return pb.origin_weight > 0 || pb.ball_radius.has_value(); }

DevTensor3 radial_prox(const DevTensor3& x, double shrink, const std::optional<double>& ball)
{
    const double r = norm(x);
    if (r == 0) return x;
    double target = std::max(r - shrink, 0.0);
    if (ball) target = std::min(target, *ball);
    DevTensor3 y = (target / r) * x;
    if (ball) y = project_to_ball(y, *ball);
    return y;
}

DevTensor3 shifted_prox(const PointProblem& pb, double t, const DevTensor3& x)
{
    return pb.anchor + pb.dissipation->prox(t * pb.scale, x - pb.anchor);
}

// Dykstra-like splitting for the prox of a sum of two convex functions.
DevTensor3 dykstra_prox(const PointProblem& pb, double t, const DevTensor3& x0)
{
    const double tol = 1e-12 * (1.0 + norm(x0));
    DevTensor3 x = x0, p, q, y;
    for (int it = 0; it < 100000; ++it) {
        y = radial_prox(x + p, t * pb.origin_weight, pb.ball_radius);
        p = x + p - y;
        const DevTensor3 xn = shifted_prox(pb, t, y + q);
        q = y + q - xn;
        const double change = norm(xn - x);
        x = xn;
        if (change <= tol && norm(y - x) <= tol) {
            if (!pb.ball_radius || norm(x) <= *pb.ball_radius) return x;
            return y;
        }
    }
    throw NonConvergence("composite prox: Dykstra iteration did not converge");
}


// Exact prox of  al|y| + be|y - a| + I(|y| <= c)  for a != 0 when the
// minimizer is neither 0 nor a.  The minimizer lies in span{x, a}.  With
// h = al|.| + I_ball the dual function
//   psi(q) = -q.a + min_y 1/2|y - x|^2 + h(y) + q.y,   |q| <= be,
// is maximized on the circle |q| = be, and y = prox_h(x - q).
DevTensor3 planar_prox(const DevTensor3& x, const DevTensor3& a, double al, double be,
                       const std::optional<double>& ball)
{
    using V2 = Eigen::Vector2d;
    const double na = norm(a);
    const DevTensor3 e1 = (1.0 / na) * a;
    const DevTensor3 w = x - ddot(x, e1) * e1;
    const double nw = norm(w);
    const DevTensor3 e2 = nw > 0 ? (1.0 / nw) * w : DevTensor3::zero();
    const V2 X(ddot(x, e1), nw), A(na, 0.0);

    auto prox_h = [&](const V2& z) -> V2 {
        const double r = z.norm();
        if (r <= al) return V2::Zero();
        double s = r - al;
        if (ball) s = std::min(s, *ball);
        return (s / r) * z;
    };
    auto q_of = [&](double ph) { return V2(be * std::cos(ph), be * std::sin(ph)); };
    auto psi = [&](double ph) {
        const V2 q = q_of(ph), z = X - q, y = prox_h(z);
        return -q.dot(A) - 0.5 * z.squaredNorm() + 0.5 * (y - z).squaredNorm() + al * y.norm();
    };
    auto dpsi = [&](double ph) {
        const V2 q = q_of(ph);
        return (prox_h(X - q) - A).dot(V2(-q[1], q[0]));
    };

    auto search = [&](int K) {
        const double h = 2.0 * M_PI / K;
        int best = 0;
        double pb = psi(0.0);
        for (int k = 1; k < K; ++k)
            if (const double v = psi(k * h); v > pb) { pb = v; best = k; }
        double lo = (best - 1) * h, hi = (best + 1) * h;
        for (int it = 0; it < 200 && hi - lo > 4e-16 * (1.0 + std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (dpsi(mid) > 0) lo = mid; else hi = mid;
        }
        return prox_h(X - q_of(0.5 * (lo + hi)));
    };
    // primal optimality away from the kinks
    auto optimal = [&](const V2& y) {
        const double r0 = y.norm(), r1 = (y - A).norm();
        if (r0 == 0.0 || r1 == 0.0) return false;
        V2 g = y - X + al * y / r0 + be * (y - A) / r1;
        const double tol = 1e-9 * (1.0 + X.norm() + al + be);
        if (ball && r0 >= *ball * (1.0 - 1e-12)) {
            const V2 n = y / r0;
            if (g.dot(n) > tol) return false;
            g -= g.dot(n) * n;
        }
        return g.norm() <= tol;
    };
    V2 y = search(32);
    if (!optimal(y)) y = search(2048);
    const DevTensor3 out = y[0] * e1 + y[1] * e2;
    return ball ? project_to_ball(out, *ball) : out;
}

} // namespace

DevTensor3 composite_prox(const PointProblem& pb, double t, const DevTensor3& x)
{
    const bool d = has_dissipation(pb), rad = has_radial(pb);
    if (!d) return rad ? radial_prox(x, t * pb.origin_weight, pb.ball_radius) : x;
    if (!rad) return shifted_prox(pb, t, x);
    if (pb.anchor.v.isZero(0.0) && pb.dissipation->is_isotropic()) {
        const double w = pb.scale * pb.dissipation->upper_constant() + pb.origin_weight;
        return radial_prox(x, t * w, pb.ball_radius);
    }
    if (pb.dissipation->is_isotropic()) {
        // kinks at the origin and at the anchor are checked exactly
        const double al = t * pb.origin_weight;
        const double be = t * pb.scale * pb.dissipation->upper_constant();
        const DevTensor3& a = pb.anchor;
        const DevTensor3 ah = (1.0 / norm(a)) * a;
        if (norm(x + be * ah) <= al) return DevTensor3::zero();
        if (!pb.ball_radius || norm(a) <= *pb.ball_radius) {
            DevTensor3 v = x - a - al * ah;
            if (pb.ball_radius && norm(a) >= *pb.ball_radius * (1.0 - 1e-14))
                v -= std::max(0.0, ddot(v, ah)) * ah;
            if (norm(v) <= be) return a;
        }
        return planar_prox(x, a, al, be, pb.ball_radius);
    }
    return dykstra_prox(pb, t, x);
}

double nonsmooth_value(const PointProblem& pb, const DevTensor3& z)
{
    double v = pb.origin_weight * norm(z);
    if (has_dissipation(pb)) v += pb.scale * pb.dissipation->value(z - pb.anchor);
    return v;
}

double objective_value(const PointProblem& pb, const DevTensor3& z)
{
    return pb.smooth.value(z.v) + nonsmooth_value(pb, z);
}

double stationarity_residual(const PointProblem& pb, const DevTensor3& z)
{
    const double L = pb.smooth.lipschitz;
    const DevTensor3 g(pb.smooth.gradient(z.v));
    const DevTensor3 zp = composite_prox(pb, 1.0 / L, z - (1.0 / L) * g);
    return norm(z - zp) * L;
}

PointSolution solve_point(const PointProblem& pb)
{
    if (!(pb.tolerance > 0)) throw std::invalid_argument("solve_point: tolerance must be > 0");
    if (!(pb.smooth.lipschitz > 0)) throw std::invalid_argument("solve_point: lipschitz must be > 0");

    const double L = pb.smooth.lipschitz;
    const double t_min = 1.0 / L;
    const double t_max = pb.smooth.modulus > 0 ? 1.0 / pb.smooth.modulus : 1e6 * t_min;
    const bool newton_ok = static_cast<bool>(pb.smooth.hessian) && !has_radial(pb);

    PointSolution sol;
    DevTensor3 z = pb.start.value_or(pb.anchor);
    if (pb.ball_radius) z = project_to_ball(z, *pb.ball_radius);

    double s = pb.smooth.value(z.v);
    Vec5 g = pb.smooth.gradient(z.v);
    double F = s + nonsmooth_value(pb, z);
    double t = t_min;
    if (pb.record_history) sol.history.push_back(F);

    for (int it = 0; it < pb.max_iterations; ++it) {
        const DevTensor3 zr = composite_prox(pb, t_min, z - t_min * DevTensor3(g));
        const double res = norm(z - zr) * L;
        if (res <= pb.tolerance * (1.0 + g.norm())) {
            // the prox point may sit exactly on a kink the iterate only approaches
            const double Fr = objective_value(pb, zr);
            if (Fr <= F && zr.v != z.v) {
                z = zr;
                F = Fr;
            }
            sol.z = z;
            sol.objective = F;
            sol.residual = res;
            sol.iterations = it;
            return sol;
        }

        // Newton step on the locally smooth total objective.
        if (newton_ok) {
            const auto total_grad = [&](const DevTensor3& x, const Vec5& gx) -> std::optional<Vec5> {
                if (!has_dissipation(pb)) return gx;
                const auto gd = pb.dissipation->gradient(x - pb.anchor);
                if (!gd) return std::nullopt;
                return Vec5(gx + pb.scale * *gd);
            };
            const auto gt = total_grad(z, g);
            std::optional<Mat5> hd = Mat5::Zero();
            if (has_dissipation(pb)) hd = pb.dissipation->hessian(z - pb.anchor);
            if (gt && hd) {
                const double sc = has_dissipation(pb) ? pb.scale : 0.0;
                const Mat5 Ht = pb.smooth.hessian(z.v) + sc * *hd;
                const Eigen::LLT<Mat5> llt(Ht);
                if (llt.info() == Eigen::Success) {
                    const Vec5 step = -llt.solve(*gt);
                    const double slope = gt->dot(step);
                    const double noise = 1e-15 * (1.0 + std::abs(F));
                    bool accepted = false;
                    double a = 1.0;
                    for (int k = 0; k < 30 && slope < 0; ++k, a *= 0.5) {
                        const DevTensor3 zn(z.v + a * step);
                        if (zn.v == z.v) break;
                        const double Fn = objective_value(pb, zn);
                        bool ok = Fn <= F + 1e-4 * a * slope && Fn < F;
                        if (!ok && k == 0 && -slope <= 1e3 * noise && Fn <= F + noise) {
                            // objective differences are below roundoff: judge by the gradient
                            const Vec5 gn = pb.smooth.gradient(zn.v);
                            const auto gtn = total_grad(zn, gn);
                            ok = gtn && gtn->norm() < 0.5 * gt->norm();
                        }
                        if (ok) {
                            z = zn;
                            s = pb.smooth.value(z.v);
                            g = pb.smooth.gradient(z.v);
                            F = Fn;
                            accepted = true;
                            break;
                        }
                    }
                    if (accepted) {
                        if (pb.record_history) sol.history.push_back(F);
                        continue;
                    }
                }
            }
        }

        // Prox-gradient step with backtracking from the BB guess.
        t = std::clamp(t, t_min, t_max);
        DevTensor3 zn;
        double sn = 0.0;
        for (;;) {
            zn = composite_prox(pb, t, z - t * DevTensor3(g));
            sn = pb.smooth.value(zn.v);
            const Vec5 dz = zn.v - z.v;
            if (t <= t_min || sn <= s + g.dot(dz) + dz.squaredNorm() / (2.0 * t) + 1e-15 * std::abs(s)) break;
            t = std::max(0.5 * t, t_min);
        }
        const Vec5 gn = pb.smooth.gradient(zn.v);
        const Vec5 ds = zn.v - z.v, dg = gn - g;
        const double sy = ds.dot(dg);
        t = sy > 0 ? ds.squaredNorm() / sy : t_min;
        const double Fn = sn + nonsmooth_value(pb, zn);
        z = zn;
        s = sn;
        g = gn;
        F = Fn;
        if (pb.record_history) sol.history.push_back(F);
    }
    std::ostringstream os;
    os << "solve_point: no convergence after " << pb.max_iterations << " iterations";
    throw NonConvergence(os.str());
}

} // namespace sma
