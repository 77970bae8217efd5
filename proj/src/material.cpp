#include "sma/material.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sma {

double ExtendedReal::value() const
{
    if (inf_) throw std::domain_error("ExtendedReal: value of +infinity requested");
    return value_;
}

std::vector<std::string> MaterialParams::violations() const
{
    std::vector<std::string> out;
    auto need = [&](bool ok, const char* msg) {
        if (!ok) out.emplace_back(msg);
    };
    need(elasticity.G > 0, "G must be > 0");
    need(elasticity.kappa > 0, "kappa must be > 0");
    need(c1 > 0, "c1 must be > 0");
    need(c2 > 0, "c2 must be > 0");
    need(c3 > 0, "c3 must be > 0");
    need(rho >= 0, "rho must be >= 0");
    need(nu >= 0, "nu must be >= 0");
    need(R > 0, "R must be > 0");
    need(penalty_width > 0, "penalty_width must be > 0");
    return out;
}

void MaterialParams::validate() const
{
    auto v = violations();
    if (v.empty()) return;
    std::ostringstream os;
    os << "invalid material parameters:";
    for (const auto& s : v) os << ' ' << s << ';';
    throw std::invalid_argument(os.str());
}

double MaterialParams::alpha() const
{
    // Per deviatoric direction the form is G e^2 - 2G e w + (G + c2) w^2,
    // per volumetric direction (3 kappa / 2) x^2.
    const double G = elasticity.G;
    const double tr = 2.0 * G + c2;
    const double det = G * c2;
    const double lam_dev = 2.0 * det / (tr + std::sqrt(tr * tr - 4.0 * det));
    return std::min(1.5 * elasticity.kappa, lam_dev);
}

// phi'' is a hat: 0 at c3, 6/delta at c3+delta, 0 at c3+2 delta.
double phi(double r, double c3, double delta)
{
    const double s = r - c3;
    if (s <= 0) return 0.0;
    if (s <= delta) return s * s * s / (delta * delta);
    if (s <= 2 * delta) {
        const double w = 2 * delta - s;
        return 6.0 * (s - delta) + w * w * w / (delta * delta);
    }
    return 6.0 * (s - delta);
}

double dphi(double r, double c3, double delta)
{
    const double s = r - c3;
    if (s <= 0) return 0.0;
    if (s <= delta) return 3.0 * s * s / (delta * delta);
    if (s <= 2 * delta) {
        const double w = 2 * delta - s;
        return 6.0 - 3.0 * w * w / (delta * delta);
    }
    return 6.0;
}

double d2phi(double r, double c3, double delta)
{
    const double s = r - c3;
    if (s <= 0) return 0.0;
    if (s <= delta) return 6.0 * s / (delta * delta);
    if (s <= 2 * delta) return 6.0 * (2 * delta - s) / (delta * delta);
    return 0.0;
}

ExtendedReal F0(const MaterialParams& p, const DevTensor3& a)
{
    const double r = norm(a);
    if (r > p.c3) return ExtendedReal::infinity();
    return p.c1 * r + p.c2 * r * r;
}

namespace {

void require_rho(const MaterialParams& p)
{
    if (!(p.rho > 0)) throw std::invalid_argument("F_rho requires rho > 0; use F0 for rho = 0");
}

// sqrt(rho^2 + r^2) - rho without cancellation.
double soft_abs(double r, double rho) { return r * r / (std::sqrt(rho * rho + r * r) + rho); }

// Radial profile g(r) of G_rho = F_rho - c2 r^2 and the two Hessian
// eigenvalues g''(r) (radial) and g'(r)/r (tangential).
struct Radial {
    double g, dg_over_r, d2g;
};

Radial radial_G(const MaterialParams& p, double r)
{
    const double rho = p.rho, d = p.penalty_width;
    const double q = std::sqrt(rho * rho + r * r);
    Radial out;
    out.g = p.c1 * soft_abs(r, rho) + phi(r, p.c3, d) / rho;
    double tang = p.c1 / q;
    if (r > p.c3) tang += dphi(r, p.c3, d) / (r * rho);
    out.dg_over_r = tang;
    out.d2g = p.c1 * rho * rho / (q * q * q) + d2phi(r, p.c3, d) / rho;
    return out;
}

} // namespace

double G_rho(const MaterialParams& p, const DevTensor3& a)
{
    if (p.rho == 0) return p.c1 * norm(a);
    return radial_G(p, norm(a)).g;
}

DevTensor3 grad_G_rho(const MaterialParams& p, const DevTensor3& a)
{
    require_rho(p);
    return radial_G(p, norm(a)).dg_over_r * a;
}

Mat5 hess_G_rho(const MaterialParams& p, const DevTensor3& a)
{
    require_rho(p);
    const double r = norm(a);
    const Radial g = radial_G(p, r);
    Mat5 H = g.dg_over_r * Mat5::Identity();
    if (r > 0) {
        const Vec5 n = a.v / r;
        H += (g.d2g - g.dg_over_r) * n * n.transpose();
    }
    return H;
}

double F_rho(const MaterialParams& p, const DevTensor3& a)
{
    require_rho(p);
    const double r = norm(a);
    return radial_G(p, r).g + p.c2 * r * r;
}

DevTensor3 grad_F_rho(const MaterialParams& p, const DevTensor3& a)
{
    return grad_G_rho(p, a) + (2.0 * p.c2) * a;
}

Mat5 hess_F_rho(const MaterialParams& p, const DevTensor3& a)
{
    return hess_G_rho(p, a) + 2.0 * p.c2 * Mat5::Identity();
}

double lipschitz_F_rho(const MaterialParams& p)
{
    require_rho(p);
    return p.c1 / p.rho + 2.0 * p.c2 + 6.0 / (p.rho * std::min(p.penalty_width, p.c3));
}

ExtendedReal W_rho(const MaterialParams& p, const SymTensor3& eps, const DevTensor3& z)
{
    const SymTensor3 e = eps - embed(z);
    const double elastic = 0.5 * ddot(apply_C(p.elasticity, e), e);
    if (p.rho == 0) return ExtendedReal(elastic) + F0(p, z);
    return elastic + F_rho(p, z);
}

DevTensor3 project_to_ball(const DevTensor3& z, double radius)
{
    double r = norm(z);
    if (r <= radius) return z;
    double s = radius / r;
    DevTensor3 out = s * z;
    while (norm(out) > radius) {
        s = std::nextafter(s, 0.0);
        out = s * z;
    }
    return out;
}

} // namespace sma
