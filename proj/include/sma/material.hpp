#pragma once

#include "sma/tensor.hpp"

#include <string>
#include <vector>

namespace sma {

// A real number or +infinity.  Used for energies with a hard constraint.
class ExtendedReal {
public:
    ExtendedReal() = default;
    ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit on purpose
    static ExtendedReal infinity() { ExtendedReal r; r.inf_ = true; return r; }

    bool is_finite() const { return !inf_; }
    bool is_infinite() const { return inf_; }
    // Throws std::domain_error when infinite.
    double value() const;

    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b)
    {
        return a.inf_ == b.inf_ && (a.inf_ || a.value_ == b.value_);
    }
    friend bool operator<(const ExtendedReal& a, const ExtendedReal& b)
    {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.value_ < b.value_;
    }
    friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
    friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
    friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return !(a < b); }
    friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b)
    {
        if (a.inf_ || b.inf_) return infinity();
        return a.value_ + b.value_;
    }

private:
    double value_ = 0.0;
    bool inf_ = false;
};

struct MaterialParams {
    Elasticity elasticity;
    double c1 = 1.0;
    double c2 = 0.5;
    double c3 = 1.0;
    double rho = 0.0;
    double nu = 0.0;
    double R = 0.5;
    double penalty_width = 0.1;

    // Every violated constraint, one message each; empty when valid.
    std::vector<std::string> violations() const;
    // Throws std::invalid_argument listing all violations.
    void validate() const;

    // Uniform convexity constant of W: the quadratic part
    // 1/2 C(eps-z):(eps-z) + c2|z|^2 is >= alpha (|eps|^2 + |z|^2).
    double alpha() const;
};

// Penalty phi and derivatives; r is a norm, c3 the ball radius, delta the width.
double phi(double r, double c3, double delta);
double dphi(double r, double c3, double delta);
double d2phi(double r, double c3, double delta);

ExtendedReal F0(const MaterialParams& p, const DevTensor3& a);
double F_rho(const MaterialParams& p, const DevTensor3& a);
DevTensor3 grad_F_rho(const MaterialParams& p, const DevTensor3& a);
Mat5 hess_F_rho(const MaterialParams& p, const DevTensor3& a);

// G = F - c2|.|^2, the part of F not contained in the quadratic form.
// For rho = 0 only the finite branch c1|a| (+ constraint) remains.
double G_rho(const MaterialParams& p, const DevTensor3& a);
DevTensor3 grad_G_rho(const MaterialParams& p, const DevTensor3& a);
Mat5 hess_G_rho(const MaterialParams& p, const DevTensor3& a);

// Bound on the Hessian of F_rho (rho > 0).
double lipschitz_F_rho(const MaterialParams& p);

ExtendedReal W_rho(const MaterialParams& p, const SymTensor3& eps, const DevTensor3& z);

// z scaled so that its computed norm does not exceed radius.
DevTensor3 project_to_ball(const DevTensor3& z, double radius);

} // namespace sma
