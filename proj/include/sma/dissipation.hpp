#pragma once

#include "sma/tensor.hpp"

#include <optional>
#include <vector>

namespace sma {

// Convex, positively 1-homogeneous dissipation density with computable prox.
class DissipationDensity {
public:
    virtual ~DissipationDensity() = default;

    virtual double value(const DevTensor3& a) const = 0;
    // argmin_y 1/2 |y - x|^2 + lambda D(y), lambda > 0.
    virtual DevTensor3 prox(double lambda, const DevTensor3& x) const = 0;
    // Constants with lower |a| <= D(a) <= upper |a|.
    virtual double lower_constant() const = 0;
    virtual double upper_constant() const = 0;

    // Gradient and Hessian where D is smooth (a != 0); empty if unavailable.
    virtual std::optional<Vec5> gradient(const DevTensor3&) const { return std::nullopt; }
    virtual std::optional<Mat5> hessian(const DevTensor3&) const { return std::nullopt; }
    // True when D(a) depends on |a| only.
    virtual bool is_isotropic() const { return false; }
};

// D(a) = R |a|.
class DissipationSpec final : public DissipationDensity {
public:
    explicit DissipationSpec(double R = 0.5);

    double R() const { return R_; }

    double value(const DevTensor3& a) const override;
    DevTensor3 prox(double lambda, const DevTensor3& x) const override;
    double lower_constant() const override { return R_; }
    double upper_constant() const override { return R_; }
    std::optional<Vec5> gradient(const DevTensor3& a) const override;
    std::optional<Mat5> hessian(const DevTensor3& a) const override;
    bool is_isotropic() const override { return true; }

private:
    double R_;
};

double D_eval(const DissipationDensity& d, const DevTensor3& a);
DevTensor3 prox_D(const DissipationDensity& d, double lambda, const DevTensor3& x);
double diss_over_path(const DissipationDensity& d, const std::vector<DevTensor3>& samples);

} // namespace sma
