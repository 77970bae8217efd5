#include "sma/dissipation.hpp"

#include <stdexcept>

namespace sma {

DissipationSpec::DissipationSpec(double R) : R_(R)
{
    if (!(R > 0)) throw std::invalid_argument("R must be > 0");
}

double DissipationSpec::value(const DevTensor3& a) const { return R_ * norm(a); }

DevTensor3 DissipationSpec::prox(double lambda, const DevTensor3& x) const
{
    if (!(lambda > 0)) throw std::invalid_argument("prox_D: lambda must be > 0");
    const double r = norm(x);
    const double t = lambda * R_;
    if (r <= t) return DevTensor3::zero();
    return (1.0 - t / r) * x;
}

std::optional<Vec5> DissipationSpec::gradient(const DevTensor3& a) const
{
    const double r = norm(a);
    if (r == 0) return std::nullopt;
    return Vec5(R_ / r * a.v);
}

std::optional<Mat5> DissipationSpec::hessian(const DevTensor3& a) const
{
    const double r = norm(a);
    if (r == 0) return std::nullopt;
    const Vec5 n = a.v / r;
    return Mat5((R_ / r) * (Mat5::Identity() - n * n.transpose()));
}

double D_eval(const DissipationDensity& d, const DevTensor3& a) { return d.value(a); }

DevTensor3 prox_D(const DissipationDensity& d, double lambda, const DevTensor3& x)
{
    return d.prox(lambda, x);
}

double diss_over_path(const DissipationDensity& d, const std::vector<DevTensor3>& samples)
{
    if (samples.empty()) throw std::invalid_argument("diss_over_path: empty sample list");
    double s = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) s += d.value(samples[i] - samples[i - 1]);
    return s;
}

} // namespace sma
