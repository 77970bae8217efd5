#include "sma/tensor.hpp"

#include <cmath>

namespace sma {

namespace {
const double kS2 = std::sqrt(2.0);
const double kS6 = std::sqrt(6.0);
}

SymTensor3 SymTensor3::from_matrix(const Eigen::Matrix3d& m)
{
    return {{m(0, 0), m(1, 1), m(2, 2), 0.5 * (m(1, 2) + m(2, 1)), 0.5 * (m(0, 2) + m(2, 0)),
             0.5 * (m(0, 1) + m(1, 0))}};
}

Eigen::Matrix3d SymTensor3::to_matrix() const
{
    Eigen::Matrix3d m;
    m << c[0], c[5], c[4],
         c[5], c[1], c[3],
         c[4], c[3], c[2];
    return m;
}

SymTensor3& SymTensor3::operator+=(const SymTensor3& o)
{
    for (int i = 0; i < 6; ++i) c[i] += o.c[i];
    return *this;
}

SymTensor3& SymTensor3::operator-=(const SymTensor3& o)
{
    for (int i = 0; i < 6; ++i) c[i] -= o.c[i];
    return *this;
}

SymTensor3& SymTensor3::operator*=(double s)
{
    for (double& x : c) x *= s;
    return *this;
}

SymTensor3 operator+(SymTensor3 a, const SymTensor3& b) { return a += b; }
SymTensor3 operator-(SymTensor3 a, const SymTensor3& b) { return a -= b; }
SymTensor3 operator*(double s, SymTensor3 a) { return a *= s; }
SymTensor3 operator*(SymTensor3 a, double s) { return a *= s; }

double ddot(const SymTensor3& a, const SymTensor3& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5]);
}

double norm(const SymTensor3& a) { return std::sqrt(ddot(a, a)); }

DevTensor3 dev(const SymTensor3& a)
{
    DevTensor3 d;
    d[0] = (a[0] - a[1]) / kS2;
    d[1] = (a[0] + a[1] - 2.0 * a[2]) / kS6;
    d[2] = kS2 * a[3];
    d[3] = kS2 * a[4];
    d[4] = kS2 * a[5];
    return d;
}

DevSplit dev_split(const SymTensor3& a) { return {dev(a), a.trace()}; }

SymTensor3 embed(const DevTensor3& d)
{
    const double p = d[0] / kS2, q = d[1] / kS6;
    return {{p + q, -p + q, -2.0 * q, d[2] / kS2, d[3] / kS2, d[4] / kS2}};
}

const Eigen::Matrix<double, 6, 5>& dev_to_mandel()
{
    static const Eigen::Matrix<double, 6, 5> m = [] {
        Eigen::Matrix<double, 6, 5> r = Eigen::Matrix<double, 6, 5>::Zero();
        r(0, 0) = 1 / kS2;  r(1, 0) = -1 / kS2;
        r(0, 1) = 1 / kS6;  r(1, 1) = 1 / kS6;  r(2, 1) = -2 / kS6;
        r(3, 2) = 1;  r(4, 3) = 1;  r(5, 4) = 1;
        return r;
    }();
    return m;
}

SymTensor3 apply_C(const Elasticity& E, const SymTensor3& a)
{
    const double tr = a.trace();
    SymTensor3 r = 2.0 * E.G * a;
    const double shift = -2.0 * E.G * tr / 3.0 + E.kappa * tr;
    r[0] += shift;
    r[1] += shift;
    r[2] += shift;
    return r;
}

SymTensor3 apply_C_inverse(const Elasticity& E, const SymTensor3& s)
{
    const double tr = s.trace();
    SymTensor3 r = (1.0 / (2.0 * E.G)) * s;
    const double shift = -tr / (6.0 * E.G) + tr / (9.0 * E.kappa);
    r[0] += shift;
    r[1] += shift;
    r[2] += shift;
    return r;
}

} // namespace sma
