#pragma once

// Symmetric and deviatoric 3x3 tensors and isotropic elasticity.
//
// SymTensor3 stores the six tensor components in the order
//   xx, yy, zz, yz, xz, xy
// with no Voigt scaling: c[3] is the (y,z) entry of the full matrix.
// Hence a:b = sum(diag) + 2*sum(offdiag).
//
// DevTensor3 stores coordinates with respect to an orthonormal basis of
// the deviatoric subspace:
//   E1 = diag(1,-1,0)/sqrt2      E2 = diag(1,1,-2)/sqrt6
//   E3 = (e_y(x)e_z + e_z(x)e_y)/sqrt2, E4 likewise for xz, E5 for xy
// so a:b is the Euclidean dot product of the coordinate vectors.

#include <Eigen/Dense>
#include <array>

namespace sma {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

struct SymTensor3 {
    std::array<double, 6> c{0, 0, 0, 0, 0, 0};

    static SymTensor3 zero() { return {}; }
    static SymTensor3 identity() { return {{1, 1, 1, 0, 0, 0}}; }
    static SymTensor3 diag(double a, double b, double d) { return {{a, b, d, 0, 0, 0}}; }
    static SymTensor3 from_matrix(const Eigen::Matrix3d& m);  // symmetrizes
    Eigen::Matrix3d to_matrix() const;

    double trace() const { return c[0] + c[1] + c[2]; }
    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    SymTensor3& operator+=(const SymTensor3& o);
    SymTensor3& operator-=(const SymTensor3& o);
    SymTensor3& operator*=(double s);
};

SymTensor3 operator+(SymTensor3 a, const SymTensor3& b);
SymTensor3 operator-(SymTensor3 a, const SymTensor3& b);
SymTensor3 operator*(double s, SymTensor3 a);
SymTensor3 operator*(SymTensor3 a, double s);
double ddot(const SymTensor3& a, const SymTensor3& b);
double norm(const SymTensor3& a);

struct DevTensor3 {
    Vec5 v = Vec5::Zero();

    DevTensor3() = default;
    explicit DevTensor3(const Vec5& x) : v(x) {}
    static DevTensor3 zero() { return {}; }

    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }

    DevTensor3& operator+=(const DevTensor3& o) { v += o.v; return *this; }
    DevTensor3& operator-=(const DevTensor3& o) { v -= o.v; return *this; }
    DevTensor3& operator*=(double s) { v *= s; return *this; }
};

inline DevTensor3 operator+(DevTensor3 a, const DevTensor3& b) { return a += b; }
inline DevTensor3 operator-(DevTensor3 a, const DevTensor3& b) { return a -= b; }
inline DevTensor3 operator-(DevTensor3 a) { a.v = -a.v; return a; }
inline DevTensor3 operator*(double s, DevTensor3 a) { return a *= s; }
inline DevTensor3 operator*(DevTensor3 a, double s) { return a *= s; }
inline double ddot(const DevTensor3& a, const DevTensor3& b) { return a.v.dot(b.v); }
inline double norm(const DevTensor3& a) { return a.v.norm(); }

// Deviatoric part and trace: a = embed(dev) + tr/3 * 1.
struct DevSplit {
    DevTensor3 dev;
    double trace = 0.0;
};
DevSplit dev_split(const SymTensor3& a);
DevTensor3 dev(const SymTensor3& a);
SymTensor3 embed(const DevTensor3& d);

// 6x5 matrix mapping deviatoric coordinates to Mandel vectors
// (xx, yy, zz, sqrt2 yz, sqrt2 xz, sqrt2 xy).  Columns are orthonormal.
const Eigen::Matrix<double, 6, 5>& dev_to_mandel();

struct Elasticity {
    double G = 1.0;
    double kappa = 1.0;
};

SymTensor3 apply_C(const Elasticity& E, const SymTensor3& a);
SymTensor3 apply_C_inverse(const Elasticity& E, const SymTensor3& s);

} // namespace sma
