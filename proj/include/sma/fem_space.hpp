#pragma once

#include "sma/material.hpp"
#include "sma/mesh.hpp"

#include <Eigen/Sparse>
#include <iosfwd>
#include <vector>

namespace sma {

using DofVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// P1 spaces on a BoxMesh.  A joint vector y stacks the displacement DOFs
// (3 per node, index 3*node + component) followed by the transformation-strain
// DOFs (5 deviatoric coordinates per node, offset 3*num_nodes + 5*node + k).
class FeSpace {
public:
    explicit FeSpace(BoxMesh mesh);

    const BoxMesh& mesh() const { return mesh_; }
    int num_nodes() const { return mesh_.num_nodes(); }
    int num_u() const { return 3 * num_nodes(); }
    int num_z() const { return 5 * num_nodes(); }
    int num_dofs() const { return num_u() + num_z(); }
    int z_offset() const { return num_u(); }

    bool u_dof_fixed(int dof) const { return fixed_[dof / 3]; }
    const std::vector<int>& free_u_dofs() const { return free_u_; }
    // Joint DOFs of the homogeneous subspace: free u-DOFs then all z-DOFs.
    const std::vector<int>& homogeneous_dofs() const { return homogeneous_; }
    const Eigen::VectorXd& lumped_mass() const { return lumped_; }

    double volume(int t) const { return vol_[t]; }
    const Eigen::Matrix<double, 4, 3>& gradients(int t) const { return grad_[t]; }

    DofVector zeros() const { return DofVector::Zero(num_dofs()); }

private:
    BoxMesh mesh_;
    std::vector<bool> fixed_;
    std::vector<int> free_u_, homogeneous_;
    Eigen::VectorXd lumped_;
    std::vector<double> vol_;
    std::vector<Eigen::Matrix<double, 4, 3>> grad_;
};

// Hessian H of the quadratic form A_nu on the joint DOFs, so that
//   A_nu(y) = 1/2 y^T H y  and  B_nu(y1, y2) = 1/2 y1^T H y2.
// Integrals of products of P1 functions are exact.
struct QuadraticForm {
    SparseMatrix H;
    SparseMatrix S;  // scalar nodal block of the z-part: (2G + 2c2) M + nu K
    double energy(const DofVector& y) const { return 0.5 * y.dot(H * y); }
    double bilinear(const DofVector& a, const DofVector& b) const { return 0.5 * a.dot(H * b); }
};

QuadraticForm assemble_A_nu(const FeSpace& space, const MaterialParams& p);

// Scalar P1 mass and stiffness matrices (node x node).
SparseMatrix scalar_mass(const FeSpace& space);
SparseMatrix scalar_laplacian(const FeSpace& space);

// f(x) = c + A x
struct AffineField {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Vector3d operator()(const Eigen::Vector3d& x) const { return c + A * x; }
    bool is_zero() const { return c.isZero(0.0) && A.isZero(0.0); }
};

struct LoadFrame {
    double t = 0.0;
    AffineField body;       // f on the domain
    AffineField traction;   // g on the traction sides
    AffineField dirichlet;  // u^Dir on the Dirichlet sides
};

// Data piecewise linear in time between frames.
struct LoadProgram {
    std::vector<LoadFrame> frames;
    std::vector<BoxSide> traction_sides{BoxSide::XMax};

    static LoadProgram zero(double T);
    LoadFrame at(double t) const;
    double T() const { return frames.back().t; }
    void validate() const;
};

// <l(t), u> coefficients over all u-DOFs (entries at Dirichlet DOFs included).
DofVector assemble_load(const FeSpace& space, const LoadProgram& program, double t);
// Joint vector with u^Dir(t) at Dirichlet nodes and zeros elsewhere.
DofVector dirichlet_lifting(const FeSpace& space, const LoadProgram& program, double t);

// Interpolation matrix from `coarse` to the nested `fine` space on joint DOFs.
SparseMatrix prolongation(const FeSpace& coarse, const FeSpace& fine);

struct Projection {
    DofVector y;                  // coarse joint vector
    double orthogonality = 0.0;   // |P^T H (y_fine - P y)| / |P^T H y_fine| on free coarse DOFs
};

// Galerkin projection w.r.t. B_nu onto the Dirichlet-constrained coarse space.
// Throws SingularSystem when the form is not definite there.
Projection galerkin_project(const FeSpace& coarse, const FeSpace& fine, const MaterialParams& p,
                            const DofVector& y_fine);

// Clement-type interpolant: coarse nodal values are averages of the fine
// z-field over the coarse node patches.  z vectors hold 5 coordinates per node.
DofVector interp_constrained(const FeSpace& coarse, const FeSpace& fine, const DofVector& z_fine);

// Smallest eigenvalue of H restricted to the homogeneous subspace.
double smallest_constrained_eigenvalue(const FeSpace& space, const QuadraticForm& form, int iterations = 200);

// Columnar text dump of mesh and nodal fields.
void write_field_dump(std::ostream& os, const FeSpace& space, const DofVector& y, double t);

} // namespace sma
