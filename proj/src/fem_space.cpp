#include "sma/fem_space.hpp"

#include "sma/csv.hpp"
#include "sma/errors.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sma {

FeSpace::FeSpace(BoxMesh mesh) : mesh_(std::move(mesh))
{
    const int n = mesh_.num_nodes();
    fixed_.resize(n);
    for (int i = 0; i < n; ++i) fixed_[i] = mesh_.is_dirichlet_node(i);
    for (int d = 0; d < 3 * n; ++d)
        if (!fixed_[d / 3]) free_u_.push_back(d);
    homogeneous_ = free_u_;
    for (int d = 0; d < 5 * n; ++d) homogeneous_.push_back(3 * n + d);

    lumped_ = Eigen::VectorXd::Zero(n);
    vol_.resize(mesh_.num_tets());
    grad_.resize(mesh_.num_tets());
    for (int t = 0; t < mesh_.num_tets(); ++t) {
        vol_[t] = mesh_.tet_volume(t);
        grad_[t] = mesh_.tet_gradients(t);
        for (int v : mesh_.tets()[t]) lumped_[v] += vol_[t] / 4.0;
    }
}

namespace {

using Trip = Eigen::Triplet<double>;

// Maps the 12 element displacement DOFs to the Mandel strain vector.
Eigen::Matrix<double, 6, 12> strain_matrix(const Eigen::Matrix<double, 4, 3>& g)
{
    const double r = std::sqrt(0.5);
    Eigen::Matrix<double, 6, 12> B = Eigen::Matrix<double, 6, 12>::Zero();
    for (int a = 0; a < 4; ++a) {
        const double gx = g(a, 0), gy = g(a, 1), gz = g(a, 2);
        const int c = 3 * a;
        B(0, c) = gx;
        B(1, c + 1) = gy;
        B(2, c + 2) = gz;
        B(3, c + 1) = r * gz; B(3, c + 2) = r * gy;
        B(4, c) = r * gz;     B(4, c + 2) = r * gx;
        B(5, c) = r * gy;     B(5, c + 1) = r * gx;
    }
    return B;
}

Eigen::Matrix<double, 6, 6> mandel_stiffness(const Elasticity& E)
{
    Eigen::Matrix<double, 6, 1> one;
    one << 1, 1, 1, 0, 0, 0;
    const Eigen::Matrix<double, 6, 6> J = one * one.transpose();
    return 2 * E.G * (Eigen::Matrix<double, 6, 6>::Identity() - J / 3.0) + E.kappa * J;
}

SparseMatrix build(int n, std::vector<Trip>& trips)
{
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

SparseMatrix selection(const std::vector<int>& dofs, int n)
{
    std::vector<Trip> t;
    for (std::size_t i = 0; i < dofs.size(); ++i) t.emplace_back(static_cast<int>(i), dofs[i], 1.0);
    SparseMatrix s(static_cast<int>(dofs.size()), n);
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

} // namespace

SparseMatrix scalar_mass(const FeSpace& space)
{
    std::vector<Trip> trips;
    const auto& tets = space.mesh().tets();
    for (int t = 0; t < space.mesh().num_tets(); ++t)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                trips.emplace_back(tets[t][a], tets[t][b], space.volume(t) * (a == b ? 2.0 : 1.0) / 20.0);
    return build(space.num_nodes(), trips);
}

SparseMatrix scalar_laplacian(const FeSpace& space)
{
    std::vector<Trip> trips;
    const auto& tets = space.mesh().tets();
    for (int t = 0; t < space.mesh().num_tets(); ++t) {
        const auto& g = space.gradients(t);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                trips.emplace_back(tets[t][a], tets[t][b], space.volume(t) * g.row(a).dot(g.row(b)));
    }
    return build(space.num_nodes(), trips);
}

QuadraticForm assemble_A_nu(const FeSpace& space, const MaterialParams& p)
{
    const int n = space.num_nodes();
    const int zo = space.z_offset();
    const auto Cm = mandel_stiffness(p.elasticity);
    const auto& Em = dev_to_mandel();
    std::vector<Trip> trips;
    const auto& tets = space.mesh().tets();
    for (int t = 0; t < space.mesh().num_tets(); ++t) {
        const double V = space.volume(t);
        const auto B = strain_matrix(space.gradients(t));
        const Eigen::Matrix<double, 12, 12> Kuu = V * B.transpose() * Cm * B;
        const Eigen::Matrix<double, 12, 5> Kuz = -2.0 * p.elasticity.G * (V / 4.0) * B.transpose() * Em;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) trips.emplace_back(3 * tets[t][a] + i, 3 * tets[t][b] + j, Kuu(3 * a + i, 3 * b + j));
                for (int i = 0; i < 3; ++i)
                    for (int k = 0; k < 5; ++k) {
                        trips.emplace_back(3 * tets[t][a] + i, zo + 5 * tets[t][b] + k, Kuz(3 * a + i, k));
                        trips.emplace_back(zo + 5 * tets[t][b] + k, 3 * tets[t][a] + i, Kuz(3 * a + i, k));
                    }
            }
    }
    QuadraticForm form;
    form.S = (2.0 * p.elasticity.G + 2.0 * p.c2) * scalar_mass(space);
    if (p.nu > 0) form.S += p.nu * scalar_laplacian(space);
    form.S.makeCompressed();
    for (int k = 0; k < form.S.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(form.S, k); it; ++it)
            for (int c = 0; c < 5; ++c)
                trips.emplace_back(zo + 5 * static_cast<int>(it.row()) + c, zo + 5 * static_cast<int>(it.col()) + c, it.value());
    form.H = build(space.num_dofs(), trips);
    (void)n;
    return form;
}

LoadProgram LoadProgram::zero(double T)
{
    LoadProgram p;
    p.frames = {LoadFrame{0.0, {}, {}, {}}, LoadFrame{T, {}, {}, {}}};
    return p;
}

LoadFrame LoadProgram::at(double t) const
{
    if (t <= frames.front().t) return frames.front();
    if (t >= frames.back().t) return frames.back();
    std::size_t k = 1;
    while (frames[k].t < t) ++k;
    const LoadFrame& a = frames[k - 1];
    const LoadFrame& b = frames[k];
    const double w = (t - a.t) / (b.t - a.t);
    auto mix = [w](const AffineField& f, const AffineField& g) {
        AffineField r;
        r.c = (1 - w) * f.c + w * g.c;
        r.A = (1 - w) * f.A + w * g.A;
        return r;
    };
    LoadFrame r;
    r.t = t;
    r.body = mix(a.body, b.body);
    r.traction = mix(a.traction, b.traction);
    r.dirichlet = mix(a.dirichlet, b.dirichlet);
    return r;
}

void LoadProgram::validate() const
{
    if (frames.size() < 2) throw std::invalid_argument("LoadProgram: need at least two frames");
    if (frames.front().t != 0.0) throw std::invalid_argument("LoadProgram: first frame must be at t = 0");
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (!(frames[i].t > frames[i - 1].t)) throw std::invalid_argument("LoadProgram: frame times must increase strictly");
}

DofVector assemble_load(const FeSpace& space, const LoadProgram& program, double t)
{
    const LoadFrame f = program.at(t);
    const BoxMesh& m = space.mesh();
    DofVector l = DofVector::Zero(space.num_u());
    if (!f.body.is_zero()) {
        for (int e = 0; e < m.num_tets(); ++e) {
            const auto& v = m.tets()[e];
            const double V = space.volume(e);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    l.segment<3>(3 * v[a]) += V * (a == b ? 2.0 : 1.0) / 20.0 * f.body(m.node(v[b]));
        }
    }
    if (!f.traction.is_zero()) {
        for (const BoundaryFace& face : m.boundary_faces()) {
            if (face.dirichlet) continue;
            if (std::find(program.traction_sides.begin(), program.traction_sides.end(), face.side) == program.traction_sides.end())
                continue;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    l.segment<3>(3 * face.nodes[a]) += face.area * (a == b ? 2.0 : 1.0) / 12.0 * f.traction(m.node(face.nodes[b]));
        }
    }
    return l;
}

DofVector dirichlet_lifting(const FeSpace& space, const LoadProgram& program, double t)
{
    const LoadFrame f = program.at(t);
    DofVector y = space.zeros();
    if (f.dirichlet.is_zero()) return y;
    for (int i = 0; i < space.num_nodes(); ++i)
        if (space.mesh().is_dirichlet_node(i)) y.segment<3>(3 * i) = f.dirichlet(space.mesh().node(i));
    return y;
}

SparseMatrix prolongation(const FeSpace& coarse, const FeSpace& fine)
{
    std::vector<Trip> trips;
    const int nfc = coarse.num_nodes(), nff = fine.num_nodes();
    for (int i = 0; i < nff; ++i) {
        const auto loc = coarse.mesh().locate(fine.mesh().node(i));
        const auto& v = coarse.mesh().tets()[loc.tet];
        for (int a = 0; a < 4; ++a) {
            const double w = loc.weights[a];
            if (w == 0.0) continue;
            for (int c = 0; c < 3; ++c) trips.emplace_back(3 * i + c, 3 * v[a] + c, w);
            for (int c = 0; c < 5; ++c) trips.emplace_back(3 * nff + 5 * i + c, 3 * nfc + 5 * v[a] + c, w);
        }
    }
    SparseMatrix P(fine.num_dofs(), coarse.num_dofs());
    P.setFromTriplets(trips.begin(), trips.end());
    P.makeCompressed();
    return P;
}

Projection galerkin_project(const FeSpace& coarse, const FeSpace& fine, const MaterialParams& p, const DofVector& y)
{
    if (coarse.mesh().dirichlet_sides().empty())
        throw SingularSystem("galerkin_project: no Dirichlet side, the form is only semidefinite");
    if (!(p.c2 > 0) && !(p.nu > 0))
        throw SingularSystem("galerkin_project: need c2 > 0 or nu > 0");
    if (y.size() != fine.num_dofs()) throw std::invalid_argument("galerkin_project: size mismatch");
    for (int d = 0; d < fine.num_u(); ++d)
        if (fine.u_dof_fixed(d) && y[d] != 0.0)
            throw std::invalid_argument("galerkin_project: fine field must vanish on the Dirichlet sides");

    const QuadraticForm form = assemble_A_nu(fine, p);
    const SparseMatrix P = prolongation(coarse, fine);
    const SparseMatrix Sel = selection(coarse.homogeneous_dofs(), coarse.num_dofs());
    const SparseMatrix R = Sel * P.transpose();
    const SparseMatrix K = R * form.H * SparseMatrix(R.transpose());
    const DofVector Hy = form.H * y;
    const DofVector b = R * Hy;

    Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0).any())
        throw SingularSystem("galerkin_project: constrained form is not positive definite");
    const DofVector c = ldlt.solve(b);

    Projection out;
    out.y = Sel.transpose() * c;
    const DofVector r = R * (Hy - form.H * (P * out.y));
    out.orthogonality = r.norm() / std::max(b.norm(), 1e-300);
    return out;
}

DofVector interp_constrained(const FeSpace& coarse, const FeSpace& fine, const DofVector& z)
{
    if (z.size() != fine.num_z()) throw std::invalid_argument("interp_constrained: size mismatch");
    const int nt = coarse.mesh().num_tets();
    std::vector<Vec5> integral(nt, Vec5::Zero());
    std::vector<double> vol(nt, 0.0), zmax(nt, 0.0);
    const BoxMesh& fm = fine.mesh();
    for (int e = 0; e < fm.num_tets(); ++e) {
        const auto& v = fm.tets()[e];
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        Vec5 mean = Vec5::Zero();
        double m = 0.0;
        for (int a = 0; a < 4; ++a) {
            centroid += fm.node(v[a]) / 4.0;
            const Vec5 za = z.segment<5>(5 * v[a]);
            mean += za / 4.0;
            m = std::max(m, za.norm());
        }
        const int T = coarse.mesh().locate(centroid).tet;
        integral[T] += fine.volume(e) * mean;
        vol[T] += fine.volume(e);
        zmax[T] = std::max(zmax[T], m);
    }
    const int nc = coarse.num_nodes();
    std::vector<Vec5> acc(nc, Vec5::Zero());
    std::vector<double> w(nc, 0.0), bound(nc, 0.0);
    for (int T = 0; T < nt; ++T)
        for (int v : coarse.mesh().tets()[T]) {
            acc[v] += integral[T];
            w[v] += vol[T];
            bound[v] = std::max(bound[v], zmax[T]);
        }
    DofVector out = DofVector::Zero(5 * nc);
    for (int i = 0; i < nc; ++i) {
        // Jensen: the patch mean is bounded by the patch maximum; enforce it against roundoff
        const DevTensor3 avg = project_to_ball(DevTensor3(Vec5(acc[i] / w[i])), bound[i]);
        out.segment<5>(5 * i) = avg.v;
    }
    return out;
}

double smallest_constrained_eigenvalue(const FeSpace& space, const QuadraticForm& form, int iterations)
{
    const SparseMatrix Sel = selection(space.homogeneous_dofs(), space.num_dofs());
    const SparseMatrix K = Sel * form.H * SparseMatrix(Sel.transpose());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
    if (ldlt.info() != Eigen::Success) throw SingularSystem("smallest_constrained_eigenvalue: factorization failed");
    Eigen::VectorXd x(K.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + i);
    x.normalize();
    double lambda = 0.0;
    for (int k = 0; k < iterations; ++k) {
        Eigen::VectorXd y = ldlt.solve(x);
        x = y.normalized();
        const double next = x.dot(K * x);
        if (k > 0 && std::abs(next - lambda) <= 1e-13 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

void write_field_dump(std::ostream& os, const FeSpace& space, const DofVector& y, double t)
{
    const BoxMesh& m = space.mesh();
    const int n = space.num_nodes();
    os << "# sma field dump v1\n";
    os << "# time " << csv::num(t) << "\n";
    os << "# nodes " << n << "\n";
    os << "# columns: node x y z u_x u_y u_z z_1 z_2 z_3 z_4 z_5\n";
    for (int i = 0; i < n; ++i) {
        os << i;
        for (int d = 0; d < 3; ++d) os << ' ' << csv::num(m.node(i)[d]);
        for (int d = 0; d < 3; ++d) os << ' ' << csv::num(y[3 * i + d]);
        for (int d = 0; d < 5; ++d) os << ' ' << csv::num(y[space.z_offset() + 5 * i + d]);
        os << '\n';
    }
    os << "# tets " << m.num_tets() << "\n";
    os << "# columns: tet n0 n1 n2 n3\n";
    for (int e = 0; e < m.num_tets(); ++e) {
        os << e;
        for (int v : m.tets()[e]) os << ' ' << v;
        os << '\n';
    }
}

} // namespace sma
