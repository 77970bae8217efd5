#include "sma/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sma {

namespace {

const std::array<std::array<int, 3>, 6> kPerms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

int perm_index(const std::array<int, 3>& p)
{
    for (int i = 0; i < 6; ++i)
        if (kPerms[i] == p) return i;
    return -1;
}

} // namespace

const char* side_name(BoxSide s)
{
    switch (s) {
    case BoxSide::XMin: return "x0";
    case BoxSide::XMax: return "x1";
    case BoxSide::YMin: return "y0";
    case BoxSide::YMax: return "y1";
    case BoxSide::ZMin: return "z0";
    case BoxSide::ZMax: return "z1";
    }
    return "?";
}

bool parse_side(const std::string& name, BoxSide& out)
{
    for (BoxSide s : {BoxSide::XMin, BoxSide::XMax, BoxSide::YMin, BoxSide::YMax, BoxSide::ZMin, BoxSide::ZMax})
        if (name == side_name(s)) {
            out = s;
            return true;
        }
    return false;
}

BoxMesh::BoxMesh(const Eigen::Vector3d& extents, const std::array<int, 3>& n, std::vector<BoxSide> dirichlet_sides)
    : extents_(extents), n_(n), dirichlet_sides_(std::move(dirichlet_sides))
{
    for (int d = 0; d < 3; ++d) {
        if (n[d] < 1) throw std::invalid_argument("BoxMesh: subdivisions must be >= 1");
        if (!(extents[d] > 0)) throw std::invalid_argument("BoxMesh: extents must be > 0");
    }
    for (int k = 0; k <= n[2]; ++k)
        for (int j = 0; j <= n[1]; ++j)
            for (int i = 0; i <= n[0]; ++i)
                nodes_.emplace_back(extents[0] * i / n[0], extents[1] * j / n[1], extents[2] * k / n[2]);

    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                for (const auto& p : kPerms) {
                    std::array<int, 3> c{i, j, k};
                    std::array<int, 4> t;
                    t[0] = node_index(c[0], c[1], c[2]);
                    for (int m = 0; m < 3; ++m) {
                        c[p[m]] += 1;
                        t[m + 1] = node_index(c[0], c[1], c[2]);
                    }
                    tets_.push_back(t);
                }

    // Boundary faces: each cell face split along its min-max diagonal, which is
    // the diagonal used by the Kuhn tetrahedra.
    auto add_side = [&](BoxSide s, int axis, int level) {
        const int a = (axis + 1) % 3, b = (axis + 2) % 3;
        const bool dir = std::find(dirichlet_sides_.begin(), dirichlet_sides_.end(), s) != dirichlet_sides_.end();
        for (int q = 0; q < n[b]; ++q)
            for (int p = 0; p < n[a]; ++p) {
                auto id = [&](int da, int db) {
                    std::array<int, 3> c{};
                    c[axis] = level;
                    c[a] = p + da;
                    c[b] = q + db;
                    return node_index(c[0], c[1], c[2]);
                };
                const double area = 0.5 * (extents[a] / n[a]) * (extents[b] / n[b]);
                faces_.push_back({{id(0, 0), id(1, 0), id(1, 1)}, s, dir, area});
                faces_.push_back({{id(0, 0), id(0, 1), id(1, 1)}, s, dir, area});
            }
    };
    add_side(BoxSide::XMin, 0, 0);
    add_side(BoxSide::XMax, 0, n[0]);
    add_side(BoxSide::YMin, 1, 0);
    add_side(BoxSide::YMax, 1, n[1]);
    add_side(BoxSide::ZMin, 2, 0);
    add_side(BoxSide::ZMax, 2, n[2]);
}

BoxMesh BoxMesh::cube(int n, std::vector<BoxSide> dirichlet_sides)
{
    return BoxMesh(Eigen::Vector3d::Ones(), {n, n, n}, std::move(dirichlet_sides));
}

BoxMesh BoxMesh::refined() const
{
    return BoxMesh(extents_, {2 * n_[0], 2 * n_[1], 2 * n_[2]}, dirichlet_sides_);
}

bool BoxMesh::on_side(int node, BoxSide s) const
{
    const Eigen::Vector3d& x = nodes_[node];
    const int axis = static_cast<int>(s) / 2;
    const bool upper = static_cast<int>(s) % 2 == 1;
    const double tol = 1e-12 * extents_[axis];
    return upper ? std::abs(x[axis] - extents_[axis]) <= tol : std::abs(x[axis]) <= tol;
}

bool BoxMesh::is_dirichlet_node(int node) const
{
    for (BoxSide s : dirichlet_sides_)
        if (on_side(node, s)) return true;
    return false;
}

double BoxMesh::h() const
{
    double s = 0.0;
    for (int d = 0; d < 3; ++d) s += std::pow(extents_[d] / n_[d], 2);
    return std::sqrt(s);
}

double BoxMesh::tet_volume(int t) const
{
    const auto& v = tets_[t];
    Eigen::Matrix3d m;
    m.col(0) = nodes_[v[1]] - nodes_[v[0]];
    m.col(1) = nodes_[v[2]] - nodes_[v[0]];
    m.col(2) = nodes_[v[3]] - nodes_[v[0]];
    return std::abs(m.determinant()) / 6.0;
}

Eigen::Matrix<double, 4, 3> BoxMesh::tet_gradients(int t) const
{
    const auto& v = tets_[t];
    Eigen::Matrix3d m;
    m.row(0) = nodes_[v[1]] - nodes_[v[0]];
    m.row(1) = nodes_[v[2]] - nodes_[v[0]];
    m.row(2) = nodes_[v[3]] - nodes_[v[0]];
    // grad lambda_k (k = 1..3) are the columns of m^{-1}
    const Eigen::Matrix3d inv = m.inverse();
    Eigen::Matrix<double, 4, 3> g;
    for (int k = 0; k < 3; ++k) g.row(k + 1) = inv.col(k).transpose();
    g.row(0) = -(g.row(1) + g.row(2) + g.row(3));
    return g;
}

BoxMesh::Location BoxMesh::locate(const Eigen::Vector3d& x) const
{
    std::array<int, 3> cell;
    std::array<double, 3> xi;
    for (int d = 0; d < 3; ++d) {
        const double s = std::clamp(x[d] / extents_[d], 0.0, 1.0) * n_[d];
        cell[d] = std::min(static_cast<int>(std::floor(s)), n_[d] - 1);
        xi[d] = std::clamp(s - cell[d], 0.0, 1.0);
    }
    std::array<int, 3> p{0, 1, 2};
    std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return xi[a] > xi[b]; });
    const int cell_id = cell[0] + n_[0] * (cell[1] + n_[1] * cell[2]);
    Location loc;
    loc.tet = 6 * cell_id + perm_index(p);
    loc.weights = {1.0 - xi[p[0]], xi[p[0]] - xi[p[1]], xi[p[1]] - xi[p[2]], xi[p[2]]};
    return loc;
}

} // namespace sma
