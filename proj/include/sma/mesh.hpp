#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace sma {

enum class BoxSide { XMin, XMax, YMin, YMax, ZMin, ZMax };

const char* side_name(BoxSide s);          // "x0", "x1", "y0", ...
bool parse_side(const std::string& name, BoxSide& out);

struct BoundaryFace {
    std::array<int, 3> nodes;
    BoxSide side;
    bool dirichlet = false;
    double area = 0.0;
};

// Structured box [0,Lx]x[0,Ly]x[0,Lz] split into cells, each cell into the six
// Kuhn tetrahedra {v0, v0+e_p0, v0+e_p0+e_p1, v0+e_p0+e_p1+e_p2} for the six
// permutations p.  Meshes with n and 2n subdivisions are nested.
class BoxMesh {
public:
    BoxMesh(const Eigen::Vector3d& extents, const std::array<int, 3>& n,
            std::vector<BoxSide> dirichlet_sides = {BoxSide::XMin});
    static BoxMesh cube(int n, std::vector<BoxSide> dirichlet_sides = {BoxSide::XMin});

    BoxMesh refined() const;  // every subdivision doubled

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_tets() const { return static_cast<int>(tets_.size()); }
    const Eigen::Vector3d& node(int i) const { return nodes_[i]; }
    const std::vector<std::array<int, 4>>& tets() const { return tets_; }
    const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }
    const std::vector<BoxSide>& dirichlet_sides() const { return dirichlet_sides_; }
    const Eigen::Vector3d& extents() const { return extents_; }
    const std::array<int, 3>& subdivisions() const { return n_; }
    int node_index(int i, int j, int k) const { return i + (n_[0] + 1) * (j + (n_[1] + 1) * k); }

    bool on_side(int node, BoxSide s) const;
    bool is_dirichlet_node(int node) const;
    double h() const;  // max edge length (the cell diagonal)
    double tet_volume(int t) const;
    // Rows are the gradients of the four barycentric coordinates.
    Eigen::Matrix<double, 4, 3> tet_gradients(int t) const;

    // Containing tetrahedron of x (clamped into the box) and barycentric weights.
    struct Location {
        int tet;
        std::array<double, 4> weights;
    };
    Location locate(const Eigen::Vector3d& x) const;

private:
    Eigen::Vector3d extents_;
    std::array<int, 3> n_;
    std::vector<BoxSide> dirichlet_sides_;
    std::vector<Eigen::Vector3d> nodes_;
    std::vector<std::array<int, 4>> tets_;
    std::vector<BoundaryFace> faces_;
};

} // namespace sma
