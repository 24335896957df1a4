#ifndef HYPERFE2_MESH_HPP
#define HYPERFE2_MESH_HPP

#include "hyperfe2/quadrature.hpp"
#include "hyperfe2/types.hpp"

#include <string>
#include <vector>

namespace hyperfe2 {

struct Element {
    ElemType type = ElemType::Tri3;
    std::vector<int> nodes;
    int material = 0;
};

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<Element> elements;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_elements() const { return static_cast<int>(elements.size()); }
    int num_dofs() const { return 2 * num_nodes(); }

    /// Coordinates of one element's nodes, row per node.
    Eigen::Matrix<double, Eigen::Dynamic, 2> element_coords(int e) const;

    /// Global dof ids (2 per node) of one element.
    std::vector<int> element_dofs(int e) const;

    /// Total Gauss points and per-element offsets into the flat point list.
    int num_gauss_points() const;
    std::vector<int> gauss_offsets() const;

    Vec2 bbox_min() const;
    Vec2 bbox_max() const;
};

/// Checks index ranges, duplicate nodes (within tol) and det(J) > 0 at
/// every Gauss point. Throws with context on the first violation.
void validate_mesh(const Mesh& mesh, double duplicate_tol = 1e-12);

/// JSON mesh file:
/// {"nodes": [[x,y],...],
///  "elements": [{"type":"tri6","nodes":[...],"mat":0}, ...]}
Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

} // namespace hyperfe2

#endif
