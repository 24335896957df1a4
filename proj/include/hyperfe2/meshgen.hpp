#ifndef HYPERFE2_MESHGEN_HPP
#define HYPERFE2_MESHGEN_HPP

#include "hyperfe2/mesh.hpp"

#include <functional>

namespace hyperfe2 {

/// Structured nx x ny grid on [0,w] x [0,h]. Triangle types split each cell
/// into two triangles; material ids are assigned per element centroid (0 when
/// no callback is given). Returning a negative id removes the element (pore).
Mesh structured_mesh(ElemType type, int nx, int ny, double w, double h,
                     const std::function<int(const Vec2&)>& material_of = {});

struct CirclePhase {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    int material = 0; // negative: hole
};

/// Composite-cell helper: elements whose centroid falls in a circle take that
/// circle's material (or are removed for holes); the rest take matrix_id.
std::function<int(const Vec2&)> circular_phases(std::vector<CirclePhase> phases,
                                                int matrix_id = 0);

} // namespace hyperfe2

#endif
