#include "hyperfe2/meshgen.hpp"

#include <map>

namespace hyperfe2 {

namespace {

// Vertex grid with optional midpoints, indexed on a half-step lattice so
// quadratic elements share midside nodes.
struct NodeLattice {
    std::map<std::pair<long, long>, int> index;
    Mesh* mesh;
    double dx, dy;

    // (i, j) counted in half steps of the cell grid
    int at(long i, long j)
    {
        const auto key = std::make_pair(i, j);
        const auto it = index.find(key);
        if (it != index.end())
            return it->second;
        const int id = mesh->num_nodes();
        mesh->nodes.emplace_back(0.5 * i * dx, 0.5 * j * dy);
        index.emplace(key, id);
        return id;
    }
};

} // namespace

Mesh structured_mesh(ElemType type, int nx, int ny, double w, double h,
                     const std::function<int(const Vec2&)>& material_of)
{
    require(nx > 0 && ny > 0, "grid must have at least one cell per direction");
    Mesh mesh;
    NodeLattice lat{ {}, &mesh, w / nx, h / ny };

    auto mat_at = [&](const Vec2& centroid) {
        return material_of ? material_of(centroid) : 0;
    };
    auto push = [&](ElemType t, std::vector<int> nodes, const Vec2& centroid) {
        const int mat = mat_at(centroid);
        if (mat < 0)
            return; // hole
        mesh.elements.push_back({ t, std::move(nodes), mat });
    };

    for (int cy = 0; cy < ny; ++cy) {
        for (int cx = 0; cx < nx; ++cx) {
            const long i = 2L * cx;
            const long j = 2L * cy;
            const Vec2 lo(cx * lat.dx, cy * lat.dy);
            const Vec2 cell_mid = lo + 0.5 * Vec2(lat.dx, lat.dy);
            switch (type) {
            case ElemType::Tri3:
                push(type, { lat.at(i, j), lat.at(i + 2, j), lat.at(i + 2, j + 2) },
                     lo + Vec2(2.0 / 3.0 * lat.dx, 1.0 / 3.0 * lat.dy));
                push(type, { lat.at(i, j), lat.at(i + 2, j + 2), lat.at(i, j + 2) },
                     lo + Vec2(1.0 / 3.0 * lat.dx, 2.0 / 3.0 * lat.dy));
                break;
            case ElemType::Tri6:
                push(type,
                     { lat.at(i, j), lat.at(i + 2, j), lat.at(i + 2, j + 2),
                       lat.at(i + 1, j), lat.at(i + 2, j + 1), lat.at(i + 1, j + 1) },
                     lo + Vec2(2.0 / 3.0 * lat.dx, 1.0 / 3.0 * lat.dy));
                push(type,
                     { lat.at(i, j), lat.at(i + 2, j + 2), lat.at(i, j + 2),
                       lat.at(i + 1, j + 1), lat.at(i + 1, j + 2), lat.at(i, j + 1) },
                     lo + Vec2(1.0 / 3.0 * lat.dx, 2.0 / 3.0 * lat.dy));
                break;
            case ElemType::Quad4:
                push(type,
                     { lat.at(i, j), lat.at(i + 2, j), lat.at(i + 2, j + 2),
                       lat.at(i, j + 2) },
                     cell_mid);
                break;
            case ElemType::Quad8R:
                push(type,
                     { lat.at(i, j), lat.at(i + 2, j), lat.at(i + 2, j + 2),
                       lat.at(i, j + 2), lat.at(i + 1, j), lat.at(i + 2, j + 1),
                       lat.at(i + 1, j + 2), lat.at(i, j + 1) },
                     cell_mid);
                break;
            }
        }
    }

    // Drop nodes that belong only to removed elements.
    std::vector<int> remap(mesh.num_nodes(), -1);
    Mesh packed;
    for (Element& el : mesh.elements) {
        for (int& n : el.nodes) {
            if (remap[n] < 0) {
                remap[n] = packed.num_nodes();
                packed.nodes.push_back(mesh.nodes[n]);
            }
            n = remap[n];
        }
        packed.elements.push_back(std::move(el));
    }
    validate_mesh(packed);
    return packed;
}

std::function<int(const Vec2&)> circular_phases(std::vector<CirclePhase> phases,
                                                int matrix_id)
{
    return [phases = std::move(phases), matrix_id](const Vec2& x) {
        for (const CirclePhase& p : phases)
            if ((x - p.center).norm() <= p.radius)
                return p.material;
        return matrix_id;
    };
}

} // namespace hyperfe2
