#include "hyperfe2/mesh.hpp"

#include "hyperfe2/shape_functions.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>

namespace hyperfe2 {

Eigen::Matrix<double, Eigen::Dynamic, 2> Mesh::element_coords(int e) const
{
    const Element& el = elements[e];
    Eigen::Matrix<double, Eigen::Dynamic, 2> c(el.nodes.size(), 2);
    for (size_t i = 0; i < el.nodes.size(); ++i)
        c.row(static_cast<int>(i)) = nodes[el.nodes[i]].transpose();
    return c;
}

std::vector<int> Mesh::element_dofs(int e) const
{
    const Element& el = elements[e];
    std::vector<int> dofs(2 * el.nodes.size());
    for (size_t i = 0; i < el.nodes.size(); ++i) {
        dofs[2 * i] = 2 * el.nodes[i];
        dofs[2 * i + 1] = 2 * el.nodes[i] + 1;
    }
    return dofs;
}

int Mesh::num_gauss_points() const
{
    int n = 0;
    for (const Element& el : elements)
        n += quadrature_for(el.type).count();
    return n;
}

std::vector<int> Mesh::gauss_offsets() const
{
    std::vector<int> off(elements.size() + 1, 0);
    for (size_t e = 0; e < elements.size(); ++e)
        off[e + 1] = off[e] + quadrature_for(elements[e].type).count();
    return off;
}

Vec2 Mesh::bbox_min() const
{
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::max());
    for (const Vec2& p : nodes)
        lo = lo.cwiseMin(p);
    return lo;
}

Vec2 Mesh::bbox_max() const
{
    Vec2 hi = Vec2::Constant(std::numeric_limits<double>::lowest());
    for (const Vec2& p : nodes)
        hi = hi.cwiseMax(p);
    return hi;
}

void validate_mesh(const Mesh& mesh, double duplicate_tol)
{
    require(!mesh.nodes.empty(), "mesh has no nodes");
    require(!mesh.elements.empty(), "mesh has no elements");

    for (size_t e = 0; e < mesh.elements.size(); ++e) {
        const Element& el = mesh.elements[e];
        const int expected = nodes_per_element(el.type);
        require(static_cast<int>(el.nodes.size()) == expected, "element ", e,
                ": expected ", expected, " nodes, got ", el.nodes.size());
        for (int n : el.nodes)
            require(n >= 0 && n < mesh.num_nodes(), "element ", e,
                    ": node index ", n, " out of range");
    }

    // Duplicate node detection via lexicographic sort.
    std::vector<int> order(mesh.nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (mesh.nodes[a][0] != mesh.nodes[b][0])
            return mesh.nodes[a][0] < mesh.nodes[b][0];
        return mesh.nodes[a][1] < mesh.nodes[b][1];
    });
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        const Vec2 d = mesh.nodes[order[i]] - mesh.nodes[order[i + 1]];
        if (d.norm() <= duplicate_tol)
            fail("duplicate nodes ", order[i], " and ", order[i + 1], " at (",
                 mesh.nodes[order[i]][0], ", ", mesh.nodes[order[i]][1], ")");
    }

    for (size_t e = 0; e < mesh.elements.size(); ++e) {
        const Element& el = mesh.elements[e];
        const auto coords = mesh.element_coords(static_cast<int>(e));
        const QuadratureRule& rule = quadrature_for(el.type);
        for (int g = 0; g < rule.count(); ++g) {
            try {
                b_matrix(el.type, coords, rule.points.row(g).transpose());
            } catch (const Error& err) {
                fail("element ", e, ", gauss point ", g, ": ", err.what());
            }
        }
    }
}

Mesh load_mesh(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), "cannot open mesh file '", path, "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("mesh file '", path, "': ", e.what());
    }

    Mesh mesh;
    require(j.contains("nodes") && j["nodes"].is_array(),
            "mesh file '", path, "': missing \"nodes\" array");
    require(j.contains("elements") && j["elements"].is_array(),
            "mesh file '", path, "': missing \"elements\" array");

    for (const auto& n : j["nodes"]) {
        require(n.is_array() && n.size() == 2, "mesh node must be [x, y]");
        mesh.nodes.emplace_back(n[0].get<double>(), n[1].get<double>());
    }
    for (const auto& je : j["elements"]) {
        Element el;
        el.type = elem_type_from_name(je.at("type").get<std::string>());
        el.nodes = je.at("nodes").get<std::vector<int>>();
        el.material = je.value("mat", 0);
        mesh.elements.push_back(std::move(el));
    }
    validate_mesh(mesh);
    return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path)
{
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const Vec2& n : mesh.nodes)
        j["nodes"].push_back({ n[0], n[1] });
    j["elements"] = nlohmann::json::array();
    for (const Element& el : mesh.elements)
        j["elements"].push_back({ { "type", elem_type_name(el.type) },
                                  { "nodes", el.nodes },
                                  { "mat", el.material } });
    std::ofstream out(path);
    require(out.good(), "cannot write mesh file '", path, "'");
    out << j.dump(1) << "\n";
}

} // namespace hyperfe2
