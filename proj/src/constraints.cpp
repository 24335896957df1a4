#include "hyperfe2/constraints.hpp"

#include <algorithm>

namespace hyperfe2 {

namespace {

struct Classified {
    bool left = false, right = false, bottom = false, top = false;
    bool boundary() const { return left || right || bottom || top; }
    bool corner() const { return (left || right) && (bottom || top); }
};

} // namespace

Eigen::VectorXd PeriodicMap::expand(const Eigen::VectorXd& w_free,
                                    const Voigt2& strain) const
{
    return link_free * w_free + affine * strain;
}

Eigen::VectorXd PeriodicMap::independent_from_free(const Eigen::VectorXd& w_free) const
{
    Eigen::VectorXd w = Eigen::VectorXd::Zero(num_independent());
    for (int i = 0; i < num_independent(); ++i)
        if (free_of_ind[i] >= 0)
            w[i] = w_free[free_of_ind[i]];
    return w;
}

Eigen::VectorXd PeriodicMap::reduce_free(const Eigen::VectorXd& force) const
{
    return link_free.transpose() * force;
}

Voigt2 PeriodicMap::reduce_macro(const Eigen::VectorXd& force) const
{
    return affine.transpose() * force;
}

PeriodicMap build_periodic_map(const Mesh& mesh, double tol, int anchor_node)
{
    PeriodicMap map;
    map.box_lo = mesh.bbox_min();
    map.box_hi = mesh.bbox_max();
    const Vec2 span = map.box_hi - map.box_lo;
    require(span[0] > tol && span[1] > tol, "mesh bounding box is degenerate");
    map.volume = span[0] * span[1];

    const int nn = mesh.num_nodes();
    std::vector<Classified> cls(nn);
    for (int i = 0; i < nn; ++i) {
        const Vec2& x = mesh.nodes[i];
        cls[i].left = std::abs(x[0] - map.box_lo[0]) <= tol;
        cls[i].right = std::abs(x[0] - map.box_hi[0]) <= tol;
        cls[i].bottom = std::abs(x[1] - map.box_lo[1]) <= tol;
        cls[i].top = std::abs(x[1] - map.box_hi[1]) <= tol;
    }

    int master_corner = -1;
    std::vector<int> leader_of(nn, -1);
    for (int i = 0; i < nn; ++i)
        if (cls[i].left && cls[i].bottom)
            master_corner = i;
    require(master_corner >= 0, "no node at the bounding box minimum corner");

    auto match = [&](int follower, bool by_y) -> int {
        for (int j = 0; j < nn; ++j) {
            if (j == follower)
                continue;
            const bool candidate = by_y ? (cls[j].left && !cls[j].corner())
                                        : (cls[j].bottom && !cls[j].corner());
            if (!candidate)
                continue;
            const double d = by_y ? std::abs(mesh.nodes[j][1] - mesh.nodes[follower][1])
                                  : std::abs(mesh.nodes[j][0] - mesh.nodes[follower][0]);
            if (d <= tol)
                return j;
        }
        return -1;
    };

    for (int i = 0; i < nn; ++i) {
        if (!cls[i].boundary())
            continue;
        if (cls[i].corner()) {
            if (i != master_corner)
                leader_of[i] = master_corner;
            continue;
        }
        if (cls[i].right) {
            const int leader = match(i, true);
            if (leader < 0)
                fail("unpaired boundary node ", i, " at (", mesh.nodes[i][0],
                     ", ", mesh.nodes[i][1], "): no left partner within tol ", tol);
            leader_of[i] = leader;
        } else if (cls[i].top) {
            const int leader = match(i, false);
            if (leader < 0)
                fail("unpaired boundary node ", i, " at (", mesh.nodes[i][0],
                     ", ", mesh.nodes[i][1], "): no bottom partner within tol ", tol);
            leader_of[i] = leader;
        }
    }

    // Sanity: every leader must itself be independent.
    for (int i = 0; i < nn; ++i)
        if (leader_of[i] >= 0)
            require(leader_of[leader_of[i]] < 0, "chained pairing at node ", i);

    std::vector<int> ind_of_node(nn, -1);
    for (int i = 0; i < nn; ++i) {
        if (leader_of[i] < 0) {
            ind_of_node[i] = static_cast<int>(map.independent_nodes.size());
            map.independent_nodes.push_back(i);
        }
    }
    for (int i = 0; i < nn; ++i)
        if (leader_of[i] >= 0)
            map.pairs.push_back({ i, leader_of[i],
                                  mesh.nodes[i] - mesh.nodes[leader_of[i]] });

    if (anchor_node < 0)
        anchor_node = master_corner;
    require(anchor_node < nn, "anchor node ", anchor_node, " out of range");
    require(leader_of[anchor_node] < 0, "anchor node ", anchor_node,
            " is an eliminated boundary node");
    map.anchor_node = anchor_node;

    const int n_ind = 2 * static_cast<int>(map.independent_nodes.size());
    std::vector<Triplet> trips;
    trips.reserve(2 * nn);
    for (int i = 0; i < nn; ++i) {
        const int owner = leader_of[i] >= 0 ? leader_of[i] : i;
        const int col = 2 * ind_of_node[owner];
        trips.emplace_back(2 * i, col, 1.0);
        trips.emplace_back(2 * i + 1, col + 1, 1.0);
    }
    map.link.resize(2 * nn, n_ind);
    map.link.setFromTriplets(trips.begin(), trips.end());
    map.link.makeCompressed();

    // Affine part relative to the anchor: translation invariant and zero at
    // the anchor itself.
    map.affine.setZero(2 * nn, 3);
    const Vec2 origin = mesh.nodes[anchor_node];
    for (int i = 0; i < nn; ++i) {
        const Vec2 q = mesh.nodes[i] - origin;
        map.affine(2 * i, 0) = q[0];
        map.affine(2 * i, 2) = 0.5 * q[1];
        map.affine(2 * i + 1, 1) = q[1];
        map.affine(2 * i + 1, 2) = 0.5 * q[0];
    }

    map.anchor_dofs = { 2 * ind_of_node[anchor_node],
                        2 * ind_of_node[anchor_node] + 1 };
    map.free_of_ind.assign(n_ind, -1);
    int n_free = 0;
    for (int i = 0; i < n_ind; ++i) {
        if (i == map.anchor_dofs[0] || i == map.anchor_dofs[1])
            continue;
        map.free_of_ind[i] = n_free++;
    }

    std::vector<Triplet> ftrips;
    for (int k = 0; k < map.link.outerSize(); ++k)
        for (SpMat::InnerIterator it(map.link, k); it; ++it)
            if (map.free_of_ind[it.col()] >= 0)
                ftrips.emplace_back(static_cast<int>(it.row()),
                                    map.free_of_ind[it.col()], it.value());
    map.link_free.resize(2 * nn, n_free);
    map.link_free.setFromTriplets(ftrips.begin(), ftrips.end());
    map.link_free.makeCompressed();
    return map;
}

} // namespace hyperfe2
