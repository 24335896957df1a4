#include "hyperfe2/sampling.hpp"

#include <random>

namespace hyperfe2 {

PathEnsemble surrogate_macro_run(const MacroProblem& problem,
                                 const Mat3& elasticity)
{
    LinearMacroSolver solver(problem, elasticity);
    const int n_steps = static_cast<int>(problem.times.size());
    require(n_steps > 0, "macro problem has no time stations");
    const int n_gps = solver.cache().num_gps();

    PathEnsemble ensemble;
    ensemble.times = Eigen::Map<const Eigen::VectorXd>(problem.times.data(), n_steps);
    ensemble.paths.assign(n_gps, Eigen::MatrixXd::Zero(n_steps, 3));
    ensemble.source_gp.resize(n_gps);
    for (int g = 0; g < n_gps; ++g)
        ensemble.source_gp[g] = g;

    for (int s = 0; s < n_steps; ++s) {
        const Eigen::VectorXd u = solver.solve_at(problem.times[s]);
        const std::vector<Voigt2> strains = solver.gauss_strains(u);
        for (int g = 0; g < n_gps; ++g)
            ensemble.paths[g].row(s) = strains[g].transpose();
    }
    return ensemble;
}

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& path)
{
    return Eigen::Map<const Eigen::VectorXd>(path.data(), path.size());
}

} // namespace

ClusterResult cluster_paths(const PathEnsemble& ensemble, int k, std::uint64_t seed)
{
    const int n = ensemble.count();
    require(k >= 1, "cluster count must be positive");
    require(k <= n, "cluster count ", k, " exceeds path count ", n);

    std::vector<Eigen::VectorXd> points(n);
    for (int i = 0; i < n; ++i)
        points[i] = flatten(ensemble.paths[i]);
    const int dim = static_cast<int>(points[0].size());

    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(k);

    // k-means++ seeding
    {
        std::uniform_int_distribution<int> first(0, n - 1);
        centers.push_back(points[first(rng)]);
        Eigen::VectorXd d2(n);
        while (static_cast<int>(centers.size()) < k) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::max();
                for (const auto& c : centers)
                    best = std::min(best, (points[i] - c).squaredNorm());
                d2[i] = best;
                total += best;
            }
            int pick = 0;
            if (total > 0.0) {
                std::uniform_real_distribution<double> u(0.0, total);
                double target = u(rng);
                for (; pick < n - 1; ++pick) {
                    target -= d2[pick];
                    if (target <= 0.0)
                        break;
                }
            } else {
                pick = first(rng);
            }
            centers.push_back(points[pick]);
        }
    }

    ClusterResult result;
    result.assignment.assign(n, -1);
    std::vector<int> counts(k, 0);

    for (int iter = 0; iter < 200; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points[i] - centers[0]).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (points[i] - centers[c]).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (best != result.assignment[i]) {
                result.assignment[i] = best;
                changed = true;
            }
        }

        std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(dim));
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            sums[result.assignment[i]] += points[i];
            ++counts[result.assignment[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers[c] = sums[c] / counts[c];
                continue;
            }
            // Reseed an empty cluster from the farthest point.
            int far = 0;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                const double d = (points[i] - centers[result.assignment[i]]).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            centers[c] = points[far];
            changed = true;
        }
        if (!changed && iter > 0)
            break;
    }

    result.inertia = 0.0;
    for (int i = 0; i < n; ++i)
        result.inertia += (points[i] - centers[result.assignment[i]]).squaredNorm();

    const int steps = static_cast<int>(ensemble.times.size());
    result.centroids.resize(k);
    for (int c = 0; c < k; ++c)
        result.centroids[c] =
            Eigen::Map<const Eigen::MatrixXd>(centers[c].data(), steps, 3);
    return result;
}

std::vector<LoadPath> centroid_load_paths(const ClusterResult& clusters,
                                          const Eigen::VectorXd& times)
{
    std::vector<LoadPath> paths;
    paths.reserve(clusters.centroids.size());
    for (const Eigen::MatrixXd& c : clusters.centroids) {
        LoadPath p;
        p.times = times;
        p.values = c;
        paths.push_back(std::move(p));
    }
    return paths;
}

} // namespace hyperfe2
