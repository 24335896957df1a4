#include "hyperfe2/hyper.hpp"

#include <json.hpp>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

namespace hyperfe2 {

std::vector<std::string> CriterionSet::names() const
{
    std::vector<std::string> n = { "force", "reaction" };
    if (stress_power)
        n.push_back("power");
    if (mean_strain)
        n.push_back("strain");
    if (mean_stress)
        n.push_back("stress");
    if (free_energy)
        n.push_back("energy");
    return n;
}

CriterionSet CriterionSet::from_names(const std::vector<std::string>& names)
{
    CriterionSet c;
    for (const std::string& n : names) {
        if (n == "force" || n == "reaction")
            continue; // always on
        else if (n == "power")
            c.stress_power = true;
        else if (n == "strain")
            c.mean_strain = true;
        else if (n == "stress")
            c.mean_stress = true;
        else if (n == "energy")
            c.free_energy = true;
        else
            fail("unknown criterion '", n, "'");
    }
    return c;
}

int HyperSnapshots::candidate_count(HyperMode mode) const
{
    return mode == HyperMode::Element
        ? static_cast<int>(gp_offsets.size()) - 1
        : static_cast<int>(gp_volumes.size());
}

Eigen::VectorXd HyperSnapshots::entity_volumes(HyperMode mode) const
{
    if (mode == HyperMode::GaussPoint)
        return gp_volumes;
    const int ne = candidate_count(HyperMode::Element);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ne);
    for (int e = 0; e < ne; ++e)
        for (int g = gp_offsets[e]; g < gp_offsets[e + 1]; ++g)
            v[e] += gp_volumes[g];
    return v;
}

HyperSnapshots collect_hyper_snapshots(ReducedSolver& rom,
                                       const std::vector<LoadPath>& paths,
                                       MicroSolver* hf)
{
    HyperSnapshots out;
    out.gp_offsets = rom.cache().mesh().gauss_offsets();
    out.bulk_volume = rom.cache().bulk_volume();
    out.cell_volume = rom.map().volume;
    out.n_modes = rom.num_modes();

    out.gp_volumes.resize(rom.cache().num_gps());
    for (int e = 0; e < rom.cache().mesh().num_elements(); ++e)
        for (int g = 0; g < rom.cache().gp_count(e); ++g)
            out.gp_volumes[out.gp_offsets[e] + g] = rom.cache().gp(e, g).weight;

    for (const LoadPath& path : paths) {
        require(!path.stress_driven, "hyper training paths must be strain-driven");
        std::vector<GpHistory> hist = rom.initial_history();
        std::vector<GpHistory> hist_new;
        Eigen::VectorXd amplitudes;
        Eigen::VectorXd w_free;
        double t_prev = 0.0;
        for (int i = 0; i < path.steps(); ++i) {
            const double dt = path.times[i] - t_prev;
            if (dt <= 0.0)
                continue; // leading zero-time sample
            t_prev = path.times[i];
            const Voigt2 strain = path.values.row(i).transpose();
            MacroResponse resp;
            Eigen::VectorXd u;
            if (hf) {
                hf->solve(strain, dt, hist, hist_new, w_free, resp, false);
                u = hf->map().expand(w_free, strain);
            } else {
                rom.solve(strain, dt, hist, hist_new, amplitudes, resp, false);
                u = rom.map().link * (rom.basis().modes * amplitudes)
                    + rom.map().affine * strain;
            }
            // Collect against the time-t states; the re-evaluation reproduces
            // the converged step exactly.
            out.snaps.push_back(rom.collect(u, dt, hist, HyperMode::GaussPoint));
            hist = hist_new;
        }
    }
    require(!out.snaps.empty(), "no hyper snapshots collected");
    return out;
}

namespace {

// Element-level columns by summation over the element's Gauss points.
Eigen::MatrixXd aggregate(const Eigen::MatrixXd& gp_cols,
                          const std::vector<int>& offsets, HyperMode mode)
{
    if (mode == HyperMode::GaussPoint)
        return gp_cols;
    const int ne = static_cast<int>(offsets.size()) - 1;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(gp_cols.rows(), ne);
    for (int e = 0; e < ne; ++e)
        for (int g = offsets[e]; g < offsets[e + 1]; ++g)
            out.col(e) += gp_cols.col(g);
    return out;
}

} // namespace

TrainingMatrix build_training_matrix(const HyperSnapshots& snaps, HyperMode mode,
                                     const CriterionSet& criteria,
                                     double cutoff_rel)
{
    TrainingMatrix tm;
    tm.mode = mode;
    tm.criteria = criteria.names();
    tm.volumes = snaps.entity_volumes(mode);
    tm.bulk_volume = snaps.bulk_volume;
    const int m = snaps.candidate_count(mode);

    int rows_per_snap = snaps.n_modes + 3;
    if (criteria.stress_power)
        rows_per_snap += 1;
    if (criteria.mean_strain)
        rows_per_snap += 3;
    if (criteria.mean_stress)
        rows_per_snap += 3;
    if (criteria.free_energy)
        rows_per_snap += 1;
    tm.rows.setZero(rows_per_snap * static_cast<int>(snaps.snaps.size()), m);

    int row = 0;
    for (size_t k = 0; k < snaps.snaps.size(); ++k) {
        const auto& snap = snaps.snaps[k];
        auto put_block = [&](const Eigen::MatrixXd& gp_cols, bool subtract,
                             const char* tag) {
            const Eigen::MatrixXd cols = aggregate(gp_cols, snaps.gp_offsets, mode);
            for (int j = 0; j < cols.rows(); ++j) {
                Eigen::RowVectorXd r = cols.row(j);
                if (subtract) {
                    // Share of the full-integration total, distributed by
                    // entity volume; the full-set sum of the row vanishes.
                    const double total = r.sum();
                    r -= (total / tm.bulk_volume) * tm.volumes.transpose();
                }
                tm.rows.row(row) = r;
                tm.row_snapshot.push_back(static_cast<int>(k));
                tm.row_block.push_back(tag);
                ++row;
            }
        };

        put_block(snap.forces, false, "force");
        put_block(snap.reactions, true, "reaction");
        if (criteria.stress_power)
            put_block(snap.power, true, "power");
        if (criteria.mean_strain)
            put_block(snap.strain, true, "strain");
        if (criteria.mean_stress)
            put_block(snap.stress, true, "stress");
        if (criteria.free_energy)
            put_block(snap.energy, true, "energy");
        tm.snapshot_residuals.push_back(snap.residual_norm);
    }

    tm.raw_norms.resize(tm.rows.rows());
    double max_norm = 0.0;
    for (int i = 0; i < tm.rows.rows(); ++i) {
        tm.raw_norms[i] = tm.rows.row(i).norm();
        max_norm = std::max(max_norm, tm.raw_norms[i]);
    }
    const double cutoff = cutoff_rel * max_norm;
    tm.retained_rows = 0;
    for (int i = 0; i < tm.rows.rows(); ++i) {
        if (tm.raw_norms[i] >= cutoff && tm.raw_norms[i] > 0.0) {
            tm.rows.row(i) /= tm.raw_norms[i];
            ++tm.retained_rows;
        } else {
            tm.rows.row(i).setZero();
        }
    }
    require(tm.retained_rows > 0, "training matrix has no signal (all rows degenerate)");
    return tm;
}

EntitySet HyperScheme::entity_set() const
{
    EntitySet set;
    set.mode = mode;
    set.ids = entities;
    set.weights = weights;
    return set;
}

SchemeSelector::SchemeSelector(const TrainingMatrix& matrix) : matrix_(&matrix)
{
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix.rows, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-12 * sv[0])
            rank = i + 1;
    spectrum_ = sv.head(rank);
    directions_ = svd.matrixV().leftCols(rank);
}

namespace {

// min ||A g|| s.t. vol . g = target, by null-space elimination of the
// volume row; rank deficiency handled by the SVD least-squares solve.
Eigen::VectorXd constrained_least_squares(const Eigen::MatrixXd& a,
                                          const Eigen::VectorXd& vol,
                                          double target)
{
    const int n = static_cast<int>(vol.size());
    const Eigen::VectorXd g0 = vol * (target / vol.squaredNorm());
    if (n == 1)
        return g0;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(vol);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd z = q.rightCols(n - 1);
    const Eigen::MatrixXd az = a * z;
    const Eigen::VectorXd rhs = -(a * g0);
    const Eigen::VectorXd xi =
        az.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    return g0 + z * xi;
}

} // namespace

HyperScheme SchemeSelector::select(int target_count) const
{
    const TrainingMatrix& tm = *matrix_;
    const int m = static_cast<int>(tm.volumes.size());
    require(target_count >= 1 && target_count <= m, "target count ",
            target_count, " outside [1, ", m, "]");

    const int dirs = std::min<int>(target_count - 1,
                                   static_cast<int>(directions_.cols()));
    // Row block [lambda~^T; normalized volume row], target [0; scaled V*].
    const double vol_norm = tm.volumes.norm();
    const Eigen::VectorXd vhat = tm.volumes / vol_norm;
    const double target = tm.bulk_volume / vol_norm;

    Eigen::MatrixXd jac(dirs + 1, m);
    if (dirs > 0)
        jac.topRows(dirs) = directions_.leftCols(dirs).transpose();
    jac.row(dirs) = vhat.transpose();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dirs + 1);
    b[dirs] = target;

    std::vector<int> selected;
    Eigen::VectorXd gamma;
    Eigen::VectorXd residual = b;
    std::set<int> tabu;
    const double weight_floor = 1e-14;

    int guard = 0;
    while (static_cast<int>(selected.size()) < target_count
           && residual.squaredNorm() > 1e-12) {
        require(++guard <= 20 * target_count + 100,
                "scheme selection failed to progress");

        // Candidate with the best correlation to the current residual.
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int e = 0; e < m; ++e) {
            if (tabu.count(e)
                || std::find(selected.begin(), selected.end(), e) != selected.end())
                continue;
            const double nrm = jac.col(e).norm();
            if (nrm <= 0.0)
                continue;
            const double score = jac.col(e).dot(residual) / nrm;
            if (score > best_score) { // ties keep the lowest id
                best_score = score;
                best = e;
            }
        }
        require(best >= 0, "scheme selection: no admissible candidate left");
        selected.push_back(best);

        // Solve, then prune non-positive weights and re-solve.
        for (int prune_round = 0;; ++prune_round) {
            require(prune_round < 2 * m + 10, "weight pruning failed to settle");
            Eigen::MatrixXd a_sel(dirs, selected.size());
            Eigen::VectorXd vol_sel(selected.size());
            for (size_t i = 0; i < selected.size(); ++i) {
                if (dirs > 0)
                    a_sel.col(static_cast<int>(i)) =
                        directions_.leftCols(dirs).row(selected[i]).transpose();
                vol_sel[static_cast<int>(i)] = tm.volumes[selected[i]];
            }
            gamma = constrained_least_squares(a_sel, vol_sel, tm.bulk_volume);

            std::vector<int> keep;
            for (size_t i = 0; i < selected.size(); ++i)
                if (gamma[static_cast<int>(i)] > weight_floor)
                    keep.push_back(selected[i]);
            if (keep.size() == selected.size())
                break;
            require(!keep.empty(), "scheme selection: all weights pruned");
            if (std::find(keep.begin(), keep.end(), best) == keep.end())
                tabu.insert(best); // freshly added entity rejected, skip it
            selected = keep;
        }
        if (std::find(selected.begin(), selected.end(), best) != selected.end())
            tabu.clear();

        Eigen::VectorXd jg = Eigen::VectorXd::Zero(dirs + 1);
        for (size_t i = 0; i < selected.size(); ++i)
            jg += jac.col(selected[i]) * gamma[static_cast<int>(i)];
        residual = b - jg;
    }
    require(!selected.empty(), "scheme selection produced an empty set");

    // Order by entity id for stable output.
    std::vector<int> order(selected.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return selected[a] < selected[b]; });

    HyperScheme scheme;
    scheme.mode = tm.mode;
    scheme.target_count = target_count;
    scheme.directions = dirs;
    scheme.criteria = tm.criteria;
    scheme.entities.resize(selected.size());
    scheme.weights.resize(selected.size());
    for (size_t i = 0; i < order.size(); ++i) {
        scheme.entities[i] = selected[order[i]];
        scheme.weights[static_cast<int>(i)] = gamma[order[i]];
    }

    Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
    for (size_t i = 0; i < scheme.entities.size(); ++i)
        full[scheme.entities[i]] = scheme.weights[static_cast<int>(i)];
    scheme.residual = (tm.rows * full).squaredNorm();
    return scheme;
}

void save_scheme(const HyperScheme& scheme, const std::string& path)
{
    nlohmann::json j;
    j["mode"] = hyper_mode_name(scheme.mode);
    j["entities"] = scheme.entities;
    j["gamma"] = std::vector<double>(scheme.weights.data(),
                                     scheme.weights.data() + scheme.weights.size());
    j["residual"] = scheme.residual;
    j["criteria"] = scheme.criteria;
    j["m_tilde"] = scheme.target_count;
    j["directions"] = scheme.directions;
    std::ofstream out(path);
    require(out.good(), "cannot write scheme file '", path, "'");
    out << j.dump(1) << "\n";
}

HyperScheme load_scheme(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), "cannot open scheme file '", path, "'");
    nlohmann::json j;
    in >> j;
    HyperScheme s;
    s.mode = hyper_mode_from_name(j.at("mode").get<std::string>());
    s.entities = j.at("entities").get<std::vector<int>>();
    const auto gamma = j.at("gamma").get<std::vector<double>>();
    require(gamma.size() == s.entities.size(), "scheme file '", path,
            "': entities/gamma length mismatch");
    s.weights = Eigen::Map<const Eigen::VectorXd>(gamma.data(), gamma.size());
    require((s.weights.array() > 0.0).all(), "scheme file '", path,
            "': weights must be positive");
    s.residual = j.at("residual").get<double>();
    s.criteria = j.at("criteria").get<std::vector<std::string>>();
    s.target_count = j.at("m_tilde").get<int>();
    s.directions = j.value("directions", 0);
    return s;
}

} // namespace hyperfe2
