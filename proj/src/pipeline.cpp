#include "hyperfe2/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>

namespace hyperfe2 {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

void write_spectrum_csv(const Eigen::VectorXd& spectrum, const std::string& file)
{
    std::ofstream out(file);
    require(out.good(), "cannot write '", file, "'");
    out.precision(17);
    out << "index,singular_value,cumulative_fraction\n";
    const double total = spectrum.sum();
    double acc = 0.0;
    for (int i = 0; i < spectrum.size(); ++i) {
        acc += spectrum[i];
        out << i << "," << spectrum[i] << "," << (total > 0 ? acc / total : 1.0)
            << "\n";
    }
}

} // namespace

double reaction_curve_error(const std::vector<StepRecord>& test,
                            const std::vector<StepRecord>& reference)
{
    require(test.size() == reference.size(), "record series length mismatch");
    double dev = 0.0;
    double scale = 0.0;
    for (size_t i = 0; i < test.size(); ++i) {
        dev = std::max(dev, std::abs(test[i].monitor_r - reference[i].monitor_r));
        scale = std::max(scale, std::abs(reference[i].monitor_r));
    }
    require(scale > 0.0, "reference reaction curve is identically zero");
    return dev / scale;
}

struct Pipeline::Rve {
    Mesh mesh;
    std::unique_ptr<FemCache> cache;
    PeriodicMap map;
    Mat3 effective = Mat3::Zero();
};

struct Pipeline::Offline {
    PathEnsemble ensemble;
    ClusterResult clusters;
    std::vector<LoadPath> paths;
    ReducedBasis basis;
    std::unique_ptr<ReducedSolver> rom;
    std::unique_ptr<HyperSnapshots> snapshots;
    nlohmann::json report;
};

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {}

void Pipeline::ensure_rve()
{
    if (rve_)
        return;
    rve_ = std::make_shared<Rve>();
    rve_->mesh = load_mesh(config_.rve_mesh);
    rve_->cache = std::make_unique<FemCache>(rve_->mesh);
    const Vec2 span = rve_->mesh.bbox_max() - rve_->mesh.bbox_min();
    rve_->map = build_periodic_map(rve_->mesh, config_.pbc_tol * span.norm(),
                                   config_.anchor_node);

    // Initial-state condensed tangent doubles as the surrogate elasticity.
    MicroSolver solver(*rve_->cache, config_.materials, rve_->map,
                       config_.micro_tol);
    auto hist = solver.initial_history();
    std::vector<GpHistory> hist_out;
    Eigen::VectorXd w;
    MacroResponse resp;
    solver.solve(Voigt2::Zero(), config_.t_end / config_.steps, hist, hist_out,
                 w, resp, true);
    rve_->effective = resp.tangent;
}

void Pipeline::ensure_offline()
{
    if (offline_)
        return;
    ensure_rve();
    require(!config_.macro_mesh.empty(), "config: macro_mesh is required");
    offline_ = std::make_shared<Offline>();
    auto& off = *offline_;
    nlohmann::json& report = off.report;
    const auto t0 = std::chrono::steady_clock::now();

    // Surrogate macro run with the homogenized elasticity.
    Mesh macro_mesh = load_mesh(config_.macro_mesh);
    const MacroProblem problem = config_.macro_problem(std::move(macro_mesh));
    off.ensemble = surrogate_macro_run(problem, rve_->effective);
    report["seconds"]["surrogate"] = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    off.clusters = cluster_paths(off.ensemble, config_.clusters, config_.seed);
    off.paths = centroid_load_paths(off.clusters, off.ensemble.times);
    report["seconds"]["clustering"] = seconds_since(t1);

    std::filesystem::create_directories(config_.output_dir);
    for (size_t i = 0; i < off.paths.size(); ++i)
        save_load_path_csv(off.paths[i],
                           cat(config_.output_dir, "/centroid_", i, ".csv"));

    // Training solves on the centroid paths.
    const auto t2 = std::chrono::steady_clock::now();
    MicroSolver hf(*rve_->cache, config_.materials, rve_->map, config_.micro_tol);
    SnapshotSet snapshots;
    for (size_t p = 0; p < off.paths.size(); ++p) {
        const LoadPath& path = off.paths[p];
        auto hist = hf.initial_history();
        std::vector<GpHistory> hist_new;
        Eigen::VectorXd w;
        double t_prev = 0.0;
        for (int i = 0; i < path.steps(); ++i) {
            const double dt = path.times[i] - t_prev;
            if (dt <= 0.0)
                continue;
            t_prev = path.times[i];
            MacroResponse resp;
            hf.solve(path.values.row(i).transpose(), dt, hist, hist_new, w,
                     resp, false);
            hist = hist_new;
            snapshots.append(rve_->map.independent_from_free(w),
                             static_cast<int>(p), path.times[i]);
        }
    }
    report["seconds"]["training"] = seconds_since(t2);

    const auto t3 = std::chrono::steady_clock::now();
    off.basis = pod(snapshots, config_.truncation);
    report["seconds"]["pod"] = seconds_since(t3);
    save_basis(off.basis, cat(config_.output_dir, "/basis.json"));

    off.rom = std::make_unique<ReducedSolver>(*rve_->cache, config_.materials,
                                              rve_->map, off.basis,
                                              config_.micro_tol);

    const auto t4 = std::chrono::steady_clock::now();
    MicroSolver* hf_source = config_.hyper_snapshots_from_hf ? &hf : nullptr;
    off.snapshots = std::make_unique<HyperSnapshots>(
        collect_hyper_snapshots(*off.rom, off.paths, hf_source));
    report["seconds"]["hyper_snapshots"] = seconds_since(t4);

    report["snapshots"] = snapshots.columns.cols();
    report["modes"] = off.basis.size();
    report["clusters"] = config_.clusters;
    report["paths"] = off.paths.size();
}

void Pipeline::validate()
{
    ensure_rve();
    if (!config_.macro_mesh.empty()) {
        Mesh macro_mesh = load_mesh(config_.macro_mesh);
        const MacroProblem problem = config_.macro_problem(std::move(macro_mesh));
        resolve_dirichlet(problem);
        monitor_dofs(problem);
    }
}

void Pipeline::run_offline()
{
    ensure_offline();
    auto& off = *offline_;

    if (config_.mode == RunMode::GaussPointHyper
        || config_.mode == RunMode::ElementHyper) {
        const HyperMode mode = config_.mode == RunMode::GaussPointHyper
            ? HyperMode::GaussPoint
            : HyperMode::Element;
        const auto t0 = std::chrono::steady_clock::now();
        const TrainingMatrix tm = build_training_matrix(
            *off.snapshots, mode, config_.criteria, config_.row_cutoff);
        const SchemeSelector selector(tm);
        const int m_tilde = config_.m_tilde > 0 ? config_.m_tilde
                                                : config_.m_tilde_sweep.back();
        const HyperScheme scheme = selector.select(m_tilde);
        off.report["seconds"]["selection"] = seconds_since(t0);
        off.report["scheme_entities"] = scheme.entities.size();
        off.report["scheme_residual"] = scheme.residual;
        save_scheme(scheme, cat(config_.output_dir, "/scheme.json"));
        write_spectrum_csv(selector.spectrum(),
                           cat(config_.output_dir, "/training_spectrum.csv"));
    }

    std::ofstream out(cat(config_.output_dir, "/offline_report.json"));
    require(out.good(), "cannot write offline report");
    out << off.report.dump(1) << "\n";
}

std::vector<StepRecord> Pipeline::online_records(MicroKind kind,
                                                 const HyperScheme* scheme)
{
    ensure_rve();
    require(!config_.macro_mesh.empty(), "config: macro_mesh is required");
    Mesh macro_mesh = load_mesh(config_.macro_mesh);
    const MacroProblem problem = config_.macro_problem(std::move(macro_mesh));

    MicroSetup setup;
    setup.kind = kind;
    setup.cache = rve_->cache.get();
    setup.materials = &config_.materials;
    setup.map = &rve_->map;
    setup.tolerances = config_.micro_tol;
    if (kind != MicroKind::HighFidelity) {
        require(offline_ != nullptr, "offline artifacts missing");
        setup.basis = &offline_->basis;
    }
    setup.scheme = scheme;

    TwoScaleOptions options;
    options.coupling = config_.coupling;
    options.macro_rel_tol = config_.macro_rel_tol;
    options.macro_max_iterations = config_.macro_max_iterations;

    TwoScaleSolver solver(problem, setup, options);
    return solver.run();
}

void Pipeline::write_records_csv(const std::vector<StepRecord>& records,
                                 const std::string& file) const
{
    std::ofstream out(file);
    require(out.good(), "cannot write '", file, "'");
    out.precision(17);
    out << "t,u_monitor,r_monitor,macro_iterations,micro_linearizations";
    for (size_t p = 0; p < config_.probes.size(); ++p)
        out << ",s11_p" << p << ",s22_p" << p << ",s12_p" << p << ",e11_p" << p
            << ",e22_p" << p << ",e12_p" << p;
    out << "\n";
    for (const StepRecord& r : records) {
        out << r.time << "," << r.monitor_u << "," << r.monitor_r << ","
            << r.macro_iterations << "," << r.micro_linearizations;
        for (size_t p = 0; p < r.probe_stress.size(); ++p) {
            const Voigt2& s = r.probe_stress[p];
            const Voigt2& e = r.probe_strain[p];
            out << "," << s[0] << "," << s[1] << "," << s[2] << "," << e[0]
                << "," << e[1] << "," << 0.5 * e[2];
        }
        out << "\n";
    }
}

void Pipeline::run_online()
{
    ensure_rve();
    std::filesystem::create_directories(config_.output_dir);

    MicroKind kind = MicroKind::HighFidelity;
    HyperScheme scheme;
    const HyperScheme* scheme_ptr = nullptr;
    if (config_.mode != RunMode::HighFidelity) {
        // Artifacts from a previous offline run, or build them now.
        const std::string basis_file = cat(config_.output_dir, "/basis.json");
        if (offline_ == nullptr && std::filesystem::exists(basis_file)) {
            offline_ = std::make_shared<Offline>();
            offline_->basis = load_basis(basis_file);
        } else {
            ensure_offline();
        }
        kind = MicroKind::Reduced;
        if (config_.mode != RunMode::Reduced) {
            const std::string scheme_file = cat(config_.output_dir, "/scheme.json");
            if (std::filesystem::exists(scheme_file)) {
                scheme = load_scheme(scheme_file);
            } else {
                require(offline_->snapshots != nullptr,
                        "scheme file missing; run the offline phase first");
                const HyperMode mode = config_.mode == RunMode::GaussPointHyper
                    ? HyperMode::GaussPoint
                    : HyperMode::Element;
                const TrainingMatrix tm = build_training_matrix(
                    *offline_->snapshots, mode, config_.criteria,
                    config_.row_cutoff);
                scheme = SchemeSelector(tm).select(config_.m_tilde);
            }
            scheme_ptr = &scheme;
            kind = MicroKind::Hyper;
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<StepRecord> records = online_records(kind, scheme_ptr);
    const double online_s = seconds_since(t0);

    write_records_csv(records, cat(config_.output_dir, "/results.csv"));
    nlohmann::json diag;
    diag["online_seconds"] = online_s;
    diag["mode"] = run_mode_name(config_.mode);
    diag["steps"] = records.size();
    if (!records.empty()) {
        diag["micro_linearizations"] = records.back().micro_linearizations;
        diag["macro_iterations_last"] = records.back().macro_iterations;
    }
    std::ofstream out(cat(config_.output_dir, "/diagnostics.json"));
    out << diag.dump(1) << "\n";
}

StudyReport Pipeline::run_study()
{
    require(config_.mode == RunMode::GaussPointHyper
                || config_.mode == RunMode::ElementHyper,
            "study requires an under-integration mode (ecm or eheim)");
    require(!config_.m_tilde_sweep.empty(), "config.hyper.sweep is required");
    ensure_offline();
    std::filesystem::create_directories(config_.output_dir);
    const HyperMode mode = config_.mode == RunMode::GaussPointHyper
        ? HyperMode::GaussPoint
        : HyperMode::Element;

    StudyReport report;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<StepRecord> reference =
        online_records(MicroKind::Reduced, nullptr);
    report.reference_seconds = seconds_since(t0);
    write_records_csv(reference, cat(config_.output_dir, "/reference.csv"));

    {
        Mesh macro_mesh = load_mesh(config_.macro_mesh);
        report.reduced_dofs = offline_->basis.size()
            * FemCache(macro_mesh).num_gps();
    }

    const int gauss_per_element =
        rve_->cache->num_gps() / rve_->mesh.num_elements();
    std::ofstream csv(cat(config_.output_dir, "/study.csv"));
    require(csv.good(), "cannot write study.csv");
    csv.precision(17);
    csv << "mode,criteria,m_tilde,entities,integration_points,error,"
           "online_seconds,status\n";

    const std::vector<std::pair<std::string, CriterionSet>> settings = {
        { "conventional", CriterionSet::conventional() },
        { "additional", config_.criteria },
    };
    for (const auto& [label, criteria] : settings) {
        const TrainingMatrix tm =
            build_training_matrix(*offline_->snapshots, mode, criteria,
                                  config_.row_cutoff);
        const SchemeSelector selector(tm);
        write_spectrum_csv(selector.spectrum(),
                           cat(config_.output_dir, "/spectrum_", label, ".csv"));
        for (int m_tilde : config_.m_tilde_sweep) {
            StudyRow row;
            row.criteria = label;
            row.m_tilde = m_tilde;
            try {
                const HyperScheme scheme = selector.select(m_tilde);
                row.entities = static_cast<int>(scheme.entities.size());
                row.integration_points = mode == HyperMode::Element
                    ? row.entities * gauss_per_element
                    : row.entities;
                const auto tr = std::chrono::steady_clock::now();
                const auto records = online_records(MicroKind::Hyper, &scheme);
                row.online_seconds = seconds_since(tr);
                row.error = reaction_curve_error(records, reference);
                row.status = "ok";
            } catch (const Error& err) {
                row.status = err.what();
                row.error = std::numeric_limits<double>::quiet_NaN();
            }
            csv << run_mode_name(config_.mode) << "," << label << ","
                << row.m_tilde << "," << row.entities << ","
                << row.integration_points << "," << row.error << ","
                << row.online_seconds << ","
                << (row.status == "ok" ? "ok" : "failed") << "\n";
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

} // namespace hyperfe2
