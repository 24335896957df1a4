#ifndef HYPERFE2_PIPELINE_HPP
#define HYPERFE2_PIPELINE_HPP

#include "hyperfe2/config.hpp"
#include "hyperfe2/sampling.hpp"

#include <memory>

namespace hyperfe2 {

struct StudyRow {
    std::string criteria;
    int m_tilde = 0;
    int entities = 0;
    int integration_points = 0;
    double error = 0.0;
    double online_seconds = 0.0;
    std::string status; // "ok" or the failure reason
};

struct StudyReport {
    std::vector<StudyRow> rows;
    double reference_seconds = 0.0;
    int reduced_dofs = 0; // modes x macro gauss points
};

/// Orchestrates the offline phase (surrogate, clustering, training solves,
/// basis, selection), the online two-scale run and the sweep study. All
/// artifacts land in config.output_dir.
class Pipeline {
public:
    explicit Pipeline(RunConfig config);

    void validate();
    void run_offline();
    void run_online();
    StudyReport run_study();

    const RunConfig& config() const { return config_; }

private:
    struct Rve;
    struct Offline;

    void ensure_rve();
    void ensure_offline();
    std::vector<StepRecord> online_records(MicroKind kind,
                                           const HyperScheme* scheme);
    void write_records_csv(const std::vector<StepRecord>& records,
                           const std::string& file) const;

    RunConfig config_;
    std::shared_ptr<Rve> rve_;
    std::shared_ptr<Offline> offline_;
};

/// Relative reaction-curve deviation: max_t |r - r_ref| / max_t |r_ref|.
double reaction_curve_error(const std::vector<StepRecord>& test,
                            const std::vector<StepRecord>& reference);

} // namespace hyperfe2

#endif
