#ifndef HYPERFE2_CONFIG_HPP
#define HYPERFE2_CONFIG_HPP

#include "hyperfe2/hyper.hpp"
#include "hyperfe2/macro_problem.hpp"
#include "hyperfe2/twoscale.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hyperfe2 {

enum class RunMode { HighFidelity, Reduced, GaussPointHyper, ElementHyper };

const char* run_mode_name(RunMode mode);
RunMode run_mode_from_name(const std::string& name);

struct BcConfig {
    RegionBox box;
    int comp = 0; // 0 x, 1 y, 2 both
    TimeTable value;
};

struct RunConfig {
    std::string macro_mesh;
    std::string rve_mesh;
    std::vector<Material> materials; // indexed by material id

    RunMode mode = RunMode::HighFidelity;
    CouplingScheme coupling = CouplingScheme::Monolithic;

    // reduction
    Truncation truncation;              // default: 8 modes
    int m_tilde = 0;                    // required for hyper modes
    std::vector<int> m_tilde_sweep;     // study grid
    CriterionSet criteria;              // additional criteria flags
    bool hyper_snapshots_from_hf = false;
    double row_cutoff = 1e-10;

    // sampling
    int clusters = 8;
    std::uint64_t seed = 42;

    // loading
    double t_end = 1.0;
    int steps = 20;
    std::vector<BcConfig> dirichlet;
    std::vector<BcConfig> loads;
    MonitorSet monitor;
    std::vector<std::pair<int, int>> probes;

    // numerics
    MicroTolerances micro_tol;
    double macro_rel_tol = 1e-6;
    int macro_max_iterations = 25;
    double pbc_tol = 1e-8;
    int anchor_node = -1;

    std::string output_dir = "out";

    std::vector<double> time_stations() const;
    MacroProblem macro_problem(Mesh mesh) const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

} // namespace hyperfe2

#endif
