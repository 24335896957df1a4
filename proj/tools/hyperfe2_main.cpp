#include "hyperfe2/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace hyperfe2;

namespace {

struct CommonArgs {
    std::string config_file;
    std::string output_dir;
    std::string mode;
    int m_tilde = 0;
    int modes = 0;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("-c,--config", args.config_file, "run configuration (JSON)")
        ->required();
    cmd->add_option("-o,--output", args.output_dir, "override output directory");
    cmd->add_option("--mode", args.mode, "override mode (hf|rom|ecm|eheim)");
    cmd->add_option("--m-tilde", args.m_tilde, "override hyper entity count");
    cmd->add_option("--modes", args.modes, "override basis size");
    cmd->add_option("--seed", args.seed, "override sampling seed");
}

RunConfig load(const CommonArgs& args)
{
    RunConfig config = parse_config(args.config_file);
    if (!args.output_dir.empty())
        config.output_dir = args.output_dir;
    if (!args.mode.empty())
        config.mode = run_mode_from_name(args.mode);
    if (args.m_tilde > 0)
        config.m_tilde = args.m_tilde;
    if (args.modes > 0) {
        config.truncation.count = args.modes;
        config.truncation.energy.reset();
    }
    if (args.seed >= 0)
        config.seed = static_cast<std::uint64_t>(args.seed);
    return config;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "Hyper-reduced two-scale solid mechanics pipeline" };
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* offline = app.add_subcommand(
        "offline", "surrogate run, clustering, training solves, basis and "
                   "integration-scheme selection");
    CLI::App* online = app.add_subcommand("online", "two-scale simulation");
    CLI::App* study = app.add_subcommand(
        "study", "entity-count sweep against the fully integrated reference");
    CLI::App* validate =
        app.add_subcommand("validate", "check configuration and meshes");
    for (CLI::App* cmd : { offline, online, study, validate })
        add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    RunConfig config;
    try {
        config = load(args);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    }

    try {
        Pipeline pipeline(std::move(config));
        if (validate->parsed()) {
            pipeline.validate();
            std::cout << "configuration is valid\n";
        } else if (offline->parsed()) {
            pipeline.run_offline();
            std::cout << "offline artifacts written to "
                      << pipeline.config().output_dir << "\n";
        } else if (online->parsed()) {
            pipeline.run_online();
            std::cout << "results written to " << pipeline.config().output_dir
                      << "/results.csv\n";
        } else if (study->parsed()) {
            const StudyReport report = pipeline.run_study();
            std::printf("%-14s %8s %8s %12s %12s\n", "criteria", "m_tilde",
                        "entities", "error", "online[s]");
            for (const StudyRow& row : report.rows) {
                if (row.status == "ok")
                    std::printf("%-14s %8d %8d %12.4e %12.3f\n",
                                row.criteria.c_str(), row.m_tilde, row.entities,
                                row.error, row.online_seconds);
                else
                    std::printf("%-14s %8d %8s %12s %12s\n", row.criteria.c_str(),
                                row.m_tilde, "-", "failed", "-");
            }
            std::printf("reference online time: %.3f s\n",
                        report.reference_seconds);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
