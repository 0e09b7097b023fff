// Command-line entry point: `msl run <config>` and `msl validate`.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "msl/config.hpp"
#include "msl/run.hpp"

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int execute(msl::RunConfig cfg, const std::string& source, const std::optional<std::string>& out_dir,
            const std::optional<std::uint64_t>& seed) {
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    const auto rep = msl::run(cfg, source);
    std::cout << cfg.command << ": " << rep.doc["status"].get<std::string>() << " (report: " << cfg.output_dir
              << "/report.json)\n";
    for (const auto& m : rep.doc["messages"]) std::cerr << m.get<std::string>() << "\n";
    return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimal surface system laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    app.add_option("--output-dir", out_dir, "Directory for report.json and plot data");
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--threads", threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a YAML or JSON config");
    run_cmd->add_option("config", config_path, "Config file")->required();
    app.add_subcommand("validate", "Run the built-in self-check suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? msl::kExitOk : msl::kExitOperational;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (*run_cmd) {
            msl::RunConfig cfg;
            try {
                cfg = msl::load_config(config_path);
            } catch (const std::exception& e) {
                const auto dir = out_dir.value_or(cfg.output_dir);
                msl::input_failure_report(dir, e.what(), read_text(config_path));
                std::cerr << "error: " << e.what() << " (report: " << dir << "/report.json)\n";
                return msl::kExitOperational;
            }
            return execute(cfg, read_text(config_path), out_dir, seed);
        }
        msl::RunConfig cfg;
        cfg.command = "validate";
        return execute(cfg, {}, out_dir, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return msl::kExitOperational;
    }
}
