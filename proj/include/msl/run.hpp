#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "msl/config.hpp"

namespace msl {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitOperational = 2 };

struct RunReport {
    nlohmann::json doc;  // written to <output_dir>/report.json
    int exit_code = kExitOk;
};

/// Execute `cfg.command`, emit plot data and report.json into cfg.output_dir.
/// `config_source` is the config file text, echoed into the report.
RunReport run(const RunConfig& cfg, const std::string& config_source = {});

/// Report for a run that never started (unreadable or invalid config). Written
/// to output_dir/report.json when the directory can be created; exit code 2.
RunReport input_failure_report(const std::string& output_dir, const std::string& message,
                               const std::string& config_source = {});

/// Built-in self-check suite; returns {checks: [...], passed}.
nlohmann::json validate_suite(std::uint64_t seed);

/// Copy of a report without its "timings" section, for determinism comparisons.
nlohmann::json without_timings(const nlohmann::json& report);

}  // namespace msl
