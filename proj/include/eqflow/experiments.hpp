#ifndef EQFLOW_EXPERIMENTS_HPP
#define EQFLOW_EXPERIMENTS_HPP

// The experiments behind the command-line tool, each producing a table of
// records, and their CSV / JSON-lines rendering.

#include <string>
#include <utility>
#include <vector>

#include "eqflow/config.hpp"
#include "json.hpp"

namespace eqflow::cli {

struct RunOutput {
    /// Column name and description, in output order.
    std::vector<std::pair<std::string, std::string>> columns;
    std::vector<nlohmann::ordered_json> records;
    bool low_confidence = false;
    std::vector<std::string> notes;
};

RunOutput run_experiment(const ResolvedConfig& c);

/// Config header, column documentation and the records in the chosen format.
std::string render(const ResolvedConfig& c, const RunOutput& r);

/// Sidecar record: tool version, resolved config, wall time.
std::string metadata_json(const ResolvedConfig& c, const RunOutput& r, double wall_seconds);

}  // namespace eqflow::cli

#endif
