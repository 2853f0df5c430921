#ifndef EQFLOW_CONFIG_HPP
#define EQFLOW_CONFIG_HPP

// Experiment configuration: `key = value` files, flag overrides and the
// per-experiment parameter tables with their defaults.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eqflow/common.hpp"

namespace eqflow::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Format { csv, jsonl };

std::string format_name(Format f);
Format parse_format(const std::string& s);

struct ParamSpec {
    std::string key;
    std::string default_value;
    std::string help;
};

struct ExperimentSpec {
    std::string name;
    std::string summary;
    std::vector<ParamSpec> params;
};

const std::vector<ExperimentSpec>& experiment_specs();
/// Throws InvalidInput listing the known experiments.
const ExperimentSpec& find_experiment(const std::string& name);

/// Keys accepted in every config: experiment, seed, out, format, threads.
const std::vector<std::string>& global_keys();

struct ConfigEntry {
    std::string key;
    std::string value;
    std::string where;  ///< "file:line"
};

/// Parses `key = value` lines; `#` starts a comment. Throws InvalidInput with
/// a `source:line:` prefix on malformed or duplicate lines.
std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source);
std::vector<ConfigEntry> read_config_file(const std::string& path);

class ResolvedConfig {
public:
    std::string experiment;
    std::uint64_t seed = 1;
    std::string out;  ///< empty: standard output
    Format format = Format::csv;
    int threads = 0;  ///< 0: runtime default
    /// Every parameter of the experiment in table order, defaults filled in.
    std::vector<std::pair<std::string, std::string>> params;

    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
};

/// File entries first, then flags (`key -> value`) on top. Unknown keys in
/// the file are reported with their `file:line`.
ResolvedConfig resolve(const std::vector<ConfigEntry>& file, const std::map<std::string, std::string>& flags);

/// `# key = value` lines describing a resolved config.
std::vector<std::string> describe(const ResolvedConfig& c);

}  // namespace eqflow::cli

#endif
