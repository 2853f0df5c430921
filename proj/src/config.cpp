#include "eqflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace eqflow::cli {

std::string format_name(Format f)
{
    return f == Format::csv ? "csv" : "jsonl";
}

Format parse_format(const std::string& s)
{
    if (s == "csv") return Format::csv;
    if (s == "jsonl") return Format::jsonl;
    throw InvalidInput("format must be csv or jsonl, got '" + s + "'");
}

const std::vector<ExperimentSpec>& experiment_specs()
{
    static const std::vector<ExperimentSpec> specs = {
        {"census",
         "periodic-orbit counts N(t_n) and ep estimates at the natural census times",
         {{"flow", "Z1", "disk field: Z0, Z1 or Z2"},
          {"tmax-index", "8", "largest census index n"},
          {"imax", "8", "largest strip index of the radii ladder (2..8)"},
          {"include-fixed-point", "true", "count the fixed point at the origin"},
          {"include-boundary", "true", "count the boundary circle"}}},
        {"sphere-census",
         "orbit counts of the sphere double cover",
         {{"flow", "Z1", "disk field: Z0, Z1 or Z2"},
          {"tmax-index", "8", "largest census index n"},
          {"imax", "8", "largest strip index of the radii ladder (2..8)"}}},
        {"ep-curve",
         "ep estimates over a range of census indices",
         {{"flow", "Z1", "disk field: Z0, Z1 or Z2"},
          {"n-min", "2", "first census index"},
          {"n-max", "8", "last census index"},
          {"imax", "8", "largest strip index of the radii ladder (2..8)"}}},
        {"orbit-verify",
         "integrates a ladder circle and confirms its period numerically",
         {{"flow", "Z1", "disk field: Z0, Z1 or Z2"},
          {"radius", "0.5", "radius of the ladder circle"},
          {"tol", "1e-9", "integrator tolerance"},
          {"imax", "6", "largest strip index of the radii ladder (2..8)"}}},
        {"suspension",
         "integer-time samples of a constant-speed suspension orbit",
         {{"base", "golden", "base map: golden (rotation) or cat"},
          {"speed", "1", "constant speed"},
          {"t", "20", "orbit length"},
          {"start", "auto", "start point y..., s (auto: y = 0.1234, 0.5678 as needed, s = 0)"}}},
        {"abramov",
         "separated-set entropy of a cat-map suspension with constant roof",
         {{"base", "cat", "base map: cat or identity"},
          {"roof", "1", "constant roof (time to cross a fiber), in [1/4, 4]"},
          {"seeds", "4096", "initial points per eps"},
          {"t", "8", "orbit length"},
          {"eps", "0.1,0.07,0.05", "separation scales"}}},
        {"slowdown",
         "fiber return times and occupation under the w-profile slow-down",
         {{"betas", "1,0.5,0.25,0.125", "beta ladder of the profile"},
          {"halvings", "2", "number of times the ladder is halved"},
          {"chart-radius", "0.25", "radius of the slow-down chart"},
          {"center", "0.5,0.5", "centre (y, s) of the chart"},
          {"grid", "64", "base points for the return-time mean"},
          {"times", "1000,10000,100000", "orbit lengths for the occupation fraction"},
          {"start", "0.1234", "base point of the occupation orbit"},
          {"region-height", "0.2", "region s < region-height"}}},
        {"tear-residual",
         "semiconjugacy residuals of the planar tear field",
         {{"variant", "Z", "tear field: Z or Z1"},
          {"grid", "all", "axis, sigmaHalf, rhoHalf or all"},
          {"points", "41", "points per grid"},
          {"tmax", "5", "time horizon"},
          {"tol", "1e-9", "integrator tolerance"}}},
        {"tear-mirror",
         "mirror return and crossing-time ratio of the rotated tear fields",
         {{"samples", "100", "departure points"},
          {"rho-min", "0.05", "smallest distance to the axis"},
          {"rho-max", "2.5", "largest distance to the axis"},
          {"dim", "5", "ambient dimension"},
          {"tol", "1e-9", "integrator tolerance"}}},
        {"embed-check",
         "restriction of the embedded disk fields to D1 and sign on D2 minus D1",
         {{"flow", "Z1", "disk field: Z1 or Z2"},
          {"points", "1000", "sample points per region"},
          {"dim", "5", "ambient dimension"},
          {"imax", "6", "largest strip index of the radii ladder (2..8)"}}},
        {"bump-audit",
         "sampled properties of w and flatness of gamma0 and Psi",
         {{"betas", "1,0.5,0.25,0.125", "beta ladder of w"},
          {"dim", "5", "dimension of the ball"},
          {"samples", "10000", "samples per ball"}}},
    };
    return specs;
}

const ExperimentSpec& find_experiment(const std::string& name)
{
    for (const auto& s : experiment_specs())
        if (s.name == name) return s;
    std::string known;
    for (const auto& s : experiment_specs()) known += (known.empty() ? "" : ", ") + s.name;
    throw InvalidInput("unknown experiment '" + name + "' (known: " + known + ")");
}

const std::vector<std::string>& global_keys()
{
    static const std::vector<std::string> keys = {"experiment", "seed", "out", "format", "threads"};
    return keys;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_global(const std::string& key)
{
    const auto& g = global_keys();
    return std::find(g.begin(), g.end(), key) != g.end();
}

bool has_param(const ExperimentSpec& spec, const std::string& key)
{
    return std::any_of(spec.params.begin(), spec.params.end(), [&](const ParamSpec& p) { return p.key == key; });
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (v.empty() || r.ec != std::errc() || r.ptr != end)
        throw InvalidInput("parameter '" + key + "': expected a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& v)
{
    long long out = 0;
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (v.empty() || r.ec != std::errc() || r.ptr != end)
        throw InvalidInput("parameter '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

}  // namespace

std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source)
{
    std::vector<ConfigEntry> out;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string where = source + ":" + std::to_string(n);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput(where + ": expected 'key = value'");
        ConfigEntry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where};
        if (e.key.empty()) throw InvalidInput(where + ": missing key");
        if (!seen.insert(e.key).second) throw InvalidInput(where + ": duplicate key '" + e.key + "'");
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ConfigEntry> read_config_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

const std::string& ResolvedConfig::get(const std::string& key) const
{
    for (const auto& [k, v] : params)
        if (k == key) return v;
    throw InvalidInput("experiment '" + experiment + "' has no parameter '" + key + "'");
}

double ResolvedConfig::get_double(const std::string& key) const
{
    return to_double(key, get(key));
}

long long ResolvedConfig::get_int(const std::string& key) const
{
    return to_int(key, get(key));
}

bool ResolvedConfig::get_bool(const std::string& key) const
{
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidInput("parameter '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> ResolvedConfig::get_doubles(const std::string& key) const
{
    std::vector<double> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw InvalidInput("parameter '" + key + "': expected a comma-separated list");
    return out;
}

ResolvedConfig resolve(const std::vector<ConfigEntry>& file, const std::map<std::string, std::string>& flags)
{
    std::map<std::string, std::pair<std::string, std::string>> merged;  // key -> (value, where)
    for (const auto& e : file) merged[e.key] = {e.value, e.where};
    for (const auto& [k, v] : flags) merged[k] = {v, "--" + k};

    const auto exp = merged.find("experiment");
    if (exp == merged.end() || exp->second.first.empty()) throw InvalidInput("no experiment given");
    const ExperimentSpec& spec = find_experiment(exp->second.first);

    ResolvedConfig c;
    c.experiment = spec.name;
    for (const auto& [k, vw] : merged) {
        if (is_global(k) || has_param(spec, k)) continue;
        throw InvalidInput(vw.second + ": unknown key '" + k + "' for experiment '" + spec.name + "'");
    }
    if (auto it = merged.find("seed"); it != merged.end()) {
        const long long s = to_int("seed", it->second.first);
        if (s < 0) throw InvalidInput(it->second.second + ": seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (auto it = merged.find("out"); it != merged.end()) c.out = it->second.first;
    if (auto it = merged.find("format"); it != merged.end()) c.format = parse_format(it->second.first);
    if (auto it = merged.find("threads"); it != merged.end()) {
        const long long t = to_int("threads", it->second.first);
        if (t < 0 || t > 1024) throw InvalidInput(it->second.second + ": threads must lie in [0, 1024]");
        c.threads = static_cast<int>(t);
    }
    for (const auto& p : spec.params) {
        const auto it = merged.find(p.key);
        c.params.emplace_back(p.key, it == merged.end() ? p.default_value : it->second.first);
    }
    return c;
}

std::vector<std::string> describe(const ResolvedConfig& c)
{
    std::vector<std::string> out;
    out.push_back("# eqflow " + std::string(kVersion));
    out.push_back("# experiment = " + c.experiment);
    out.push_back("# seed = " + std::to_string(c.seed));
    out.push_back("# format = " + format_name(c.format));
    for (const auto& [k, v] : c.params) out.push_back("# " + k + " = " + v);
    return out;
}

}  // namespace eqflow::cli
