// eqflow: runs the flow experiments and writes plot-ready tables.
//
// Exit status: 0 success, 1 invalid input, 2 success with low-confidence
// results, 3 internal error.

#include <omp.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "eqflow/config.hpp"
#include "eqflow/experiments.hpp"

namespace {

std::string experiment_list()
{
    std::string s = "Experiments:\n";
    for (const auto& e : eqflow::cli::experiment_specs()) {
        s += "  " + e.name + ": " + e.summary + "\n";
        for (const auto& p : e.params) s += "      --" + p.key + " (default " + p.default_value + ") " + p.help + "\n";
    }
    return s;
}

int run(int argc, char** argv)
{
    using namespace eqflow::cli;
    CLI::App app{"Runs disk-flow, suspension and tear-chart experiments.", "eqflow"};
    app.footer(experiment_list());

    std::string positional, experiment, config_path, seed, out, format, threads;
    app.add_option("name", positional, "experiment to run");
    app.add_option("--experiment", experiment, "experiment to run");
    app.add_option("--config", config_path, "file of `key = value` lines");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out, "output path (default: standard output)");
    app.add_option("--format", format, "csv or jsonl");
    app.add_option("--threads", threads, "worker threads (0: runtime default)");

    std::map<std::string, std::string> values;
    std::set<std::string> keys;
    for (const auto& e : experiment_specs())
        for (const auto& p : e.params) keys.insert(p.key);
    for (const auto& k : keys) app.add_option("--" + k, values[k], "experiment parameter");

    if (argc <= 1) {
        std::cerr << app.help();
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (!positional.empty() && !experiment.empty() && positional != experiment) {
        std::cerr << "error: experiment given twice ('" << positional << "' and '" << experiment << "')\n";
        return 1;
    }
    std::map<std::string, std::string> flags;
    if (!positional.empty()) flags["experiment"] = positional;
    if (!experiment.empty()) flags["experiment"] = experiment;
    auto take = [&](const std::string& name, const std::string& value) {
        if (app.get_option("--" + name)->count() > 0) flags[name] = value;
    };
    take("seed", seed);
    take("out", out);
    take("format", format);
    take("threads", threads);
    for (const auto& k : keys) take(k, values[k]);

    std::vector<ConfigEntry> file;
    if (!config_path.empty()) file = read_config_file(config_path);
    const ResolvedConfig cfg = resolve(file, flags);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput result = run_experiment(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string text = render(cfg, result);

    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) throw eqflow::InvalidInput("cannot write '" + cfg.out + "'");
        f << text;
        std::ofstream meta(cfg.out + ".meta.json", std::ios::binary);
        if (!meta) throw eqflow::InvalidInput("cannot write '" + cfg.out + ".meta.json'");
        meta << metadata_json(cfg, result, wall);
    }
    if (result.low_confidence) {
        std::cerr << "warning: low-confidence result\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const eqflow::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
