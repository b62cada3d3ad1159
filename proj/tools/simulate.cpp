// Command-line driver for rate sweeps and convergence traces.

#include "hirs/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>

using namespace hirs;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kMethodFailure = 2;

std::string read_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw exp::ConfigError(0, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Hybrid IRS-aided relay rate simulator"};
    std::string config_path, out_path, sweep, methods;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    bool convergence = false, timing = false;
    app.add_option("--config", config_path, "key=value experiment file")->required();
    app.add_option("--out", out_path, "CSV output path")->required();
    app.add_option("--sweep", sweep, "swept parameter: ps, pi or k");
    app.add_option("--trials", trials, "trials per point");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--methods", methods, "comma-separated method list");
    app.add_flag("--convergence", convergence, "write per-iteration rates at the first swept value");
    app.add_flag("--timing", timing, "record wall-clock times (output no longer reproducible)");
    CLI11_PARSE(app, argc, argv);

    exp::ExperimentConfig cfg;
    try {
        cfg = exp::parse_config(read_file(config_path));
        if (!sweep.empty())
            exp::set_option(cfg, "sweep", sweep);
        if (trials)
            exp::set_option(cfg, "trials", std::to_string(*trials));
        if (seed)
            exp::set_option(cfg, "seed", std::to_string(*seed));
        if (!methods.empty())
            exp::set_option(cfg, "methods", methods);
        exp::validate_config(cfg, [](const char *) { return 0; });
    } catch (const exp::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << '\n';
        return kConfigError;
    }

    bool failed = false;
    if (convergence) {
        const auto traces = exp::run_convergence(cfg);
        exp::write_convergence_csv(out, traces);
        for (const auto &t : traces)
            if (t.status != "ok") {
                std::cerr << bench::to_string(t.method) << ": " << t.status << '\n';
                failed = true;
            }
    } else {
        const auto rows = exp::run_sweep(cfg, {timing});
        exp::write_sweep_csv(out, rows);
        exp::write_summary_csv(std::cout, cfg.sweep, exp::summarize(rows));
        for (const auto &r : rows)
            if (r.status != "ok") {
                std::cerr << exp::to_string(r.sweep) << "=" << exp::detail::format_double(r.value) << " seed " << r.seed
                          << ' ' << bench::to_string(r.method) << ": " << r.status << '\n';
                failed = true;
            }
    }
    return failed ? kMethodFailure : kOk;
}
