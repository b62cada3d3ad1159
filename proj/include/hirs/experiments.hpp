#ifndef HIRS_EXPERIMENTS_HPP
#define HIRS_EXPERIMENTS_HPP

// Monte-Carlo sweeps over P_s, P_i or K with CSV output, and single-point
// convergence traces. Config files are flat key=value text.

#include "hirs/benchmarks.hpp"
#include "hirs/hp_sdr_fp.hpp"
#include "hirs/wf_gpi_grr.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hirs::exp {

using bench::Scheme;

enum class SweepParam { ps, pi, k };

inline const char *to_string(SweepParam p)
{
    switch (p) {
    case SweepParam::ps: return "ps";
    case SweepParam::pi: return "pi";
    case SweepParam::k: return "k";
    }
    return "unknown";
}

inline std::optional<SweepParam> parse_sweep_param(std::string_view s)
{
    for (SweepParam p : {SweepParam::ps, SweepParam::pi, SweepParam::k})
        if (s == to_string(p))
            return p;
    return std::nullopt;
}

struct OptimizerSettings {
    int max_iterations = 30;
    double tolerance = 1e-3;
    int randomization_samples = 200;
    double gpi_tolerance = 1e-6;
    int gpi_max_iterations = 100;
};

/// Everything a sweep needs. Defaults reproduce the P_s sweep at
/// (M, N, K) = (2, 32, 4), P_i = P_r = 30 dBm.
struct ExperimentConfig {
    int M = 2, N = 32, K = 4;
    double ps_dbm = 10.0, pr_dbm = 30.0, pi_dbm = 30.0, sigma2_dbm = -80.0;
    Geometry geometry{};
    SweepParam sweep = SweepParam::ps;
    std::vector<double> values{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    int trials = 100;
    std::uint64_t seed = 1;
    std::vector<Scheme> methods{bench::kAllSchemes.begin(), bench::kAllSchemes.end()};
    OptimizerSettings optimizer{};

    /// Link budget at one swept value.
    SystemConfig system_at(double value) const
    {
        double ps = ps_dbm, pi = pi_dbm;
        int k = K;
        switch (sweep) {
        case SweepParam::ps: ps = value; break;
        case SweepParam::pi: pi = value; break;
        case SweepParam::k: k = static_cast<int>(value); break;
        }
        return SystemConfig::from_dbm(M, N, k, ps, pr_dbm, pi, sigma2_dbm);
    }
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string &msg)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

// ---------------------------------------------------------------- config text

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string &s, int line, const std::string &key)
{
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(line, "cannot parse '" + s + "' as a number for " + key);
    return v;
}

inline long long parse_int(const std::string &s, int line, const std::string &key)
{
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(line, "cannot parse '" + s + "' as an integer for " + key);
    return v;
}

inline Point3 parse_point(const std::string &s, int line, const std::string &key)
{
    const auto parts = split(s, ',');
    if (parts.size() != 3)
        throw ConfigError(line, key + " needs three comma-separated coordinates");
    return {parse_double(parts[0], line, key), parse_double(parts[1], line, key), parse_double(parts[2], line, key)};
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string format_list(const std::vector<double> &v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + format_double(v[i]);
    return out;
}

inline std::string format_point(const Point3 &p)
{
    return format_double(p[0]) + "," + format_double(p[1]) + "," + format_double(p[2]);
}

} // namespace detail

/// Assigns one key. `line` is only used in error messages.
inline void set_option(ExperimentConfig &c, const std::string &key, const std::string &val, int line = 0)
{
    auto as_int = [&](int lo) {
        const long long v = detail::parse_int(val, line, key);
        if (v < lo || v > 1'000'000)
            throw ConfigError(line, key + " must be in [" + std::to_string(lo) + ", 1000000]");
        return static_cast<int>(v);
    };
    auto as_double = [&] { return detail::parse_double(val, line, key); };
    auto as_alpha = [&] {
        const double a = as_double();
        if (!(a > 0.0))
            throw ConfigError(line, key + " must be positive");
        return a;
    };

    if (key == "M")
        c.M = as_int(1);
    else if (key == "N")
        c.N = as_int(1);
    else if (key == "K")
        c.K = as_int(0);
    else if (key == "ps_dbm")
        c.ps_dbm = as_double();
    else if (key == "pr_dbm")
        c.pr_dbm = as_double();
    else if (key == "pi_dbm")
        c.pi_dbm = as_double();
    else if (key == "sigma2_dbm")
        c.sigma2_dbm = as_double();
    else if (key == "source")
        c.geometry.source = detail::parse_point(val, line, key);
    else if (key == "destination")
        c.geometry.destination = detail::parse_point(val, line, key);
    else if (key == "irs")
        c.geometry.irs = detail::parse_point(val, line, key);
    else if (key == "relay")
        c.geometry.relay = detail::parse_point(val, line, key);
    else if (key == "alpha_si")
        c.geometry.alpha_si = as_alpha();
    else if (key == "alpha_sr")
        c.geometry.alpha_sr = as_alpha();
    else if (key == "alpha_ir")
        c.geometry.alpha_ir = as_alpha();
    else if (key == "alpha_rd")
        c.geometry.alpha_rd = as_alpha();
    else if (key == "alpha_id")
        c.geometry.alpha_id = as_alpha();
    else if (key == "sweep") {
        const auto p = parse_sweep_param(val);
        if (!p)
            throw ConfigError(line, "sweep must be ps, pi or k");
        c.sweep = *p;
    } else if (key == "values") {
        c.values.clear();
        for (const auto &v : detail::split(val, ','))
            c.values.push_back(detail::parse_double(v, line, key));
        if (c.values.empty())
            throw ConfigError(line, "values must not be empty");
    } else if (key == "trials")
        c.trials = as_int(1);
    else if (key == "seed") {
        const long long v = detail::parse_int(val, line, key);
        if (v < 0)
            throw ConfigError(line, "seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(v);
    } else if (key == "methods") {
        c.methods.clear();
        for (const auto &m : detail::split(val, ',')) {
            const auto s = bench::parse_scheme(m);
            if (!s)
                throw ConfigError(line, "unknown method '" + m + "'");
            c.methods.push_back(*s);
        }
        if (c.methods.empty())
            throw ConfigError(line, "methods must not be empty");
    } else if (key == "max_iterations")
        c.optimizer.max_iterations = as_int(1);
    else if (key == "tolerance") {
        c.optimizer.tolerance = as_double();
        if (!(c.optimizer.tolerance > 0.0))
            throw ConfigError(line, "tolerance must be positive");
    } else if (key == "randomization_samples")
        c.optimizer.randomization_samples = as_int(1);
    else if (key == "gpi_tolerance") {
        c.optimizer.gpi_tolerance = as_double();
        if (!(c.optimizer.gpi_tolerance > 0.0))
            throw ConfigError(line, "gpi_tolerance must be positive");
    } else if (key == "gpi_max_iterations")
        c.optimizer.gpi_max_iterations = as_int(1);
    else
        throw ConfigError(line, "unknown key '" + key + "'");
}

/// Cross-key checks. `line_of` maps a key to the line that set it (0 if unset).
template <typename LineOf>
void validate_config(const ExperimentConfig &c, LineOf line_of)
{
    if (c.K > c.N)
        throw ConfigError(line_of("K") ? line_of("K") : line_of("N"), "K must satisfy K <= N");
    if (c.sweep == SweepParam::k)
        for (double v : c.values)
            if (v != std::floor(v) || v < 0.0 || v > c.N)
                throw ConfigError(line_of("values"), "K values must be integers in [0, N]");
    try {
        c.geometry.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(0, e.what());
    }
}

/// Parses key=value lines; '#' starts a comment. Unknown keys, bad values and
/// violated constraints are reported with their line number.
inline ExperimentConfig parse_config(const std::string &text)
{
    ExperimentConfig c;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = detail::trim(std::string_view(raw).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "expected key=value");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string val = detail::trim(std::string_view(body).substr(eq + 1));
        if (seen.count(key))
            throw ConfigError(line, "duplicate key " + key);
        seen[key] = line;

        set_option(c, key, val, line);
    }

    validate_config(c, [&](const char *key) { return seen.count(key) ? seen.at(key) : 0; });
    return c;
}

/// Canonical text: every key, fixed order, shortest round-trip numbers.
inline std::string serialize_config(const ExperimentConfig &c)
{
    using detail::format_double;
    std::ostringstream os;
    os << "M=" << c.M << "\nN=" << c.N << "\nK=" << c.K << '\n';
    os << "ps_dbm=" << format_double(c.ps_dbm) << "\npr_dbm=" << format_double(c.pr_dbm)
       << "\npi_dbm=" << format_double(c.pi_dbm) << "\nsigma2_dbm=" << format_double(c.sigma2_dbm) << '\n';
    os << "source=" << detail::format_point(c.geometry.source) << '\n';
    os << "destination=" << detail::format_point(c.geometry.destination) << '\n';
    os << "irs=" << detail::format_point(c.geometry.irs) << '\n';
    os << "relay=" << detail::format_point(c.geometry.relay) << '\n';
    os << "alpha_si=" << format_double(c.geometry.alpha_si) << "\nalpha_sr=" << format_double(c.geometry.alpha_sr)
       << "\nalpha_ir=" << format_double(c.geometry.alpha_ir) << "\nalpha_rd=" << format_double(c.geometry.alpha_rd)
       << "\nalpha_id=" << format_double(c.geometry.alpha_id) << '\n';
    os << "sweep=" << to_string(c.sweep) << "\nvalues=" << detail::format_list(c.values) << '\n';
    os << "trials=" << c.trials << "\nseed=" << c.seed << "\nmethods=";
    for (std::size_t i = 0; i < c.methods.size(); ++i)
        os << (i ? "," : "") << bench::to_string(c.methods[i]);
    os << "\nmax_iterations=" << c.optimizer.max_iterations
       << "\ntolerance=" << format_double(c.optimizer.tolerance)
       << "\nrandomization_samples=" << c.optimizer.randomization_samples
       << "\ngpi_tolerance=" << format_double(c.optimizer.gpi_tolerance)
       << "\ngpi_max_iterations=" << c.optimizer.gpi_max_iterations << '\n';
    return os.str();
}

// ---------------------------------------------------------------- methods

/// One method on one draw: the returned operating point, judged in the
/// model it was optimized for.
struct MethodOutcome {
    double rate = 0.0;
    int iterations = 0;
    std::vector<double> rate_trace;
    double feasibility = 0.0; // worst relative violation
    std::string status = "ok";
};

inline hp::OptimizerConfig hp_config(const OptimizerSettings &o, std::uint64_t seed)
{
    hp::OptimizerConfig c;
    c.max_iterations = o.max_iterations;
    c.tolerance = o.tolerance;
    c.randomization_samples = o.randomization_samples;
    c.seed = seed;
    return c;
}

inline wf::OptimizerConfig wf_config(const OptimizerSettings &o, std::uint64_t seed)
{
    wf::OptimizerConfig c;
    c.max_iterations = o.max_iterations;
    c.tolerance = o.tolerance;
    c.seed = seed;
    c.gpi = {o.gpi_tolerance, o.gpi_max_iterations};
    return c;
}

/// Runs one scheme. Benchmarks use the matched relay budget P_i + P_r.
/// Failures are reported through `status` rather than thrown.
inline MethodOutcome run_method(Scheme scheme, const ChannelSet &ch, const ElementPartition &part,
                                const SystemConfig &cfg, std::uint64_t seed, const OptimizerSettings &o = {})
{
    MethodOutcome out;
    auto take = [&](const bench::BenchmarkResult &b) {
        out.rate = b.rate;
        out.iterations = b.iterations;
        out.rate_trace = b.rate_trace;
        out.feasibility = b.feasibility().worst();
    };
    try {
        switch (scheme) {
        case Scheme::relay_only: take(bench::relay_only(ch, bench::matched_power(cfg))); break;
        case Scheme::passive_unit: take(bench::passive_unit(ch, bench::matched_power(cfg))); break;
        case Scheme::random_phase: {
            Rng rng(seed);
            take(bench::random_phase(ch, bench::matched_power(cfg), rng));
            break;
        }
        case Scheme::passive_opt: take(bench::passive_opt(ch, bench::matched_power(cfg), hp_config(o, seed))); break;
        case Scheme::hp_sdr_fp: {
            const auto r = hp::optimize(ch, part, cfg, hp_config(o, seed));
            out.rate = r.rate_trace.back();
            out.iterations = r.iterations;
            out.rate_trace = r.rate_trace;
            out.feasibility = check_feasibility(r.state, ch, part, cfg).worst();
            break;
        }
        case Scheme::wf_gpi_grr: {
            const auto r = wf::optimize(ch, part, cfg, wf_config(o, seed));
            out.rate = r.rate_trace.back();
            out.iterations = r.iterations;
            out.rate_trace = r.rate_trace;
            out.feasibility = check_feasibility(r.state, ch, part, cfg).worst();
            break;
        }
        }
    } catch (const hp::OptimizationError &e) {
        out.status = std::string("solver-") + sdp::to_string(e.status());
        out.rate_trace = e.partial_trace();
    } catch (const hp::SubproblemFailure &e) {
        out.status = std::string("solver-") + sdp::to_string(e.status());
    } catch (const std::exception &) {
        out.status = "error";
    }
    if (out.status == "ok" && out.feasibility > 1e-6)
        out.status = "infeasible";
    return out;
}

// ---------------------------------------------------------------- sweeps

/// One draw of channels and partition shared by every method of a trial.
struct Draw {
    ChannelSet ch;
    ElementPartition part;
    std::uint64_t seed;
};

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t point, int trial)
{
    return derive_seed(base, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial)});
}

inline Draw draw_trial(const ExperimentConfig &c, const SystemConfig &cfg, std::uint64_t seed)
{
    Rng rng(seed);
    ChannelSet ch = draw_channels(rng, c.geometry, cfg);
    ElementPartition part = ElementPartition::random(cfg.N(), cfg.K(), rng);
    return {std::move(ch), std::move(part), seed};
}

/// FNV-1a over the raw channel entries, to confirm that methods shared a draw.
inline std::uint64_t channel_hash(const ChannelSet &ch)
{
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const cd *p, Eigen::Index n) {
        const auto *bytes = reinterpret_cast<const unsigned char *>(p);
        for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(cd); ++i)
            h = (h ^ bytes[i]) * 1099511628211ULL;
    };
    mix(ch.h_si.data(), ch.h_si.size());
    mix(ch.h_sr.data(), ch.h_sr.size());
    mix(ch.H_ir.data(), ch.H_ir.size());
    mix(ch.h_rd.data(), ch.h_rd.size());
    mix(ch.h_id.data(), ch.h_id.size());
    return h;
}

struct TrialRow {
    SweepParam sweep;
    double value;
    std::uint64_t seed;
    Scheme method;
    double rate;
    int iterations;
    double wall_ms;
    std::string status;
    std::uint64_t channel_hash;
    double feasibility;
};

struct SweepOptions {
    bool timing = false; // real wall times make the CSV run-dependent
};

inline std::vector<TrialRow> run_sweep(const ExperimentConfig &c, const SweepOptions &opts = {})
{
    if (c.values.empty() || c.trials < 1 || c.methods.empty())
        throw ConfigError(0, "sweep needs values, trials >= 1 and at least one method");
    std::vector<TrialRow> rows;
    for (std::size_t p = 0; p < c.values.size(); ++p) {
        const SystemConfig cfg = c.system_at(c.values[p]);
        for (int t = 0; t < c.trials; ++t) {
            const Draw d = draw_trial(c, cfg, trial_seed(c.seed, p, t));
            const std::uint64_t hash = channel_hash(d.ch);
            for (Scheme m : c.methods) {
                const auto start = std::chrono::steady_clock::now();
                const std::uint64_t mseed = derive_seed(d.seed, {static_cast<std::uint64_t>(m) + 1});
                const MethodOutcome o = run_method(m, d.ch, d.part, cfg, mseed, c.optimizer);
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                rows.push_back({c.sweep, c.values[p], d.seed, m, o.rate, o.iterations, opts.timing ? ms : 0.0,
                                o.status, hash, o.feasibility});
            }
        }
    }
    return rows;
}

inline void write_sweep_csv(std::ostream &os, const std::vector<TrialRow> &rows)
{
    os << "sweep_param,value,seed,method,rate_bps_hz,iterations,wall_ms,status\n";
    char buf[128];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof buf, "%.10f", r.rate);
        os << to_string(r.sweep) << ',' << detail::format_double(r.value) << ',' << r.seed << ','
           << bench::to_string(r.method) << ',' << buf << ',' << r.iterations << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
        os << buf << ',' << r.status << '\n';
    }
}

struct PointSummary {
    double value;
    Scheme method;
    double mean;
    double std_error;
    int count; // rows with status ok
};

/// Mean and standard error per (point, method) over the successful rows.
inline std::vector<PointSummary> summarize(const std::vector<TrialRow> &rows)
{
    std::vector<PointSummary> out;
    std::map<std::pair<double, int>, std::vector<double>> groups;
    std::vector<std::pair<double, int>> order;
    for (const auto &r : rows) {
        const auto key = std::make_pair(r.value, static_cast<int>(r.method));
        if (!groups.count(key))
            order.push_back(key);
        if (r.status == "ok")
            groups[key].push_back(r.rate);
        else
            groups[key];
    }
    for (const auto &key : order) {
        const auto &v = groups[key];
        const int n = static_cast<int>(v.size());
        double mean = 0.0, var = 0.0;
        for (double x : v)
            mean += x;
        mean = n ? mean / n : 0.0;
        for (double x : v)
            var += (x - mean) * (x - mean);
        const double se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
        out.push_back({key.first, static_cast<Scheme>(key.second), mean, se, n});
    }
    return out;
}

inline void write_summary_csv(std::ostream &os, SweepParam sweep, const std::vector<PointSummary> &s)
{
    os << "sweep_param,value,method,mean_rate_bps_hz,std_error,trials\n";
    char buf[128];
    for (const auto &p : s) {
        std::snprintf(buf, sizeof buf, "%.10f,%.10f", p.mean, p.std_error);
        os << to_string(sweep) << ',' << detail::format_double(p.value) << ',' << bench::to_string(p.method) << ','
           << buf << ',' << p.count << '\n';
    }
}

struct ConvergenceTrace {
    Scheme method;
    std::vector<double> rates;
    std::string status;
};

/// Best-so-far traces of the two proposed methods on the first draw of the
/// first swept value.
inline std::vector<ConvergenceTrace> run_convergence(const ExperimentConfig &c)
{
    if (c.values.empty())
        throw ConfigError(0, "convergence needs at least one value");
    const SystemConfig cfg = c.system_at(c.values.front());
    const Draw d = draw_trial(c, cfg, trial_seed(c.seed, 0, 0));
    std::vector<ConvergenceTrace> out;
    for (Scheme m : {Scheme::hp_sdr_fp, Scheme::wf_gpi_grr}) {
        const std::uint64_t mseed = derive_seed(d.seed, {static_cast<std::uint64_t>(m) + 1});
        const MethodOutcome o = run_method(m, d.ch, d.part, cfg, mseed, c.optimizer);
        out.push_back({m, o.rate_trace, o.status});
    }
    return out;
}

inline void write_convergence_csv(std::ostream &os, const std::vector<ConvergenceTrace> &traces)
{
    os << "iteration,method,rate_bps_hz\n";
    char buf[64];
    for (const auto &t : traces)
        for (std::size_t i = 0; i < t.rates.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.10f", t.rates[i]);
            os << i << ',' << bench::to_string(t.method) << ',' << buf << '\n';
        }
}

} // namespace hirs::exp

#endif // HIRS_EXPERIMENTS_HPP
