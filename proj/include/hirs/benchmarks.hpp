#ifndef HIRS_BENCHMARKS_HPP
#define HIRS_BENCHMARKS_HPP

// Baselines without active elements, run at the relay budget P_R = P_i + P_r.

#include "hirs/core_model.hpp"
#include "hirs/hp_sdr_fp.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace hirs::bench {

enum class Scheme { relay_only, passive_unit, passive_opt, random_phase, hp_sdr_fp, wf_gpi_grr };

inline constexpr std::array<Scheme, 6> kAllSchemes{Scheme::relay_only,   Scheme::passive_unit, Scheme::passive_opt,
                                                   Scheme::random_phase, Scheme::hp_sdr_fp,    Scheme::wf_gpi_grr};

inline const char *to_string(Scheme s)
{
    switch (s) {
    case Scheme::relay_only: return "relay_only";
    case Scheme::passive_unit: return "passive_unit";
    case Scheme::passive_opt: return "passive_opt";
    case Scheme::random_phase: return "random_phase";
    case Scheme::hp_sdr_fp: return "hp_sdr_fp";
    case Scheme::wf_gpi_grr: return "wf_gpi_grr";
    }
    return "unknown";
}

inline std::optional<Scheme> parse_scheme(std::string_view name)
{
    for (Scheme s : kAllSchemes)
        if (name == to_string(s))
            return s;
    return std::nullopt;
}

/// Benchmark link budget: relay power P_i + P_r (linear sum), no active elements.
inline SystemConfig matched_power(const SystemConfig &cfg)
{
    return cfg.with_relay_power(cfg.Pi() + cfg.Pr()).with_active_count(0);
}

/// A benchmark's operating point together with the model it is evaluated in.
struct BenchmarkResult {
    NetworkState state;
    ChannelSet channels; // IRS links zeroed for relay_only
    ElementPartition part;
    SystemConfig cfg;
    double rate = 0.0;
    int iterations = 0;
    std::vector<double> rate_trace;

    FeasibilityReport feasibility() const { return check_feasibility(state, channels, part, cfg); }
};

class ZeroChannel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline ChannelSet without_irs(const ChannelSet &ch)
{
    ChannelSet out = ch;
    out.h_si.setZero();
    out.H_ir.setZero();
    out.h_id.setZero();
    return out;
}

inline BenchmarkResult finish(NetworkState s, ChannelSet ch, const SystemConfig &cfg)
{
    ElementPartition part = ElementPartition::all_passive(ch.N());
    const double rate = achievable_rate(evaluate_snr(s, ch, part, cfg));
    return {std::move(s), std::move(ch), std::move(part), cfg, rate, 0, {rate}};
}

/// Closed-form relay matrix for fixed passive phases.
inline NetworkState mrc_mrt_state(const ChannelSet &ch, const ComplexVector &theta1, const ComplexVector &theta2,
                                  const SystemConfig &cfg)
{
    NetworkState s{ComplexMatrix::Zero(ch.M(), ch.M()), theta1, theta2};
    const ElementPartition part = ElementPartition::all_passive(ch.N());
    if (!(effective_source_channel(ch, theta1).norm() > 0.0) ||
        !(effective_destination_channel(ch, theta2).norm() > 0.0))
        throw ZeroChannel("benchmark: zero effective channel");
    s.A = hp::mrc_mrt_relay(ch, s, part, cfg);
    return s;
}

} // namespace detail

/// MRC-MRT relay with no surface: A = sqrt(gamma_R / (gamma_s ||G h_sr||^2 + ||G||_F^2)) G,
/// G = h_rd h_sr^H / (||h_rd|| ||h_sr||). `cfg_r` carries P_R as its relay power.
inline BenchmarkResult relay_only(const ChannelSet &ch, const SystemConfig &cfg_r)
{
    const double nr = ch.h_rd.norm(), ns = ch.h_sr.norm();
    if (!(nr > 0.0) || !(ns > 0.0))
        throw ZeroChannel("relay_only: zero relay channel");
    const ComplexMatrix gamma = ch.h_rd * ch.h_sr.adjoint() / (nr * ns);
    const double denom = cfg_r.gamma_s() * (gamma * ch.h_sr).squaredNorm() + gamma.squaredNorm();
    const int n = ch.N();
    NetworkState s{std::sqrt(cfg_r.gamma_r() / denom) * gamma, ComplexVector::Ones(n), ComplexVector::Ones(n)};
    return detail::finish(std::move(s), detail::without_irs(ch), cfg_r);
}

enum class RelayMethod { closed_form, sdp };

/// Fixed passive phases, relay matrix optimized. The SDP path starts from
/// A = 0 so it does not lean on the closed form.
inline BenchmarkResult fixed_phase_relay(const ChannelSet &ch, const ComplexVector &theta1,
                                         const ComplexVector &theta2, const SystemConfig &cfg_r, RelayMethod method,
                                         const hp::OptimizerConfig &opt = {})
{
    if (method == RelayMethod::closed_form)
        return detail::finish(detail::mrc_mrt_state(ch, theta1, theta2, cfg_r), ch, cfg_r);
    NetworkState s{ComplexMatrix::Zero(ch.M(), ch.M()), theta1, theta2};
    const ElementPartition part = ElementPartition::all_passive(ch.N());
    Rng rng(derive_seed(opt.seed, {0}));
    s = hp::solve_relay(hp::build_relay_subproblem(ch, s, part, cfg_r), s, opt, rng).state;
    return detail::finish(std::move(s), ch, cfg_r);
}

/// Every reflecting coefficient set to 1.
inline BenchmarkResult passive_unit(const ChannelSet &ch, const SystemConfig &cfg_r,
                                    RelayMethod method = RelayMethod::closed_form, const hp::OptimizerConfig &opt = {})
{
    const ComplexVector ones = ComplexVector::Ones(ch.N());
    return fixed_phase_relay(ch, ones, ones, cfg_r, method, opt);
}

/// Phases drawn uniformly on the circle for both slots.
template <typename R>
BenchmarkResult random_phase(const ChannelSet &ch, const SystemConfig &cfg_r, R &rng,
                             RelayMethod method = RelayMethod::closed_form, const hp::OptimizerConfig &opt = {})
{
    const ComplexVector t1 = random_unit_phases(rng, ch.N());
    const ComplexVector t2 = random_unit_phases(rng, ch.N());
    return fixed_phase_relay(ch, t1, t2, cfg_r, method, opt);
}

/// Fully passive surface with phases optimized by the SDR alternation.
inline BenchmarkResult passive_opt(const ChannelSet &ch, const SystemConfig &cfg_r, const hp::OptimizerConfig &opt = {})
{
    const SystemConfig cfg = cfg_r.with_active_count(0);
    const ElementPartition part = ElementPartition::all_passive(ch.N());
    const hp::OptimizeResult r = hp::optimize(ch, part, cfg, opt);
    BenchmarkResult out = detail::finish(r.state, ch, cfg);
    out.iterations = r.iterations;
    out.rate_trace = r.rate_trace;
    return out;
}

} // namespace hirs::bench

#endif // HIRS_BENCHMARKS_HPP
