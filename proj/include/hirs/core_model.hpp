#ifndef HIRS_CORE_MODEL_HPP
#define HIRS_CORE_MODEL_HPP

// Physical configuration, channel draws, reflecting-coefficient structure and
// the end-to-end SNR / power expressions of the hybrid IRS-aided two-slot
// amplify-and-forward link.

#include "hirs/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace hirs {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Link budget. Powers are stored in watts; the gamma_* ratios are P / sigma2.
class SystemConfig {
public:
    SystemConfig(int m, int n, int k, double ps_w, double pr_w, double pi_w, double sigma2_w)
        : m_(m), n_(n), k_(k), ps_(ps_w), pr_(pr_w), pi_(pi_w), sigma2_(sigma2_w)
    {
        if (m < 1 || n < 1)
            throw std::invalid_argument("SystemConfig: M and N must be >= 1");
        if (k < 0 || k > n)
            throw std::invalid_argument("SystemConfig: K must satisfy 0 <= K <= N");
        if (!(ps_w > 0.0 && pr_w > 0.0 && pi_w > 0.0 && sigma2_w > 0.0))
            throw std::invalid_argument("SystemConfig: powers must be positive");
    }

    static SystemConfig from_dbm(int m, int n, int k, double ps_dbm, double pr_dbm, double pi_dbm,
                                 double sigma2_dbm = -80.0)
    {
        return {m, n, k, dbm_to_watts(ps_dbm), dbm_to_watts(pr_dbm), dbm_to_watts(pi_dbm),
                dbm_to_watts(sigma2_dbm)};
    }

    int M() const { return m_; }
    int N() const { return n_; }
    int K() const { return k_; }
    double Ps() const { return ps_; }
    double Pr() const { return pr_; }
    double Pi() const { return pi_; }
    double sigma2() const { return sigma2_; }
    double gamma_s() const { return ps_ / sigma2_; }
    double gamma_r() const { return pr_ / sigma2_; }
    double gamma_i() const { return pi_ / sigma2_; }

    SystemConfig with_relay_power(double pr_w) const { return {m_, n_, k_, ps_, pr_w, pi_, sigma2_}; }
    SystemConfig with_active_count(int k) const { return {m_, n_, k, ps_, pr_, pi_, sigma2_}; }

private:
    int m_, n_, k_;
    double ps_, pr_, pi_, sigma2_;
};

using Point3 = std::array<double, 3>;

inline double distance(const Point3 &a, const Point3 &b)
{
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline constexpr double kReferencePathLossDb = -30.0;
inline constexpr double kReferenceDistance = 1.0;

/// Log-distance path loss in dB (negative: a gain).
inline double path_loss_db(double d, double alpha)
{
    if (!(d > 0.0))
        throw std::domain_error("path_loss_db: distance must be positive");
    return kReferencePathLossDb - 10.0 * alpha * std::log10(d / kReferenceDistance);
}

/// Linear power gains of the five links.
struct LinkGains {
    double si = 0.0, sr = 0.0, ir = 0.0, rd = 0.0, id = 0.0;
};

struct Geometry {
    Point3 source{0.0, 0.0, 0.0};
    Point3 destination{0.0, 100.0, 0.0};
    Point3 irs{-10.0, 50.0, 20.0};
    Point3 relay{10.0, 50.0, 10.0};
    double alpha_si = 2.0, alpha_ir = 2.0, alpha_id = 2.0;
    double alpha_sr = 3.0, alpha_rd = 3.0;

    void validate() const
    {
        for (double a : {alpha_si, alpha_ir, alpha_id, alpha_sr, alpha_rd})
            if (!(a > 0.0))
                throw std::invalid_argument("Geometry: path-loss exponents must be positive");
        const std::array<Point3, 4> pts{source, destination, irs, relay};
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                if (!(distance(pts[i], pts[j]) > 0.0))
                    throw std::invalid_argument("Geometry: nodes must be at distinct positions");
    }

    LinkGains gains() const
    {
        validate();
        auto g = [](const Point3 &a, const Point3 &b, double alpha) {
            return db_to_linear(path_loss_db(distance(a, b), alpha));
        };
        return {g(source, irs, alpha_si), g(source, relay, alpha_sr), g(irs, relay, alpha_ir),
                g(relay, destination, alpha_rd), g(irs, destination, alpha_id)};
    }
};

/// Active/passive split of the N elements (the diagonal of E_K).
class ElementPartition {
public:
    explicit ElementPartition(std::vector<bool> active) : active_(std::move(active))
    {
        k_ = static_cast<int>(std::count(active_.begin(), active_.end(), true));
    }

    static ElementPartition all_passive(int n) { return ElementPartition(std::vector<bool>(n, false)); }

    /// K elements chosen uniformly without replacement.
    template <typename Rng>
    static ElementPartition random(int n, int k, Rng &rng)
    {
        if (k < 0 || k > n)
            throw std::invalid_argument("ElementPartition: K must satisfy 0 <= K <= N");
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<bool> mask(n, false);
        for (int i = 0; i < k; ++i)
            mask[idx[i]] = true;
        return ElementPartition(std::move(mask));
    }

    int N() const { return static_cast<int>(active_.size()); }
    int K() const { return k_; }
    bool active(int i) const { return active_[i]; }
    const std::vector<bool> &mask() const { return active_; }

    /// Diagonal of E_K as reals.
    RealVector active_diag() const
    {
        RealVector d(N());
        for (int i = 0; i < N(); ++i)
            d(i) = active_[i] ? 1.0 : 0.0;
        return d;
    }
    RealVector passive_diag() const { return RealVector::Ones(N()) - active_diag(); }

    std::vector<int> passive_indices() const
    {
        std::vector<int> out;
        for (int i = 0; i < N(); ++i)
            if (!active_[i])
                out.push_back(i);
        return out;
    }

private:
    std::vector<bool> active_;
    int k_ = 0;
};

/// One realization of the five channel blocks.
struct ChannelSet {
    ComplexVector h_si;  // S -> IRS, N
    ComplexVector h_sr;  // S -> relay, M
    ComplexMatrix H_ir;  // IRS -> relay, M x N (H_ir^H is relay -> IRS)
    ComplexVector h_rd;  // relay -> D, M (used as h_rd^H)
    ComplexVector h_id;  // IRS -> D, N (used as h_id^H)
    LinkGains gains;

    int M() const { return static_cast<int>(h_sr.size()); }
    int N() const { return static_cast<int>(h_si.size()); }

    void validate() const
    {
        const auto m = h_sr.size(), n = h_si.size();
        if (h_rd.size() != m || h_id.size() != n || H_ir.rows() != m || H_ir.cols() != n)
            throw DimensionError("ChannelSet: inconsistent block dimensions");
        if (!h_si.allFinite() || !h_sr.allFinite() || !H_ir.allFinite() || !h_rd.allFinite() ||
            !h_id.allFinite())
            throw std::domain_error("ChannelSet: non-finite entry");
    }
};

/// Circularly-symmetric complex Gaussian sample with E|z|^2 = variance.
template <typename Rng>
cd complex_gaussian(Rng &rng, double variance)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

template <typename Rng>
ComplexMatrix complex_gaussian_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols, double variance)
{
    ComplexMatrix out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            out(r, c) = complex_gaussian(rng, variance);
    return out;
}

/// Rayleigh draw: every entry CN(0, linear path-loss gain of its link).
template <typename Rng>
ChannelSet draw_channels(Rng &rng, const Geometry &geometry, const SystemConfig &cfg)
{
    const LinkGains g = geometry.gains();
    ChannelSet ch;
    ch.gains = g;
    ch.h_si = complex_gaussian_matrix(rng, cfg.N(), 1, g.si).col(0);
    ch.h_sr = complex_gaussian_matrix(rng, cfg.M(), 1, g.sr).col(0);
    ch.H_ir = complex_gaussian_matrix(rng, cfg.M(), cfg.N(), g.ir);
    ch.h_rd = complex_gaussian_matrix(rng, cfg.M(), 1, g.rd).col(0);
    ch.h_id = complex_gaussian_matrix(rng, cfg.N(), 1, g.id).col(0);
    return ch;
}

/// Decision variables. theta1/theta2 hold the diagonals of Theta_1 and Theta_2,
/// so the matrices are diagonal by construction.
struct NetworkState {
    ComplexMatrix A;
    ComplexVector theta1;
    ComplexVector theta2;
};

template <typename Rng>
ComplexVector random_unit_phases(Rng &rng, int n)
{
    std::uniform_real_distribution<double> ud(0.0, 2.0 * M_PI);
    ComplexVector out(n);
    for (int i = 0; i < n; ++i)
        out(i) = std::polar(1.0, ud(rng));
    return out;
}

namespace detail {

inline void check_dims(const NetworkState &s, const ChannelSet &ch, const ElementPartition &part)
{
    const auto m = ch.M(), n = ch.N();
    if (s.A.rows() != m || s.A.cols() != m || s.theta1.size() != n || s.theta2.size() != n ||
        part.N() != n)
        throw DimensionError("NetworkState, ChannelSet and ElementPartition disagree on (M, N)");
}

} // namespace detail

/// h_sr + H_ir Theta_1 h_si.
inline ComplexVector effective_source_channel(const ChannelSet &ch, const ComplexVector &theta1)
{
    return ch.h_sr + ch.H_ir * theta1.cwiseProduct(ch.h_si);
}

/// w with w^H = h_rd^H + h_id^H Theta_2 H_ir^H.
inline ComplexVector effective_destination_channel(const ChannelSet &ch, const ComplexVector &theta2)
{
    return ch.h_rd + ch.H_ir * theta2.conjugate().cwiseProduct(ch.h_id);
}

/// The four terms of the end-to-end SNR: numerator and the three noise
/// contributions (IRS slot-1 noise, relay noise, IRS slot-2 noise). The
/// destination noise contributes the trailing +1.
struct SnrTerms {
    double signal = 0.0;
    double irs1_noise = 0.0;
    double relay_noise = 0.0;
    double irs2_noise = 0.0;

    double snr() const { return signal / (irs1_noise + relay_noise + irs2_noise + 1.0); }
};

inline SnrTerms snr_terms(const NetworkState &s, const ChannelSet &ch, const ElementPartition &part,
                          const SystemConfig &cfg)
{
    detail::check_dims(s, ch, part);
    const RealVector ek = part.active_diag();
    const ComplexVector u = effective_source_channel(ch, s.theta1);
    const ComplexVector w = effective_destination_channel(ch, s.theta2);
    const Eigen::RowVectorXcd wA = w.adjoint() * s.A;
    SnrTerms t;
    t.signal = cfg.gamma_s() * std::norm((wA * u).value());
    const ComplexVector active1 = ek.cast<cd>().cwiseProduct(s.theta1);
    t.irs1_noise = (wA * ch.H_ir * active1.asDiagonal()).squaredNorm();
    t.relay_noise = wA.squaredNorm();
    t.irs2_noise = ch.h_id.cwiseProduct(ek.cast<cd>()).cwiseProduct(s.theta2).squaredNorm();
    return t;
}

/// End-to-end SNR at the destination.
inline double evaluate_snr(const NetworkState &s, const ChannelSet &ch, const ElementPartition &part,
                           const SystemConfig &cfg)
{
    return snr_terms(s, ch, part, cfg).snr();
}

/// Half-duplex rate, bits/s/Hz.
inline double achievable_rate(double snr)
{
    if (snr < 0.0)
        throw std::domain_error("achievable_rate: negative SNR");
    return 0.5 * std::log2(1.0 + snr);
}

/// Active-element power in slot 1, normalized by sigma^2 (feasible iff <= gamma_i).
inline double power_irs_slot1(const NetworkState &s, const ChannelSet &ch, const ElementPartition &part,
                              const SystemConfig &cfg)
{
    detail::check_dims(s, ch, part);
    const ComplexVector active = part.active_diag().cast<cd>().cwiseProduct(s.theta1);
    return cfg.gamma_s() * active.cwiseProduct(ch.h_si).squaredNorm() + active.squaredNorm();
}

/// Relay transmit power, normalized by sigma^2 (feasible iff <= gamma_r).
inline double power_relay(const NetworkState &s, const ChannelSet &ch, const ElementPartition &part,
                          const SystemConfig &cfg)
{
    detail::check_dims(s, ch, part);
    const ComplexVector u = effective_source_channel(ch, s.theta1);
    const ComplexVector active = part.active_diag().cast<cd>().cwiseProduct(s.theta1);
    return cfg.gamma_s() * (s.A * u).squaredNorm() +
           (s.A * ch.H_ir * active.asDiagonal()).squaredNorm() + s.A.squaredNorm();
}

/// Active-element power in slot 2, normalized by sigma^2 (feasible iff <= gamma_i).
inline double power_irs_slot2(const NetworkState &s, const ChannelSet &ch, const ElementPartition &part,
                              const SystemConfig &cfg)
{
    detail::check_dims(s, ch, part);
    const RealVector ek = part.active_diag();
    const ComplexVector active1 = ek.cast<cd>().cwiseProduct(s.theta1);
    const ComplexVector active2 = ek.cast<cd>().cwiseProduct(s.theta2);
    // R = E_K Theta_2 H_ir^H
    const ComplexMatrix R = active2.asDiagonal() * ch.H_ir.adjoint();
    const ComplexVector u = effective_source_channel(ch, s.theta1);
    return cfg.gamma_s() * (R * s.A * u).squaredNorm() +
           (R * s.A * ch.H_ir * active1.asDiagonal()).squaredNorm() + (R * s.A).squaredNorm() +
           active2.squaredNorm();
}

/// Largest relative violation of the three power caps and the passive
/// unit-modulus constraint; <= tol means feasible.
struct FeasibilityReport {
    double slot1 = 0.0, relay = 0.0, slot2 = 0.0, unit_modulus = 0.0;
    double worst() const { return std::max({slot1, relay, slot2, unit_modulus}); }
};

inline FeasibilityReport check_feasibility(const NetworkState &s, const ChannelSet &ch,
                                           const ElementPartition &part, const SystemConfig &cfg)
{
    auto excess = [](double value, double cap) { return std::max(0.0, value / cap - 1.0); };
    FeasibilityReport r;
    r.slot1 = excess(power_irs_slot1(s, ch, part, cfg), cfg.gamma_i());
    r.relay = excess(power_relay(s, ch, part, cfg), cfg.gamma_r());
    r.slot2 = excess(power_irs_slot2(s, ch, part, cfg), cfg.gamma_i());
    for (int i = 0; i < part.N(); ++i) {
        if (part.active(i))
            continue;
        r.unit_modulus = std::max({r.unit_modulus, std::abs(std::abs(s.theta1(i)) - 1.0),
                                   std::abs(std::abs(s.theta2(i)) - 1.0)});
    }
    return r;
}

enum class Slot { first, second };

/// Largest c in [0, 1] such that multiplying the active entries of the chosen
/// slot's coefficients by c satisfies all three power caps. Every power is a
/// convex quadratic in c, recovered exactly from three evaluations. Returns a
/// negative value when even c = 0 violates a cap.
inline double max_active_scale(const NetworkState &s, const ChannelSet &ch, const ElementPartition &part,
                               const SystemConfig &cfg, Slot slot)
{
    auto scaled = [&](double c) {
        NetworkState t = s;
        ComplexVector &theta = slot == Slot::first ? t.theta1 : t.theta2;
        for (int i = 0; i < part.N(); ++i)
            if (part.active(i))
                theta(i) *= c;
        return t;
    };
    const std::array<double, 3> points{-1.0, 0.0, 1.0};
    std::array<std::array<double, 3>, 3> f{}; // [cap][point]
    for (int k = 0; k < 3; ++k) {
        const NetworkState t = scaled(points[k]);
        f[0][k] = power_irs_slot1(t, ch, part, cfg);
        f[1][k] = power_relay(t, ch, part, cfg);
        f[2][k] = power_irs_slot2(t, ch, part, cfg);
    }
    const std::array<double, 3> caps{cfg.gamma_i(), cfg.gamma_r(), cfg.gamma_i()};
    double lo = 0.0, hi = 1.0;
    for (int j = 0; j < 3; ++j) {
        const double a = std::max(0.0, 0.5 * (f[j][2] + f[j][0]) - f[j][1]);
        const double b = 0.5 * (f[j][2] - f[j][0]);
        const double d = f[j][1] - caps[j];
        // Caps that do not move with c only need to hold to rounding.
        if (a + std::abs(b) <= 1e-14 * caps[j]) {
            if (f[j][1] > caps[j] * (1.0 + 1e-10))
                return -1.0;
            continue;
        }
        // feasible set of a c^2 + b c + d <= 0
        if (a <= 1e-300 * std::max(1.0, std::abs(b))) {
            if (b > 0.0)
                hi = std::min(hi, -d / b);
            else
                lo = std::max(lo, -d / b);
            continue;
        }
        const double disc = b * b - 4.0 * a * d;
        if (disc < 0.0)
            return -1.0;
        const double sq = std::sqrt(disc);
        // numerically stable roots
        const double qv = -0.5 * (b + std::copysign(sq, b));
        double r1 = qv / a, r2 = (qv != 0.0) ? d / qv : 0.0;
        if (r1 > r2)
            std::swap(r1, r2);
        lo = std::max(lo, r1);
        hi = std::min(hi, r2);
    }
    if (lo > hi)
        return -1.0;
    return hi;
}

/// Multiplies the active entries of one slot's coefficients by c.
inline void scale_active(NetworkState &s, const ElementPartition &part, Slot slot, double c)
{
    ComplexVector &theta = slot == Slot::first ? s.theta1 : s.theta2;
    for (int i = 0; i < part.N(); ++i)
        if (part.active(i))
            theta(i) *= c;
}

} // namespace hirs

#endif // HIRS_CORE_MODEL_HPP
