#ifndef HIRS_WF_GPI_GRR_HPP
#define HIRS_WF_GPI_GRR_HPP

// Low-complexity optimizer: one common amplitude per slot for the active
// elements, a whitening filter for the colored relay noise, an MRC-MRT relay
// beamformer, generalized power iteration for the slot-1 phases and a
// generalized Rayleigh quotient for the slot-2 phases.

#include "hirs/core_model.hpp"
#include "hirs/numerics.hpp"
#include "hirs/seeding.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hirs::wf {

struct AmplifyingCoefficients {
    double beta1 = 0.0;
    double beta2 = 0.0;
    bool degenerate = false; // K = 0: the surface is fully passive
};

/// Common slot-1 amplitude from the large-N power budget
/// P_i = K beta1^2 (P_s PL_si lambda_si + sigma^2).
inline double amp_coeff_slot1(double pi_w, double ps_w, double sigma2_w, int k, double pl_si,
                              double lambda_si = 1.0)
{
    if (pi_w < 0.0 || ps_w < 0.0 || !(sigma2_w > 0.0) || pl_si < 0.0 || lambda_si < 0.0 || k < 0)
        throw std::invalid_argument("amp_coeff_slot1: negative input");
    if (k == 0 || pi_w == 0.0)
        return 0.0;
    return std::sqrt(pi_w / (k * ps_w * pl_si * lambda_si + k * sigma2_w));
}

/// Common slot-2 amplitude from P_i = K M beta2^2 P_r PL_ri lambda_ri + beta2^2 sigma^2.
inline double amp_coeff_slot2(double pi_w, double pr_w, double sigma2_w, int k, int m, double pl_ri,
                              double lambda_ri = 1.0)
{
    if (pi_w < 0.0 || pr_w < 0.0 || !(sigma2_w > 0.0) || pl_ri < 0.0 || lambda_ri < 0.0 || k < 0 || m < 1)
        throw std::invalid_argument("amp_coeff_slot2: negative input");
    if (k == 0 || pi_w == 0.0)
        return 0.0;
    return std::sqrt(pi_w / (k * m * pr_w * pl_ri * lambda_ri + sigma2_w));
}

inline AmplifyingCoefficients amp_coefficients(const SystemConfig &cfg, const ElementPartition &part,
                                               const LinkGains &gains, double lambda_si = 1.0,
                                               double lambda_ri = 1.0)
{
    AmplifyingCoefficients out;
    out.degenerate = part.K() == 0;
    out.beta1 = amp_coeff_slot1(cfg.Pi(), cfg.Ps(), cfg.sigma2(), part.K(), gains.si, lambda_si);
    out.beta2 = amp_coeff_slot2(cfg.Pi(), cfg.Pr(), cfg.sigma2(), part.K(), cfg.M(), gains.ir, lambda_ri);
    return out;
}

struct Whitening {
    ComplexMatrix C; // covariance of the slot-1 noise seen at the relay
    ComplexMatrix W; // C^{-1/2}
};

inline Whitening whitening_matrix(const ChannelSet &ch, const ElementPartition &part, const ComplexVector &theta_hat1,
                                  double beta1, double sigma2)
{
    if (theta_hat1.size() != ch.N() || part.N() != ch.N())
        throw DimensionError("whitening_matrix: dimension mismatch");
    const ComplexMatrix G = ch.H_ir * part.active_diag().cast<cd>().cwiseProduct(theta_hat1).asDiagonal();
    Whitening out;
    out.C = beta1 * beta1 * sigma2 * G * G.adjoint() + sigma2 * ComplexMatrix::Identity(ch.M(), ch.M());
    out.C = numerics::hermitian_part(out.C);
    out.W = numerics::inv_sqrt_hermitian(out.C);
    return out;
}

/// Coefficients (E_bar + beta E_K) theta_hat.
inline ComplexVector assemble_coefficients(const ComplexVector &theta_hat, const ElementPartition &part, double beta)
{
    ComplexVector out = theta_hat;
    for (int i = 0; i < part.N(); ++i)
        if (part.active(i))
            out(i) *= beta;
    return out;
}

/// Phase-only iterate together with the relay matrix applied after whitening.
struct PhaseState {
    ComplexMatrix A; // acts on the whitened relay signal
    ComplexVector theta_hat1;
    ComplexVector theta_hat2;
};

/// Physical state: relay matrix A W and amplitude-scaled coefficients.
inline NetworkState assemble_state(const PhaseState &s, const ElementPartition &part, double beta1, double beta2,
                                   const ComplexMatrix &W)
{
    return {s.A * W, assemble_coefficients(s.theta_hat1, part, beta1),
            assemble_coefficients(s.theta_hat2, part, beta2)};
}

class DegenerateChannel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// MRC-MRT relay matrix for the whitened model, scaled so the relay power
/// equals gamma_r.
inline ComplexMatrix relay_beamformer_mrcmrt(const ChannelSet &ch, const ElementPartition &part,
                                             const ComplexVector &theta_hat1, const ComplexVector &theta_hat2,
                                             double beta1, double beta2, const ComplexMatrix &W,
                                             const SystemConfig &cfg)
{
    const ComplexVector theta1 = assemble_coefficients(theta_hat1, part, beta1);
    const ComplexVector theta2 = assemble_coefficients(theta_hat2, part, beta2);
    const ComplexVector w = effective_destination_channel(ch, theta2);
    const ComplexVector wu = W * effective_source_channel(ch, theta1);
    const double nw = w.norm(), nu = wu.norm();
    if (!(nw > 0.0) || !(nu > 0.0))
        throw DegenerateChannel("relay_beamformer_mrcmrt: zero effective channel");
    const ComplexMatrix upsilon = (w / nw) * (wu / nu).adjoint();
    const NetworkState probe{upsilon * W, theta1, theta2};
    const double denom = power_relay(probe, ch, part, cfg);
    return std::sqrt(cfg.gamma_r() / denom) * upsilon;
}

/// End-to-end SNR of the whitened model.
inline double whitened_snr(const PhaseState &s, const ChannelSet &ch, const ElementPartition &part,
                           const SystemConfig &cfg, double beta1, double beta2, const ComplexMatrix &W)
{
    return evaluate_snr(assemble_state(s, part, beta1, beta2, W), ch, part, cfg);
}

struct GpiConfig {
    double tolerance = 1e-6;
    int max_iterations = 100;

    void validate() const
    {
        if (!(tolerance > 0.0) || max_iterations < 1)
            throw std::invalid_argument("GpiConfig: need tolerance > 0 and max_iterations >= 1");
    }
};

/// Slot-1 fraction in v = [theta_hat1; 1].
struct Theta1Fraction {
    ComplexMatrix F1, F2;
};

inline Theta1Fraction build_theta1_fraction(const ChannelSet &ch, const PhaseState &s, const ElementPartition &part,
                                            const SystemConfig &cfg, double beta1, double beta2,
                                            const ComplexMatrix &W)
{
    const int n = ch.N(), m = ch.M();
    const RealVector ek = part.active_diag();
    const ComplexVector theta2 = assemble_coefficients(s.theta_hat2, part, beta2);
    const ComplexVector w = effective_destination_channel(ch, theta2);
    const ComplexVector h_rid = (s.A * W).adjoint() * w;
    ComplexMatrix H_sir(m, n + 1);
    H_sir.leftCols(n) = ch.H_ir * assemble_coefficients(ch.h_si, part, beta1).asDiagonal();
    H_sir.col(n) = ch.h_sr;

    Theta1Fraction f;
    const ComplexVector g = H_sir.adjoint() * h_rid;
    f.F1 = cfg.gamma_s() * g * g.adjoint();
    f.F2 = ComplexMatrix::Zero(n + 1, n + 1);
    const ComplexVector q = ch.H_ir.adjoint() * h_rid;
    for (int i = 0; i < n; ++i)
        f.F2(i, i) = ek(i) * beta1 * beta1 * std::norm(q(i));
    f.F2(n, n) = h_rid.squaredNorm() + beta2 * beta2 * ch.h_id.cwiseProduct(ek.cast<cd>()).squaredNorm() + 1.0;
    return f;
}

/// Slot-2 fraction in v = [conj(theta_hat2); 1].
struct Theta2Fraction {
    ComplexMatrix H1, H2;
};

inline Theta2Fraction build_theta2_fraction(const ChannelSet &ch, const PhaseState &s, const ElementPartition &part,
                                            const SystemConfig &cfg, double beta1, double beta2,
                                            const ComplexMatrix &W)
{
    const int n = ch.N(), m = ch.M();
    const RealVector ek = part.active_diag();
    const ComplexVector theta1 = assemble_coefficients(s.theta_hat1, part, beta1);
    const ComplexVector u = effective_source_channel(ch, theta1);
    const ComplexMatrix G = ch.H_ir * part.active_diag().cast<cd>().cwiseProduct(s.theta_hat1).asDiagonal();

    ComplexMatrix H_rid(n + 1, m);
    H_rid.topRows(n) = assemble_coefficients(ch.h_id, part, beta2).conjugate().asDiagonal() * ch.H_ir.adjoint();
    H_rid.row(n) = ch.h_rd.adjoint();
    const ComplexMatrix HAW = H_rid * s.A * W;

    Theta2Fraction f;
    const ComplexVector h = HAW * u;
    f.H1 = cfg.gamma_s() * h * h.adjoint();
    f.H2 = HAW * (beta1 * beta1 * G * G.adjoint() + ComplexMatrix::Identity(m, m)) * HAW.adjoint();
    for (int i = 0; i < n; ++i)
        f.H2(i, i) += ek(i) * beta2 * beta2 * std::norm(ch.h_id(i));
    f.H2(n, n) += 1.0;
    f.H2 = numerics::hermitian_part(f.H2);
    return f;
}

/// Unit-modulus coefficients e^{j arg(v_i / v_{N+1})}, conjugated if asked.
inline ComplexVector project_phases(const ComplexVector &v, bool conjugate)
{
    const Eigen::Index n = v.size() - 1;
    ComplexVector out(n);
    const cd ref = v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = std::arg(v(i) * std::conj(ref));
        out(i) = std::polar(1.0, conjugate ? -a : a);
    }
    return out;
}

struct GpiResult {
    ComplexVector v;          // unit-norm relaxed solution
    ComplexVector theta_hat1; // projected phases
    int iterations = 0;
    bool converged = false;
    bool used_pseudo_inverse = false;
    double max_quotient_drop = 0.0; // largest decrease of the relaxed quotient
};

/// Generalized power iteration for max (v^H F1 v)/(v^H F2 v) on the sphere.
inline GpiResult gpi(const ComplexMatrix &F1, const ComplexMatrix &F2, const GpiConfig &cfg,
                     ComplexVector v0 = ComplexVector())
{
    cfg.validate();
    const Eigen::Index d = F1.rows();
    if (v0.size() == 0)
        v0 = ComplexVector::Constant(d, cd(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
    GpiResult r;
    ComplexVector v = v0.normalized();
    const ComplexMatrix I = ComplexMatrix::Identity(d, d);
    auto quotient = [&](const ComplexVector &x) {
        const double den = x.dot(F2 * x).real();
        return den > 0.0 ? x.dot(F1 * x).real() / den : std::numeric_limits<double>::infinity();
    };
    double q = quotient(v);
    for (int t = 1; t <= cfg.max_iterations; ++t) {
        const double vv = v.squaredNorm();
        const ComplexMatrix omega = v.dot(F1 * v).real() * I + vv * F1;
        const ComplexMatrix xi = v.dot(F2 * v).real() * I + vv * F2;
        ComplexVector y;
        Eigen::LLT<ComplexMatrix> llt(numerics::hermitian_part(xi));
        const RealVector dl = llt.matrixL().toDenseMatrix().diagonal().real();
        if (llt.info() == Eigen::Success && dl.minCoeff() > 1e-7 * dl.maxCoeff()) {
            y = llt.solve(omega * v);
        } else {
            r.used_pseudo_inverse = true;
            y = Eigen::CompleteOrthogonalDecomposition<ComplexMatrix>(xi).pseudoInverse() * (omega * v);
        }
        if (!(y.norm() > 0.0) || !y.allFinite())
            break;
        const ComplexVector next = y.normalized();
        const double qn = quotient(next);
        if (std::isfinite(q) && std::isfinite(qn))
            r.max_quotient_drop = std::max(r.max_quotient_drop, (q - qn) / std::max(std::abs(q), 1e-300));
        const double step = (next - v).norm();
        v = next;
        q = qn;
        r.iterations = t;
        if (step <= cfg.tolerance) {
            r.converged = true;
            break;
        }
    }
    r.v = v;
    return r;
}

inline GpiResult gpi_theta1(const ChannelSet &ch, const PhaseState &s, const ElementPartition &part,
                            const SystemConfig &cfg, double beta1, double beta2, const ComplexMatrix &W,
                            const GpiConfig &gcfg = {})
{
    const Theta1Fraction f = build_theta1_fraction(ch, s, part, cfg, beta1, beta2, W);
    GpiResult r = gpi(f.F1, f.F2, gcfg);
    r.theta_hat1 = project_phases(r.v, false);
    return r;
}

/// Denominator with its noise constant 1 moved from the corner to 1/(N+1) on
/// every diagonal entry. Equal to H2 on unit-modulus vectors, and positive
/// definite where H2 itself has rank at most M + K + 1.
inline ComplexMatrix spread_corner(const ComplexMatrix &H2)
{
    const Eigen::Index n = H2.rows() - 1;
    ComplexMatrix out = H2;
    out(n, n) -= 1.0;
    out.diagonal().array() += 1.0 / static_cast<double>(n + 1);
    return out;
}

struct GrrResult {
    ComplexVector v;
    ComplexVector theta_hat2;
    double quotient = 0.0; // lambda_max of the relaxed pair
};

inline GrrResult grr_theta2(const ChannelSet &ch, const PhaseState &s, const ElementPartition &part,
                            const SystemConfig &cfg, double beta1, double beta2, const ComplexMatrix &W)
{
    const Theta2Fraction f = build_theta2_fraction(ch, s, part, cfg, beta1, beta2, W);
    const auto top = numerics::generalized_eig_max(numerics::hermitian_part(f.H1), spread_corner(f.H2));
    GrrResult r;
    r.v = top.vector;
    r.quotient = top.value;
    r.theta_hat2 = project_phases(top.vector, true);
    return r;
}

struct OptimizerConfig {
    int max_iterations = 30;
    double tolerance = 1e-3; // bits/s/Hz
    std::uint64_t seed = 0;
    GpiConfig gpi{};

    void validate() const
    {
        if (max_iterations < 1)
            throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 1");
        if (!(tolerance > 0.0))
            throw std::invalid_argument("OptimizerConfig: tolerance must be positive");
        gpi.validate();
    }
};

struct OptimizeResult {
    NetworkState state; // best iterate, physical form
    PhaseState phases;  // its phase-only form
    ComplexMatrix W;
    double beta1 = 0.0, beta2 = 0.0; // amplitudes in effect for the best iterate
    AmplifyingCoefficients nominal;  // closed-form amplitudes before clamping
    std::vector<double> rate_trace;  // best-so-far
    std::vector<double> raw_rates;
    int iterations = 0;
    bool gpi_pseudo_inverse = false;
};

/// Largest beta2 not above `nominal` that keeps the slot-2 power within the cap;
/// the slot-2 power is homogeneous of degree 2 in beta2.
inline double clamp_beta2(const PhaseState &s, const ChannelSet &ch, const ElementPartition &part,
                          const SystemConfig &cfg, double beta1, double nominal, const ComplexMatrix &W)
{
    if (nominal == 0.0)
        return 0.0;
    const double p = power_irs_slot2(assemble_state(s, part, beta1, 1.0, W), ch, part, cfg);
    if (!(p > 0.0))
        return nominal;
    return std::min(nominal, std::sqrt(cfg.gamma_i() / p));
}

/// Rescales the relay matrix so the relay power equals gamma_r.
inline void rescale_relay(PhaseState &s, const ChannelSet &ch, const ElementPartition &part, const SystemConfig &cfg,
                          double beta1, double beta2, const ComplexMatrix &W)
{
    const double p = power_relay(assemble_state(s, part, beta1, beta2, W), ch, part, cfg);
    if (p > 0.0)
        s.A *= std::sqrt(cfg.gamma_r() / p);
}

inline OptimizeResult optimize(const ChannelSet &ch, const ElementPartition &part, const SystemConfig &cfg,
                               const OptimizerConfig &opt = {})
{
    opt.validate();
    ch.validate();
    if (part.N() != cfg.N() || ch.N() != cfg.N() || ch.M() != cfg.M() || part.K() != cfg.K())
        throw DimensionError("optimize: channel, partition and config disagree");

    OptimizeResult res;
    res.nominal = amp_coefficients(cfg, part, ch.gains);
    // The closed forms hold on average; the realized slot-1 power is capped.
    const double ek_si = ch.h_si.cwiseProduct(part.active_diag().cast<cd>()).squaredNorm();
    double beta1 = res.nominal.beta1;
    if (part.K() > 0)
        beta1 = std::min(beta1, std::sqrt(cfg.gamma_i() / (cfg.gamma_s() * ek_si + part.K())));

    Rng rng(derive_seed(opt.seed, {0}));
    PhaseState s;
    s.theta_hat1 = random_unit_phases(rng, ch.N());
    s.theta_hat2 = random_unit_phases(rng, ch.N());
    ComplexMatrix W = whitening_matrix(ch, part, s.theta_hat1, beta1, cfg.sigma2()).W;
    double beta2 = res.nominal.beta2;
    s.A = relay_beamformer_mrcmrt(ch, part, s.theta_hat1, s.theta_hat2, beta1, beta2, W, cfg);
    beta2 = clamp_beta2(s, ch, part, cfg, beta1, res.nominal.beta2, W);

    auto rate_of = [&](const PhaseState &p, double b2) {
        return achievable_rate(whitened_snr(p, ch, part, cfg, beta1, b2, W));
    };
    double prev = rate_of(s, beta2);
    auto keep = [&](const PhaseState &p, double b2) {
        res.phases = p;
        res.beta2 = b2;
        res.W = W;
    };
    keep(s, beta2);
    res.rate_trace.push_back(prev);
    res.raw_rates.push_back(prev);

    for (int t = 1; t <= opt.max_iterations; ++t) {
        s.A = relay_beamformer_mrcmrt(ch, part, s.theta_hat1, s.theta_hat2, beta1, beta2, W, cfg);
        const GpiResult g = gpi_theta1(ch, s, part, cfg, beta1, beta2, W, opt.gpi);
        res.gpi_pseudo_inverse = res.gpi_pseudo_inverse || g.used_pseudo_inverse;
        s.theta_hat1 = g.theta_hat1;
        W = whitening_matrix(ch, part, s.theta_hat1, beta1, cfg.sigma2()).W;
        s.theta_hat2 = grr_theta2(ch, s, part, cfg, beta1, beta2, W).theta_hat2;
        rescale_relay(s, ch, part, cfg, beta1, beta2, W);
        beta2 = clamp_beta2(s, ch, part, cfg, beta1, res.nominal.beta2, W);

        const double rate = rate_of(s, beta2);
        res.raw_rates.push_back(rate);
        if (rate > res.rate_trace.back()) {
            res.rate_trace.push_back(rate);
            keep(s, beta2);
        } else {
            res.rate_trace.push_back(res.rate_trace.back());
        }
        res.iterations = t;
        if (std::abs(rate - prev) <= opt.tolerance)
            break;
        prev = rate;
    }
    res.beta1 = beta1;
    res.state = assemble_state(res.phases, part, beta1, res.beta2, W);
    return res;
}

} // namespace hirs::wf

#endif // HIRS_WF_GPI_GRR_HPP
