#ifndef HIRS_HP_SDR_FP_HPP
#define HIRS_HP_SDR_FP_HPP

// Alternating SDR optimizer: relay matrix, slot-1 coefficients and slot-2
// coefficients are each updated through a Charnes-Cooper lifted SDP followed
// by Gaussian-randomization recovery.

#include "hirs/core_model.hpp"
#include "hirs/numerics.hpp"
#include "hirs/sdp.hpp"
#include "hirs/seeding.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hirs::hp {

using numerics::kron;

/// Quadratic-form data of the relay step in a = vec(A).
struct RelaySubproblem {
    ComplexMatrix B1, B2, B3; // |w^H A u|^2, ||w^H A G||^2, ||w^H A||^2
    ComplexMatrix C1, C2;     // ||A u||^2, ||A G||^2
    ComplexMatrix D1, D2, D3; // ||R A u||^2, ||R A G||^2, ||R A||^2
    double noise_const = 1.0; // ||h_id^H E_K Theta_2||^2 + 1
    double slot2_const = 0.0; // ||E_K Theta_2||^2
    double gamma_s = 0.0, gamma_r = 0.0, gamma_i = 0.0;
    int M = 0;

    ComplexMatrix signal() const { return gamma_s * B1; }
    ComplexMatrix noise() const { return B2 + B3; }
    ComplexMatrix relay_power() const
    {
        return gamma_s * C1 + C2 + ComplexMatrix::Identity(C1.rows(), C1.cols());
    }
    ComplexMatrix slot2_power() const { return gamma_s * D1 + D2 + D3; }
};

/// Data of the slot-1 step in v = [theta_1; 1].
struct Theta1Subproblem {
    ComplexMatrix F1, F2;     // SNR numerator / denominator
    ComplexMatrix G1, G2, G3; // slot-1, relay and slot-2 powers
    std::vector<int> passive; // indices fixed to unit modulus
    double noise_const = 1.0; // ||h_id^H E_K Theta_2||^2 + 1, inside F2's corner
    double slot2_const = 0.0; // ||E_K Theta_2||^2, inside G3's corner
    double gamma_r = 0.0, gamma_i = 0.0;
    int N = 0;
};

/// Data of the slot-2 step in v = [conj(theta_2); 1].
struct Theta2Subproblem {
    ComplexMatrix H1, H2, J;
    std::vector<int> passive;
    double gamma_i = 0.0;
    int N = 0;
};

/// How the slot-1 step treats the relay matrix.
enum class RelayCoupling {
    fixed_relay,   // A held fixed, as in the alternation's literal form
    rescaled_relay // A's scale re-optimized jointly with theta_1
};

struct OptimizerConfig {
    int max_iterations = 30;
    double tolerance = 1e-3; // bits/s/Hz
    int randomization_samples = 200;
    std::uint64_t seed = 0;
    RelayCoupling theta1_coupling = RelayCoupling::rescaled_relay;
    sdp::SolverSettings solver{};

    void validate() const
    {
        if (max_iterations < 1)
            throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 1");
        if (!(tolerance > 0.0))
            throw std::invalid_argument("OptimizerConfig: tolerance must be positive");
        if (randomization_samples < 1)
            throw std::invalid_argument("OptimizerConfig: randomization_samples must be >= 1");
    }
};

/// Outcome of one subproblem step.
struct StepResult {
    NetworkState state;
    double bound = 0.0;    // SDP optimal value
    double achieved = 0.0; // same objective at the recovered point
    double snr = 0.0;
    double rank1_gap = 0.0;
    bool randomized = false;
    int sdp_iterations = 0;
};

class SubproblemFailure : public std::runtime_error {
public:
    SubproblemFailure(const std::string &what, sdp::SdpStatus status)
        : std::runtime_error(what), status_(status)
    {
    }
    sdp::SdpStatus status() const { return status_; }

private:
    sdp::SdpStatus status_;
};

struct OptimizeResult {
    NetworkState state;             // best iterate seen
    std::vector<double> rate_trace; // best-so-far, entry 0 is the initial point
    std::vector<double> raw_rates;  // rate of each iterate as produced
    int iterations = 0;
};

/// Thrown when a step fails mid-run; carries the trace up to the failure.
class OptimizationError : public std::runtime_error {
public:
    OptimizationError(const std::string &what, sdp::SdpStatus status, std::vector<double> partial)
        : std::runtime_error(what), status_(status), partial_trace_(std::move(partial))
    {
    }
    sdp::SdpStatus status() const { return status_; }
    const std::vector<double> &partial_trace() const { return partial_trace_; }

private:
    sdp::SdpStatus status_;
    std::vector<double> partial_trace_;
};

inline constexpr double kMinLift = 1e-9;
inline constexpr double kRankOneGap = 1e-6;

// ---------------------------------------------------------------- builders

inline RelaySubproblem build_relay_subproblem(const ChannelSet &ch, const NetworkState &s,
                                              const ElementPartition &part, const SystemConfig &cfg)
{
    ch.validate();
    if (s.theta1.size() != ch.N() || s.theta2.size() != ch.N() || part.N() != ch.N())
        throw DimensionError("build_relay_subproblem: dimension mismatch");
    const int m = ch.M();
    const ComplexVector ek = part.active_diag().cast<cd>();
    const ComplexVector u = effective_source_channel(ch, s.theta1);
    const ComplexVector w = effective_destination_channel(ch, s.theta2);
    const ComplexMatrix G = ch.H_ir * ek.cwiseProduct(s.theta1).asDiagonal();
    const ComplexMatrix R = ek.cwiseProduct(s.theta2).asDiagonal() * ch.H_ir.adjoint();
    const ComplexMatrix I = ComplexMatrix::Identity(m, m);

    const ComplexMatrix uu = u.conjugate() * u.transpose();
    const ComplexMatrix gg = G.conjugate() * G.transpose();
    const ComplexMatrix ww = w * w.adjoint();
    const ComplexMatrix rr = R.adjoint() * R;

    RelaySubproblem sub;
    sub.M = m;
    sub.B1 = kron(uu, ww);
    sub.B2 = kron(gg, ww);
    sub.B3 = kron(I, ww);
    sub.C1 = kron(uu, I);
    sub.C2 = kron(gg, I);
    sub.D1 = kron(uu, rr);
    sub.D2 = kron(gg, rr);
    sub.D3 = kron(I, rr);
    sub.noise_const = ch.h_id.cwiseProduct(ek).cwiseProduct(s.theta2).squaredNorm() + 1.0;
    sub.slot2_const = ek.cwiseProduct(s.theta2).squaredNorm();
    sub.gamma_s = cfg.gamma_s();
    sub.gamma_r = cfg.gamma_r();
    sub.gamma_i = cfg.gamma_i();
    return sub;
}

inline Theta1Subproblem build_theta1_subproblem(const ChannelSet &ch, const NetworkState &s,
                                                const ElementPartition &part, const SystemConfig &cfg)
{
    ch.validate();
    const int n = ch.N(), m = ch.M();
    if (s.A.rows() != m || s.A.cols() != m || s.theta2.size() != n || part.N() != n)
        throw DimensionError("build_theta1_subproblem: dimension mismatch");
    const double gs = cfg.gamma_s();
    const RealVector ek = part.active_diag();
    const ComplexVector w = effective_destination_channel(ch, s.theta2);
    const ComplexVector h_rid = s.A.adjoint() * w;
    ComplexMatrix H_sir(m, n + 1);
    H_sir.leftCols(n) = ch.H_ir * ch.h_si.asDiagonal();
    H_sir.col(n) = ch.h_sr;
    const ComplexVector active2 = ek.cast<cd>().cwiseProduct(s.theta2);
    const ComplexMatrix R = active2.asDiagonal() * ch.H_ir.adjoint();

    Theta1Subproblem sub;
    sub.N = n;
    sub.passive = part.passive_indices();
    sub.noise_const = ch.h_id.cwiseProduct(active2).squaredNorm() + 1.0;
    sub.slot2_const = active2.squaredNorm();
    sub.gamma_r = cfg.gamma_r();
    sub.gamma_i = cfg.gamma_i();

    const ComplexVector f = H_sir.adjoint() * h_rid;
    sub.F1 = gs * f * f.adjoint();

    sub.F2 = ComplexMatrix::Zero(n + 1, n + 1);
    const ComplexVector q = ch.H_ir.adjoint() * h_rid;
    for (int i = 0; i < n; ++i)
        sub.F2(i, i) = ek(i) * std::norm(q(i));
    sub.F2(n, n) = h_rid.squaredNorm() + sub.noise_const;

    sub.G1 = ComplexMatrix::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i)
        sub.G1(i, i) = ek(i) * (gs * std::norm(ch.h_si(i)) + 1.0);

    const ComplexMatrix AH = s.A * H_sir;
    const ComplexMatrix AHir = s.A * ch.H_ir;
    sub.G2 = gs * AH.adjoint() * AH;
    for (int i = 0; i < n; ++i)
        sub.G2(i, i) += ek(i) * AHir.col(i).squaredNorm();
    sub.G2(n, n) += s.A.squaredNorm();

    const ComplexMatrix RAH = R * AH;
    const ComplexMatrix RAHir = R * AHir;
    sub.G3 = gs * RAH.adjoint() * RAH;
    for (int i = 0; i < n; ++i)
        sub.G3(i, i) += ek(i) * RAHir.col(i).squaredNorm();
    sub.G3(n, n) += (R * s.A).squaredNorm() + sub.slot2_const;
    return sub;
}

inline Theta2Subproblem build_theta2_subproblem(const ChannelSet &ch, const NetworkState &s,
                                                const ElementPartition &part, const SystemConfig &cfg)
{
    ch.validate();
    const int n = ch.N(), m = ch.M();
    if (s.A.rows() != m || s.A.cols() != m || s.theta1.size() != n || part.N() != n)
        throw DimensionError("build_theta2_subproblem: dimension mismatch");
    const double gs = cfg.gamma_s();
    const RealVector ek = part.active_diag();
    const ComplexVector u = effective_source_channel(ch, s.theta1);
    const ComplexMatrix G = ch.H_ir * ek.cast<cd>().cwiseProduct(s.theta1).asDiagonal();

    ComplexMatrix H_rid(n + 1, m);
    H_rid.topRows(n) = ch.h_id.conjugate().asDiagonal() * ch.H_ir.adjoint();
    H_rid.row(n) = ch.h_rd.adjoint();

    Theta2Subproblem sub;
    sub.N = n;
    sub.passive = part.passive_indices();
    sub.gamma_i = cfg.gamma_i();

    const ComplexVector h = H_rid * (s.A * u);
    sub.H1 = gs * h * h.adjoint();
    const ComplexMatrix HA = H_rid * s.A;
    sub.H2 = HA * (G * G.adjoint() + ComplexMatrix::Identity(m, m)) * HA.adjoint();
    for (int i = 0; i < n; ++i)
        sub.H2(i, i) += ek(i) * std::norm(ch.h_id(i));
    sub.H2(n, n) += 1.0;

    const ComplexVector hau = ch.H_ir.adjoint() * (s.A * u);
    const ComplexMatrix H4 = ch.H_ir.adjoint() * s.A * G;
    const ComplexMatrix HAAH = ch.H_ir.adjoint() * s.A * s.A.adjoint() * ch.H_ir;
    sub.J = ComplexMatrix::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i)
        if (ek(i) > 0.0)
            sub.J(i, i) = gs * std::norm(hau(i)) + H4.row(i).squaredNorm() + HAAH(i, i).real() + 1.0;
    return sub;
}

// ---------------------------------------------------------------- helpers

namespace detail {

inline double qf(const ComplexMatrix &Q, const ComplexVector &x) { return x.dot(Q * x).real(); }

/// Solves p after the congruence X = S X' S with S = diag(scale); returns X.
inline sdp::SdpSolution solve_scaled(sdp::SdpProblem p, const RealVector &scale,
                                     const sdp::SolverSettings &settings)
{
    auto congruence = [&](ComplexMatrix &m) { m = scale.asDiagonal() * m * scale.asDiagonal(); };
    congruence(p.objective);
    for (auto &c : p.equalities)
        congruence(c.matrix);
    for (auto &c : p.inequalities)
        congruence(c.matrix);
    sdp::SdpSolution sol = sdp::solve_sdp(p, settings);
    sol.X = scale.asDiagonal() * sol.X * scale.asDiagonal();
    return sol;
}

inline void require_optimal(const sdp::SdpSolution &sol, const char *step)
{
    if (sol.status != sdp::SdpStatus::optimal)
        throw SubproblemFailure(std::string(step) + ": SDP returned " + sdp::to_string(sol.status), sol.status);
}

/// Draws CN(0, V) samples through V = Q diag(lambda) Q^H.
class GaussianSampler {
public:
    explicit GaussianSampler(const ComplexMatrix &V)
    {
        const auto eig = numerics::eig_hermitian(numerics::hermitian_part(V));
        factor_ = eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().cast<cd>().asDiagonal();
    }

    template <typename R>
    ComplexVector draw(R &rng) const
    {
        ComplexVector xi(factor_.cols());
        for (Eigen::Index i = 0; i < xi.size(); ++i)
            xi(i) = complex_gaussian(rng, 1.0);
        return factor_ * xi;
    }

private:
    ComplexMatrix factor_;
};

/// Maps a lifted vector v to theta entries via v_i / v_{N+1}; passive
/// entries are projected onto the unit circle. Returns false when the last
/// entry vanishes.
inline bool recover_coefficients(const ComplexVector &v, const ElementPartition &part, bool conjugate,
                                 ComplexVector &theta)
{
    const int n = part.N();
    const cd last = v(n);
    if (!(std::abs(last) > 1e-300) || !v.allFinite())
        return false;
    theta.resize(n);
    for (int i = 0; i < n; ++i) {
        cd t = v(i) / last;
        if (conjugate)
            t = std::conj(t);
        if (!part.active(i))
            t = std::polar(1.0, std::arg(t));
        theta(i) = t;
    }
    return theta.allFinite();
}

/// Per-entry scale that evens out the magnitudes of passive (unit) and
/// active (large-gain) diagonal entries of the lifted variable.
inline RealVector lift_scale(const ComplexMatrix &power_form, const ElementPartition &part, double cap)
{
    const int n = part.N();
    RealVector s = RealVector::Ones(n + 1);
    const double k = std::max(1, part.K());
    for (int i = 0; i < n; ++i) {
        const double d = power_form(i, i).real();
        if (part.active(i) && d > 0.0)
            s(i) = std::sqrt(cap / (k * d));
    }
    return s;
}

} // namespace detail

// ---------------------------------------------------------------- relay step

/// Charnes-Cooper SDR of the relay step. `incumbent` is kept unless a
/// recovered candidate beats it, so the returned SNR never falls below it.
template <typename R>
StepResult solve_relay(const RelaySubproblem &sub, const NetworkState &incumbent, const OptimizerConfig &opt,
                       R &rng)
{
    const int m = sub.M, d = m * m;
    const ComplexMatrix S = sub.signal(), Nz = sub.noise(), Pr = sub.relay_power(), P2 = sub.slot2_power();
    const double slot2_room = sub.gamma_i - sub.slot2_const;

    sdp::SdpProblem p;
    p.objective = S;
    p.has_scalar = true;
    p.inequalities.push_back({Pr, -sub.gamma_r, 0.0});
    p.inequalities.push_back({P2, -slot2_room, 0.0});
    p.equalities.push_back({Nz, sub.noise_const, 1.0});
    // m >= kMinLift
    p.inequalities.push_back({ComplexMatrix::Zero(d, d), -1.0, -kMinLift});

    const double avg = Pr.trace().real() / d;
    const RealVector scale = RealVector::Constant(d, std::sqrt(sub.gamma_r / avg));
    sdp::SdpSolution sol = detail::solve_scaled(p, scale, opt.solver);
    detail::require_optimal(sol, "solve_relay");

    const double lift = std::max(sol.scalar, kMinLift);
    const ComplexMatrix Ahat = sol.X / lift;
    const auto r1 = sdp::extract_rank1(Ahat);

    auto snr_of = [&](const ComplexVector &a) { return detail::qf(S, a) / (detail::qf(Nz, a) + sub.noise_const); };
    // Scales a onto the binding power cap.
    auto to_boundary = [&](ComplexVector a) -> ComplexVector {
        const double pr = detail::qf(Pr, a), p2 = detail::qf(P2, a);
        double c2 = pr > 0.0 ? sub.gamma_r / pr : std::numeric_limits<double>::infinity();
        if (p2 > 0.0)
            c2 = std::min(c2, std::max(0.0, slot2_room) / p2);
        if (!std::isfinite(c2))
            return ComplexVector();
        return std::sqrt(c2 * (1.0 - 1e-12)) * a;
    };

    StepResult out;
    out.state = incumbent;
    out.bound = sol.primal_objective;
    out.rank1_gap = r1.rank1_gap;
    out.sdp_iterations = sol.iterations;
    const ComplexVector a_inc = numerics::vec(incumbent.A);
    double best = snr_of(a_inc);
    ComplexVector best_a = a_inc;

    auto consider = [&](const ComplexVector &raw) {
        const ComplexVector a = to_boundary(raw);
        if (a.size() == 0 || !a.allFinite())
            return;
        const double v = snr_of(a);
        if (v > best) {
            best = v;
            best_a = a;
        }
    };
    // Incumbent entered first only as a floor; candidates must beat it strictly.
    consider(r1.vector);
    if (r1.rank1_gap > kRankOneGap) {
        out.randomized = true;
        detail::GaussianSampler sampler(Ahat);
        for (int k = 0; k < opt.randomization_samples; ++k)
            consider(sampler.draw(rng));
    }
    out.state.A = numerics::unvec(best_a, m);
    out.achieved = best;
    out.snr = best;
    return out;
}

// ---------------------------------------------------------------- slot-1 step

/// SDR of the slot-1 step. In rescaled_relay mode the relay matrix is
/// re-scaled onto its binding power cap along with theta_1.
template <typename R>
StepResult solve_theta1(const Theta1Subproblem &sub, const NetworkState &incumbent, const ChannelSet &ch,
                        const ElementPartition &part, const SystemConfig &cfg, const OptimizerConfig &opt,
                        R &rng)
{
    const int n = sub.N, d = n + 1;
    const double slot2_room = sub.gamma_i - sub.slot2_const;
    const bool rescale = opt.theta1_coupling == RelayCoupling::rescaled_relay && slot2_room > 0.0;

    auto unit = [&](int i) {
        ComplexMatrix e = ComplexMatrix::Zero(d, d);
        e(i, i) = 1.0;
        return e;
    };

    sdp::SdpProblem p;
    p.objective = sub.F1;
    p.has_scalar = true;
    for (int i : sub.passive)
        p.equalities.push_back({unit(i), -1.0, 0.0});
    p.equalities.push_back({unit(n), -1.0, 0.0});
    p.inequalities.push_back({ComplexMatrix::Zero(d, d), -1.0, -kMinLift});
    if (part.K() > 0)
        p.inequalities.push_back({sub.G1, -sub.gamma_i, 0.0});

    ComplexMatrix F2a = sub.F2;
    F2a(n, n) -= sub.noise_const;
    ComplexMatrix G3a = sub.G3;
    G3a(n, n) -= sub.slot2_const;
    if (rescale) {
        p.inequalities.push_back({F2a + (sub.noise_const / sub.gamma_r) * sub.G2, 0.0, 1.0});
        if (part.K() > 0)
            p.inequalities.push_back({F2a + (sub.noise_const / slot2_room) * G3a, 0.0, 1.0});
    } else {
        p.equalities.push_back({sub.F2, 0.0, 1.0});
        p.inequalities.push_back({sub.G2, -sub.gamma_r, 0.0});
        if (part.K() > 0)
            p.inequalities.push_back({sub.G3, -sub.gamma_i, 0.0});
    }

    const RealVector scale = detail::lift_scale(sub.G1, part, sub.gamma_i);
    sdp::SdpSolution sol = detail::solve_scaled(p, scale, opt.solver);
    detail::require_optimal(sol, "solve_theta1");
    const double tau = std::max(sol.scalar, kMinLift);
    const ComplexMatrix V = sol.X / tau;
    const auto r1 = sdp::extract_rank1(V);

    // Objective of the lifted problem at a concrete (A, theta_1).
    auto objective = [&](const NetworkState &s) {
        ComplexVector v(d);
        v.head(n) = s.theta1;
        v(n) = 1.0;
        const double num = detail::qf(sub.F1, v);
        if (!rescale)
            return num / detail::qf(sub.F2, v);
        const double g2 = detail::qf(sub.G2, v), g3 = detail::qf(G3a, v), f2 = detail::qf(F2a, v);
        const double inv_r = std::max(g2 / sub.gamma_r, part.K() > 0 ? g3 / slot2_room : 0.0);
        return num / (f2 + sub.noise_const * inv_r);
    };
    // Builds a feasible state from candidate coefficients; false if none.
    auto realize = [&](const ComplexVector &theta, NetworkState &s) {
        s = incumbent;
        s.theta1 = theta;
        if (!rescale) {
            const double c = max_active_scale(s, ch, part, cfg, Slot::first);
            if (c < 0.0)
                return false;
            scale_active(s, part, Slot::first, c);
            return true;
        }
        const double p1 = power_irs_slot1(s, ch, part, cfg);
        if (p1 > cfg.gamma_i() * (1.0 - 1e-12))
            scale_active(s, part, Slot::first, std::sqrt(cfg.gamma_i() * (1.0 - 1e-12) / p1));
        const double pr = power_relay(s, ch, part, cfg);
        const double p2 = power_irs_slot2(s, ch, part, cfg) - sub.slot2_const;
        double c2 = sub.gamma_r / pr;
        if (p2 > 0.0)
            c2 = std::min(c2, slot2_room / p2);
        if (!(c2 > 0.0) || !std::isfinite(c2))
            return false;
        s.A *= std::sqrt(c2 * (1.0 - 1e-12));
        return true;
    };

    StepResult out;
    out.state = incumbent;
    out.bound = sol.primal_objective;
    out.rank1_gap = r1.rank1_gap;
    out.sdp_iterations = sol.iterations;
    double best = evaluate_snr(incumbent, ch, part, cfg);
    double best_obj = objective(incumbent);

    auto consider = [&](const ComplexVector &v) {
        ComplexVector theta;
        NetworkState s;
        if (!detail::recover_coefficients(v, part, false, theta) || !realize(theta, s))
            return;
        const double snr = evaluate_snr(s, ch, part, cfg);
        if (snr > best) {
            best = snr;
            best_obj = objective(s);
            out.state = s;
        }
    };
    consider(r1.vector);
    if (r1.rank1_gap > kRankOneGap) {
        out.randomized = true;
        detail::GaussianSampler sampler(V);
        for (int k = 0; k < opt.randomization_samples; ++k)
            consider(sampler.draw(rng));
    }
    // The incumbent itself may sit on a non-binding relay scale.
    if (rescale) {
        NetworkState s;
        if (realize(incumbent.theta1, s)) {
            const double snr = evaluate_snr(s, ch, part, cfg);
            if (snr > best) {
                best = snr;
                best_obj = objective(s);
                out.state = s;
            }
        }
    }
    out.snr = best;
    out.achieved = best_obj;
    return out;
}

// ---------------------------------------------------------------- slot-2 step

template <typename R>
StepResult solve_theta2(const Theta2Subproblem &sub, const NetworkState &incumbent, const ChannelSet &ch,
                        const ElementPartition &part, const SystemConfig &cfg, const OptimizerConfig &opt,
                        R &rng)
{
    const int n = sub.N, d = n + 1;
    auto unit = [&](int i) {
        ComplexMatrix e = ComplexMatrix::Zero(d, d);
        e(i, i) = 1.0;
        return e;
    };
    sdp::SdpProblem p;
    p.objective = sub.H1;
    p.has_scalar = true;
    for (int i : sub.passive)
        p.equalities.push_back({unit(i), -1.0, 0.0});
    p.equalities.push_back({unit(n), -1.0, 0.0});
    p.equalities.push_back({sub.H2, 0.0, 1.0});
    p.inequalities.push_back({ComplexMatrix::Zero(d, d), -1.0, -kMinLift});
    if (part.K() > 0)
        p.inequalities.push_back({sub.J, -sub.gamma_i, 0.0});

    const RealVector scale = detail::lift_scale(sub.J, part, sub.gamma_i);
    sdp::SdpSolution sol = detail::solve_scaled(p, scale, opt.solver);
    detail::require_optimal(sol, "solve_theta2");
    const double rho = std::max(sol.scalar, kMinLift);
    const ComplexMatrix V = sol.X / rho;
    const auto r1 = sdp::extract_rank1(V);

    auto objective = [&](const NetworkState &s) {
        ComplexVector v(d);
        v.head(n) = s.theta2.conjugate();
        v(n) = 1.0;
        return detail::qf(sub.H1, v) / detail::qf(sub.H2, v);
    };

    StepResult out;
    out.state = incumbent;
    out.bound = sol.primal_objective;
    out.rank1_gap = r1.rank1_gap;
    out.sdp_iterations = sol.iterations;
    double best = evaluate_snr(incumbent, ch, part, cfg);

    auto consider = [&](const ComplexVector &v) {
        ComplexVector theta;
        if (!detail::recover_coefficients(v, part, true, theta))
            return;
        NetworkState s = incumbent;
        s.theta2 = theta;
        const double c = max_active_scale(s, ch, part, cfg, Slot::second);
        if (c < 0.0)
            return;
        scale_active(s, part, Slot::second, c);
        const double snr = evaluate_snr(s, ch, part, cfg);
        if (snr > best) {
            best = snr;
            out.state = s;
        }
    };
    consider(r1.vector);
    if (r1.rank1_gap > kRankOneGap) {
        out.randomized = true;
        detail::GaussianSampler sampler(V);
        for (int k = 0; k < opt.randomization_samples; ++k)
            consider(sampler.draw(rng));
    }
    out.snr = best;
    out.achieved = objective(out.state);
    return out;
}

// ---------------------------------------------------------------- alternation

/// MRC-MRT relay matrix w u^H / (|w| |u|), scaled to meet the relay cap
/// with equality.
inline ComplexMatrix mrc_mrt_relay(const ChannelSet &ch, const NetworkState &s, const ElementPartition &part,
                                   const SystemConfig &cfg)
{
    const ComplexVector u = effective_source_channel(ch, s.theta1);
    const ComplexVector w = effective_destination_channel(ch, s.theta2);
    NetworkState t = s;
    t.A = (w / w.norm()) * (u / u.norm()).adjoint();
    const double pr = power_relay(t, ch, part, cfg);
    return t.A * std::sqrt(cfg.gamma_r() / pr * (1.0 - 1e-12));
}

/// Feasible starting point: random phases with unit active amplitudes,
/// MRC-MRT relay at the relay cap, active amplitudes shrunk if needed.
template <typename R>
NetworkState initial_state(const ChannelSet &ch, const ElementPartition &part, const SystemConfig &cfg, R &rng)
{
    NetworkState s;
    s.theta1 = random_unit_phases(rng, ch.N());
    s.theta2 = random_unit_phases(rng, ch.N());
    s.A = ComplexMatrix::Zero(ch.M(), ch.M());
    const double p1 = power_irs_slot1(s, ch, part, cfg);
    if (p1 > cfg.gamma_i())
        scale_active(s, part, Slot::first, std::sqrt(cfg.gamma_i() * (1.0 - 1e-12) / p1));
    s.A = mrc_mrt_relay(ch, s, part, cfg);
    const double c = max_active_scale(s, ch, part, cfg, Slot::second);
    scale_active(s, part, Slot::second, std::max(0.0, c));
    return s;
}

inline OptimizeResult optimize(const ChannelSet &ch, const ElementPartition &part, const SystemConfig &cfg,
                               const OptimizerConfig &opt = {})
{
    opt.validate();
    ch.validate();
    if (part.N() != cfg.N() || ch.N() != cfg.N() || ch.M() != cfg.M() || part.K() != cfg.K())
        throw DimensionError("optimize: channel, partition and config disagree");

    Rng init_rng(derive_seed(opt.seed, {0}));
    NetworkState cur = initial_state(ch, part, cfg, init_rng);

    OptimizeResult res;
    double prev = achievable_rate(evaluate_snr(cur, ch, part, cfg));
    res.state = cur;
    res.rate_trace.push_back(prev);
    res.raw_rates.push_back(prev);

    for (int t = 1; t <= opt.max_iterations; ++t) {
        try {
            Rng r1(derive_seed(opt.seed, {static_cast<std::uint64_t>(t), 1}));
            cur = solve_relay(build_relay_subproblem(ch, cur, part, cfg), cur, opt, r1).state;
            Rng r2(derive_seed(opt.seed, {static_cast<std::uint64_t>(t), 2}));
            cur = solve_theta1(build_theta1_subproblem(ch, cur, part, cfg), cur, ch, part, cfg, opt, r2).state;
            Rng r3(derive_seed(opt.seed, {static_cast<std::uint64_t>(t), 3}));
            cur = solve_theta2(build_theta2_subproblem(ch, cur, part, cfg), cur, ch, part, cfg, opt, r3).state;
        } catch (const SubproblemFailure &e) {
            throw OptimizationError(std::string("hp_sdr_fp iteration ") + std::to_string(t) + ": " + e.what(),
                                    e.status(), res.rate_trace);
        }
        const double rate = achievable_rate(evaluate_snr(cur, ch, part, cfg));
        res.raw_rates.push_back(rate);
        if (rate > res.rate_trace.back()) {
            res.rate_trace.push_back(rate);
            res.state = cur;
        } else {
            res.rate_trace.push_back(res.rate_trace.back());
        }
        res.iterations = t;
        if (std::abs(rate - prev) <= opt.tolerance)
            break;
        prev = rate;
    }
    return res;
}

} // namespace hirs::hp

#endif // HIRS_HP_SDR_FP_HPP
