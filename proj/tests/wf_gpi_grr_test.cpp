#include "hirs/hp_sdr_fp.hpp"
#include "hirs/wf_gpi_grr.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace hirs;
using hirs::fixtures::random_instance;
using hirs::fixtures::rel_err;

namespace {

ComplexVector lifted(const ComplexVector &theta)
{
    ComplexVector v(theta.size() + 1);
    v.head(theta.size()) = theta;
    v(theta.size()) = 1.0;
    return v;
}

double qf(const ComplexMatrix &Q, const ComplexVector &x) { return x.dot(Q * x).real(); }

struct WfSetup {
    fixtures::Instance inst;
    wf::PhaseState s;
    double beta1, beta2;
    ComplexMatrix W;
};

WfSetup wf_setup(std::uint64_t seed, int m, int n, int k, double ps_dbm = 10.0)
{
    WfSetup w{random_instance(seed, m, n, k, ps_dbm), {}, 0.0, 0.0, {}};
    Rng rng(seed + 17);
    const auto amp = wf::amp_coefficients(w.inst.cfg, w.inst.part, w.inst.ch.gains);
    w.beta1 = amp.beta1;
    w.beta2 = amp.beta2;
    w.s.theta_hat1 = random_unit_phases(rng, n);
    w.s.theta_hat2 = random_unit_phases(rng, n);
    w.W = wf::whitening_matrix(w.inst.ch, w.inst.part, w.s.theta_hat1, w.beta1, w.inst.cfg.sigma2()).W;
    w.s.A = wf::relay_beamformer_mrcmrt(w.inst.ch, w.inst.part, w.s.theta_hat1, w.s.theta_hat2, w.beta1, w.beta2,
                                        w.W, w.inst.cfg);
    return w;
}

double snr_of(const WfSetup &w, const wf::PhaseState &s)
{
    return wf::whitened_snr(s, w.inst.ch, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W);
}

ComplexMatrix random_matrix(Rng &rng, int r, int c) { return complex_gaussian_matrix(rng, r, c, 1.0); }

} // namespace

TEST(AmpCoefficients, Examples)
{
    EXPECT_EQ(wf::amp_coeff_slot1(0.0, 1.0, 1e-11, 4, 1e-6), 0.0);
    EXPECT_EQ(wf::amp_coeff_slot2(0.0, 1.0, 1e-11, 4, 2, 1e-6), 0.0);
    EXPECT_DOUBLE_EQ(wf::amp_coeff_slot1(1.0, 0.5, 0.5, 1, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(wf::amp_coeff_slot2(1.0, 0.5, 0.5, 1, 1, 1.0), 1.0);
    EXPECT_EQ(wf::amp_coeff_slot1(1.0, 1.0, 1e-11, 0, 1e-6), 0.0);
    EXPECT_THROW(wf::amp_coeff_slot1(-1.0, 1.0, 1e-11, 4, 1e-6), std::invalid_argument);
}

TEST(AmpCoefficients, DefaultLinkBudget)
{
    const auto cfg = SystemConfig::from_dbm(2, 32, 4, 30.0, 30.0, 30.0);
    Rng rng(1);
    const auto part = ElementPartition::random(32, 4, rng);
    const auto amp = wf::amp_coefficients(cfg, part, Geometry{}.gains());
    EXPECT_LT(rel_err(amp.beta1, 866.0124136956583), 1e-12);
    EXPECT_LT(rel_err(amp.beta2, 249.9999218750366), 1e-12);
    EXPECT_FALSE(amp.degenerate);
    EXPECT_TRUE(wf::amp_coefficients(cfg.with_active_count(0), ElementPartition::all_passive(32), Geometry{}.gains())
                    .degenerate);
}

TEST(AmpCoefficients, MonotoneInPowerAndCount)
{
    const double pl = Geometry{}.gains().si, pl_ri = Geometry{}.gains().ir;
    for (int k = 1; k < 16; ++k) {
        double prev1 = 0.0, prev2 = 0.0;
        for (double pi_dbm = 0.0; pi_dbm <= 40.0; pi_dbm += 5.0) {
            const double b1 = wf::amp_coeff_slot1(dbm_to_watts(pi_dbm), 1.0, 1e-11, k, pl);
            const double b2 = wf::amp_coeff_slot2(dbm_to_watts(pi_dbm), 1.0, 1e-11, k, 2, pl_ri);
            EXPECT_GT(b1, prev1);
            EXPECT_GT(b2, prev2);
            prev1 = b1;
            prev2 = b2;
            EXPECT_LT(wf::amp_coeff_slot1(dbm_to_watts(pi_dbm), 1.0, 1e-11, k + 1, pl), b1);
        }
    }
}

TEST(Whitening, ZeroGainIsScaledIdentity)
{
    const auto inst = random_instance(2, 2, 8, 2);
    const double s2 = inst.cfg.sigma2();
    const auto w = wf::whitening_matrix(inst.ch, inst.part, ComplexVector::Ones(8), 0.0, s2);
    EXPECT_LT((w.W - ComplexMatrix::Identity(2, 2) / std::sqrt(s2)).norm(), 1e-9 / std::sqrt(s2));
}

TEST(Whitening, AllActiveDirectProduct)
{
    const auto inst = random_instance(3, 2, 6, 6);
    const double s2 = inst.cfg.sigma2(), b1 = 37.0;
    const auto w = wf::whitening_matrix(inst.ch, inst.part, ComplexVector::Ones(6), b1, s2);
    const ComplexMatrix C =
        b1 * b1 * s2 * inst.ch.H_ir * inst.ch.H_ir.adjoint() + s2 * ComplexMatrix::Identity(2, 2);
    EXPECT_LT((w.C - C).norm(), 1e-12 * C.norm());
}

TEST(Whitening, IdentityAfterWhitening)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto w = wf_setup(100 + seed, 3, 16, 4);
        const auto wh = wf::whitening_matrix(w.inst.ch, w.inst.part, w.s.theta_hat1, w.beta1, w.inst.cfg.sigma2());
        EXPECT_TRUE(numerics::is_hermitian(wh.W));
        EXPECT_GT(numerics::eig_hermitian(wh.W).values.minCoeff(), 0.0);
        EXPECT_LT((wh.W * wh.C * wh.W.adjoint() - ComplexMatrix::Identity(3, 3)).norm(), 1e-8);
    }
}

TEST(Whitening, EmpiricalCovariance)
{
    const auto w = wf_setup(4, 2, 8, 2);
    const double s2 = w.inst.cfg.sigma2();
    const ComplexMatrix G =
        w.inst.ch.H_ir * w.inst.part.active_diag().cast<cd>().cwiseProduct(w.s.theta_hat1).asDiagonal();
    Rng rng(5);
    ComplexMatrix acc = ComplexMatrix::Zero(2, 2);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const ComplexVector n1 = complex_gaussian_matrix(rng, 8, 1, s2).col(0);
        const ComplexVector nr = complex_gaussian_matrix(rng, 2, 1, s2).col(0);
        const ComplexVector z = w.W * (w.beta1 * G * n1 + nr);
        acc += z * z.adjoint();
    }
    acc /= draws;
    const ComplexMatrix I = ComplexMatrix::Identity(2, 2);
    EXPECT_LT((acc - I).norm() / I.norm(), 0.03);
}

TEST(Mrc, PowerEqualityAndRank)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto w = wf_setup(200 + seed, 2, 16, 4);
        const NetworkState phys = wf::assemble_state(w.s, w.inst.part, w.beta1, w.beta2, w.W);
        EXPECT_LT(rel_err(power_relay(phys, w.inst.ch, w.inst.part, w.inst.cfg), w.inst.cfg.gamma_r()), 1e-9);
        const auto sv = Eigen::JacobiSVD<ComplexMatrix>(w.s.A).singularValues();
        EXPECT_LT(sv(1), 1e-12 * sv(0));
    }
}

TEST(Mrc, SingleAntenna)
{
    const auto w = wf_setup(6, 1, 4, 1);
    const NetworkState phys = wf::assemble_state(w.s, w.inst.part, w.beta1, w.beta2, w.W);
    const double denom = power_relay(phys, w.inst.ch, w.inst.part, w.inst.cfg) / std::norm(w.s.A(0, 0));
    EXPECT_LT(rel_err(std::abs(w.s.A(0, 0)), std::sqrt(w.inst.cfg.gamma_r() / denom)), 1e-12);
}

TEST(Mrc, DegenerateChannel)
{
    auto w = wf_setup(7, 2, 4, 1);
    ChannelSet ch = w.inst.ch;
    ch.h_rd.setZero();
    ch.h_id.setZero();
    EXPECT_THROW(wf::relay_beamformer_mrcmrt(ch, w.inst.part, w.s.theta_hat1, w.s.theta_hat2, w.beta1, w.beta2, w.W,
                                             w.inst.cfg),
                 wf::DegenerateChannel);
}

TEST(WhitenedSnr, Reductions)
{
    auto w = wf_setup(8, 2, 8, 2);
    wf::PhaseState zero = w.s;
    zero.A.setZero();
    EXPECT_EQ(snr_of(w, zero), 0.0);

    const double sigma = std::sqrt(w.inst.cfg.sigma2());
    const ComplexMatrix W0 = ComplexMatrix::Identity(2, 2) / sigma;
    const double whitened = wf::whitened_snr(w.s, w.inst.ch, w.inst.part, w.inst.cfg, 0.0, 0.0, W0);
    NetworkState plain{w.s.A / sigma, wf::assemble_coefficients(w.s.theta_hat1, w.inst.part, 0.0),
                       wf::assemble_coefficients(w.s.theta_hat2, w.inst.part, 0.0)};
    EXPECT_LT(rel_err(whitened, evaluate_snr(plain, w.inst.ch, w.inst.part, w.inst.cfg)), 1e-12);
}

TEST(Fractions, CrossRepresentation)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto w = wf_setup(300 + seed, 2, 8, 2);
        const double snr = snr_of(w, w.s);
        const auto f1 = wf::build_theta1_fraction(w.inst.ch, w.s, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W);
        const ComplexVector v1 = lifted(w.s.theta_hat1);
        EXPECT_LT(rel_err(qf(f1.F1, v1) / qf(f1.F2, v1), snr), 1e-10);
        const auto f2 = wf::build_theta2_fraction(w.inst.ch, w.s, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W);
        const ComplexVector v2 = lifted(w.s.theta_hat2.conjugate());
        EXPECT_LT(rel_err(qf(f2.H1, v2) / qf(f2.H2, v2), snr), 1e-10);
        const ComplexMatrix spread = wf::spread_corner(f2.H2);
        EXPECT_LT(rel_err(qf(spread, v2), qf(f2.H2, v2)), 1e-12);
        EXPECT_GT(numerics::eig_hermitian(spread).values.minCoeff(), 0.0);
    }
}

TEST(Gpi, IdentityDenominatorGivesDominantEigenvector)
{
    Rng rng(9);
    const ComplexMatrix g = random_matrix(rng, 6, 6);
    const ComplexMatrix F1 = g * g.adjoint();
    const auto r = wf::gpi(F1, ComplexMatrix::Identity(6, 6), {1e-12, 5000});
    const auto e = numerics::eig_hermitian(F1);
    const ComplexVector top = e.vectors.col(5);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(std::abs(top.dot(r.v)), 1.0, 1e-9);
    EXPECT_LE(r.max_quotient_drop, 1e-12);
}

TEST(Gpi, StartAtFixedPoint)
{
    Rng rng(10);
    const ComplexMatrix g = random_matrix(rng, 5, 5);
    const ComplexMatrix F1 = g * g.adjoint();
    const ComplexVector top = numerics::eig_hermitian(F1).vectors.col(4);
    const auto r = wf::gpi(F1, ComplexMatrix::Identity(5, 5), {1e-6, 100}, top);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LT((r.v - top).norm(), 1e-6);
}

TEST(Gpi, QuotientAscends)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto w = wf_setup(400 + seed, 2, 16, 4);
        const auto r = wf::gpi_theta1(w.inst.ch, w.s, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W);
        EXPECT_LE(r.max_quotient_drop, 1e-9) << seed;
        for (int i = 0; i < 16; ++i)
            EXPECT_NEAR(std::abs(r.theta_hat1(i)), 1.0, 1e-12);
    }
}

TEST(Gpi, ConfigValidation)
{
    EXPECT_THROW(wf::gpi(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2), {0.0, 10}),
                 std::invalid_argument);
    EXPECT_THROW(wf::gpi(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2), {1e-6, 0}),
                 std::invalid_argument);
}

TEST(Grr, EigenResidual)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto w = wf_setup(500 + seed, 2, 16, 4);
        const auto r = wf::grr_theta2(w.inst.ch, w.s, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W);
        const auto f = wf::build_theta2_fraction(w.inst.ch, w.s, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W);
        EXPECT_LT(rel_err(numerics::rayleigh_quotient(f.H1, wf::spread_corner(f.H2), r.v), r.quotient), 1e-9);
        for (int i = 0; i < 16; ++i)
            EXPECT_NEAR(std::abs(r.theta_hat2(i)), 1.0, 1e-12);
    }
}

TEST(Grr, EqualPairProjectsToUnitPhases)
{
    const auto top = numerics::generalized_eig_max(ComplexMatrix::Identity(5, 5), ComplexMatrix::Identity(5, 5));
    const ComplexVector t = wf::project_phases(top.vector, true);
    EXPECT_LT((t - ComplexVector::Ones(4)).norm(), 1e-15);
}

TEST(PhaseSteps, GridOracleSingleAntenna)
{
    // (M, N, K) = (1, 2, 0): GPI and GRR against the 16-point grid, relay held fixed.
    const int points = 16;
    int ok1 = 0, ok2 = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto w = wf_setup(600 + seed, 1, 2, 0);
        double best1 = 0.0, best2 = 0.0;
        for (int a = 0; a < points; ++a)
            for (int b = 0; b < points; ++b) {
                ComplexVector t(2);
                t << std::polar(1.0, 2 * M_PI * a / points), std::polar(1.0, 2 * M_PI * b / points);
                wf::PhaseState x = w.s, y = w.s;
                x.theta_hat1 = t;
                y.theta_hat2 = t;
                best1 = std::max(best1, achievable_rate(snr_of(w, x)));
                best2 = std::max(best2, achievable_rate(snr_of(w, y)));
            }
        wf::PhaseState x = w.s, y = w.s;
        x.theta_hat1 = wf::gpi_theta1(w.inst.ch, w.s, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W).theta_hat1;
        y.theta_hat2 = wf::grr_theta2(w.inst.ch, w.s, w.inst.part, w.inst.cfg, w.beta1, w.beta2, w.W).theta_hat2;
        ok1 += achievable_rate(snr_of(w, x)) >= 0.95 * best1;
        ok2 += achievable_rate(snr_of(w, y)) >= 0.95 * best2;
    }
    EXPECT_EQ(ok1, 50);
    EXPECT_EQ(ok2, 50);
}

TEST(Optimize, SinglePass)
{
    const auto inst = random_instance(11, 2, 8, 2);
    wf::OptimizerConfig opt;
    opt.max_iterations = 1;
    const auto r = wf::optimize(inst.ch, inst.part, inst.cfg, opt);
    EXPECT_EQ(r.rate_trace.size(), 2u);
    EXPECT_EQ(r.iterations, 1);
}

TEST(Optimize, Invariants)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = random_instance(700 + seed, 2, 16, 4, 20.0);
        wf::OptimizerConfig opt;
        opt.seed = seed;
        const auto r = wf::optimize(inst.ch, inst.part, inst.cfg, opt);
        for (std::size_t i = 1; i < r.rate_trace.size(); ++i)
            EXPECT_GE(r.rate_trace[i], r.rate_trace[i - 1]);
        for (int i = 0; i < 16; ++i) {
            EXPECT_NEAR(std::abs(r.phases.theta_hat1(i)), 1.0, 1e-9);
            EXPECT_NEAR(std::abs(r.phases.theta_hat2(i)), 1.0, 1e-9);
        }
        EXPECT_LT(rel_err(power_relay(r.state, inst.ch, inst.part, inst.cfg), inst.cfg.gamma_r()), 1e-9);
        EXPECT_LE(check_feasibility(r.state, inst.ch, inst.part, inst.cfg).worst(), 1e-6);
        EXPECT_DOUBLE_EQ(achievable_rate(evaluate_snr(r.state, inst.ch, inst.part, inst.cfg)), r.rate_trace.back());
        EXPECT_LE(r.beta1, r.nominal.beta1);
        EXPECT_LE(r.beta2, r.nominal.beta2);

        const auto again = wf::optimize(inst.ch, inst.part, inst.cfg, opt);
        EXPECT_EQ(again.rate_trace, r.rate_trace);
    }
}

TEST(Optimize, NotAboveHighPerformanceMethod)
{
    // Shared draws at (2, 16, 4); the SDR-based method should come out ahead.
    int ok = 0;
    const int trials = 100;
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
        const auto inst = random_instance(800 + seed, 2, 16, 4);
        wf::OptimizerConfig wo;
        wo.seed = seed;
        hp::OptimizerConfig ho;
        ho.seed = seed;
        const double w = wf::optimize(inst.ch, inst.part, inst.cfg, wo).rate_trace.back();
        const double h = hp::optimize(inst.ch, inst.part, inst.cfg, ho).rate_trace.back();
        ok += w <= h + 0.05;
    }
    EXPECT_GE(ok, 90);
}
