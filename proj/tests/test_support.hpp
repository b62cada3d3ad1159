#ifndef HIRS_TEST_SUPPORT_HPP
#define HIRS_TEST_SUPPORT_HPP

#include "hirs/core_model.hpp"
#include "hirs/seeding.hpp"

#include <random>

namespace hirs::fixtures {

struct Instance {
    SystemConfig cfg;
    ChannelSet ch;
    ElementPartition part;
    NetworkState state;
};

/// Random channels, partition and a generic (not necessarily feasible) state
/// whose active coefficients have non-unit amplitudes.
inline Instance random_instance(std::uint64_t seed, int m, int n, int k, double ps_dbm = 10.0,
                                double pr_dbm = 30.0, double pi_dbm = 30.0)
{
    Rng rng(seed);
    SystemConfig cfg = SystemConfig::from_dbm(m, n, k, ps_dbm, pr_dbm, pi_dbm);
    ChannelSet ch = draw_channels(rng, Geometry{}, cfg);
    ElementPartition part = ElementPartition::random(n, k, rng);
    NetworkState s;
    s.A = complex_gaussian_matrix(rng, m, m, 1.0);
    s.theta1 = random_unit_phases(rng, n);
    s.theta2 = random_unit_phases(rng, n);
    std::uniform_real_distribution<double> amp(0.5, 3.0);
    for (int i = 0; i < n; ++i)
        if (part.active(i)) {
            s.theta1(i) *= amp(rng);
            s.theta2(i) *= amp(rng);
        }
    return {cfg, ch, part, s};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace hirs::fixtures

#endif // HIRS_TEST_SUPPORT_HPP
