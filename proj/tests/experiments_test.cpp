#include "hirs/experiments.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hirs;
using namespace hirs::exp;

namespace {

int error_line(const std::string &text)
{
    try {
        parse_config(text);
    } catch (const ConfigError &e) {
        return e.line();
    }
    return -1;
}

ExperimentConfig small_sweep()
{
    return parse_config("M=2\nN=4\nK=1\nvalues=0,20\ntrials=2\nseed=7\n"
                        "methods=relay_only,passive_unit,random_phase,wf_gpi_grr\nmax_iterations=5\n");
}

std::string csv(const std::vector<TrialRow> &rows)
{
    std::ostringstream os;
    write_sweep_csv(os, rows);
    return os.str();
}

} // namespace

TEST(Config, EmptyGivesDefaults)
{
    const ExperimentConfig c = parse_config("");
    EXPECT_EQ(c.M, 2);
    EXPECT_EQ(c.N, 32);
    EXPECT_EQ(c.K, 4);
    EXPECT_EQ(c.sigma2_dbm, -80.0);
    EXPECT_EQ(c.geometry.irs, (Point3{-10.0, 50.0, 20.0}));
    EXPECT_EQ(c.geometry.relay, (Point3{10.0, 50.0, 10.0}));
    EXPECT_EQ(c.sweep, SweepParam::ps);
    EXPECT_EQ(c.trials, 100);
    EXPECT_EQ(c.methods.size(), bench::kAllSchemes.size());
}

TEST(Config, ParsesCommentsAndLists)
{
    const ExperimentConfig c = parse_config("# header\n  N = 16 # trailing\nK=2\nsweep=pi\nvalues=10, 20.5\n"
                                            "relay=5,40,3\nmethods=hp_sdr_fp,relay_only\nseed=123\n");
    EXPECT_EQ(c.N, 16);
    EXPECT_EQ(c.sweep, SweepParam::pi);
    EXPECT_EQ(c.values, (std::vector<double>{10.0, 20.5}));
    EXPECT_EQ(c.geometry.relay, (Point3{5.0, 40.0, 3.0}));
    EXPECT_EQ(c.methods, (std::vector<Scheme>{Scheme::hp_sdr_fp, Scheme::relay_only}));
    EXPECT_EQ(c.seed, 123u);
    EXPECT_EQ(c.system_at(20.5).Pi(), dbm_to_watts(20.5));
}

TEST(Config, SerializeIsCanonical)
{
    const std::string text = "values=0,0.1,1e-3\nK=3\n# c\nsigma2_dbm=-90\nalpha_sr=3.5\ntolerance=0.0001\n";
    const std::string canon = serialize_config(parse_config(text));
    EXPECT_EQ(serialize_config(parse_config(canon)), canon);
    EXPECT_EQ(serialize_config(parse_config("")), serialize_config(ExperimentConfig{}));
    EXPECT_NE(canon.find("values=0,0.1,0.001\n"), std::string::npos);
    const ExperimentConfig back = parse_config(canon);
    EXPECT_EQ(back.optimizer.tolerance, 1e-4);
    EXPECT_EQ(back.geometry.alpha_sr, 3.5);
}

TEST(Config, ErrorsCarryLineNumbers)
{
    EXPECT_EQ(error_line("M=2\nbogus=1\n"), 2);
    EXPECT_EQ(error_line("M=2\n\nN=abc\n"), 3);
    EXPECT_EQ(error_line("N=32\nK=40\n"), 2);
    EXPECT_EQ(error_line("K=4\nK=5\n"), 2);
    EXPECT_EQ(error_line("trials=0\n"), 1);
    EXPECT_EQ(error_line("methods=hp_sdr_fp,nope\n"), 1);
    EXPECT_EQ(error_line("sweep=k\nvalues=0,2.5\n"), 2);
    EXPECT_EQ(error_line("sweep=k\nN=8\nvalues=0,9\n"), 3);
    EXPECT_EQ(error_line("no equals sign\n"), 1);
    EXPECT_EQ(error_line("values=\n"), 1);
    EXPECT_THROW(parse_config("relay=0,0,0\n"), ConfigError);
}

TEST(Sweep, RowsOrderedWithSharedDraws)
{
    const ExperimentConfig c = small_sweep();
    const auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 2u * 2u * 4u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t point = i / 8, trial = (i / 4) % 2, method = i % 4;
        EXPECT_EQ(rows[i].value, c.values[point]);
        EXPECT_EQ(rows[i].seed, trial_seed(c.seed, point, static_cast<int>(trial)));
        EXPECT_EQ(rows[i].method, c.methods[method]);
        EXPECT_EQ(rows[i].channel_hash, rows[i - method].channel_hash);
        EXPECT_EQ(rows[i].status, "ok");
        EXPECT_LE(rows[i].feasibility, 1e-6);
        EXPECT_EQ(rows[i].wall_ms, 0.0);
    }
    EXPECT_NE(rows[0].channel_hash, rows[4].channel_hash);
}

TEST(Sweep, ByteIdenticalOnRerun)
{
    const ExperimentConfig c = small_sweep();
    const std::string first = csv(run_sweep(c));
    EXPECT_EQ(first, csv(run_sweep(c)));
    EXPECT_EQ(first.substr(0, first.find('\n')), "sweep_param,value,seed,method,rate_bps_hz,iterations,wall_ms,status");

    ExperimentConfig other = c;
    other.seed = 8;
    EXPECT_NE(first, csv(run_sweep(other)));
}

TEST(Sweep, ActiveCountSweepChangesPartition)
{
    ExperimentConfig c = parse_config("M=2\nN=4\nsweep=k\nvalues=0,2\ntrials=1\nmethods=wf_gpi_grr\nmax_iterations=3\n");
    EXPECT_EQ(c.system_at(2.0).K(), 2);
    const auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].status, "ok");
    EXPECT_EQ(rows[1].status, "ok");
}

TEST(Summary, MeanAndStandardError)
{
    std::vector<TrialRow> rows;
    for (double r : {1.0, 2.0, 3.0, 4.0})
        rows.push_back({SweepParam::ps, 10.0, 0, Scheme::relay_only, r, 0, 0.0, "ok", 0, 0.0});
    rows.push_back({SweepParam::ps, 10.0, 0, Scheme::relay_only, 99.0, 0, 0.0, "solver-numerical-failure", 0, 0.0});
    rows.push_back({SweepParam::ps, 20.0, 0, Scheme::relay_only, 5.0, 0, 0.0, "ok", 0, 0.0});
    const auto s = summarize(rows);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_DOUBLE_EQ(s[0].mean, 2.5);
    EXPECT_NEAR(s[0].std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(s[0].count, 4);
    EXPECT_EQ(s[1].count, 1);
    EXPECT_EQ(s[1].std_error, 0.0);
}

TEST(Convergence, TracesAreMonotone)
{
    ExperimentConfig c = parse_config("M=2\nN=4\nK=1\nvalues=10\nmax_iterations=6\n");
    const auto traces = run_convergence(c);
    ASSERT_EQ(traces.size(), 2u);
    for (const auto &t : traces) {
        EXPECT_EQ(t.status, "ok");
        ASSERT_GE(t.rates.size(), 2u);
        for (std::size_t i = 1; i < t.rates.size(); ++i)
            EXPECT_GE(t.rates[i], t.rates[i - 1]);
    }
    std::ostringstream os;
    write_convergence_csv(os, traces);
    EXPECT_EQ(os.str().substr(0, 28), "iteration,method,rate_bps_hz");
}
