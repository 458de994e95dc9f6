#include <naqmd/observables.hpp>
#include <naqmd/simulation.hpp>

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace naqmd;

namespace {

TrajectoryRecord record_from(const std::vector<double>& time, const std::function<double(double)>& norm,
                             const std::function<double(double)>& distance = [](double) { return 2.0; })
{
    TrajectoryRecord r;
    r.time = time;
    r.orbital_norms.resize(1);
    for (double t : time) {
        const double n = norm(t);
        r.orbital_norms[0].push_back(n);
        r.norm.push_back(n);
        r.energy.push_back(0.0);
        r.distance.push_back(distance(t));
        r.absorption.push_back(0.0);
        r.norm_rate.push_back(0.0);
        r.energy_rate.push_back(0.0);
        r.field.push_back(0.0);
    }
    return r;
}

std::vector<double> uniform_grid(double t0, double t1, double dt)
{
    std::vector<double> t;
    for (int i = 0; t0 + i * dt <= t1 + 1e-12; ++i) {
        t.push_back(t0 + i * dt);
    }
    return t;
}

} // namespace

TEST(Ionization, NormDefinition)
{
    const auto grid = uniform_grid(0.0, 10.0, 1.0);
    EXPECT_EQ(ionization_probability(record_from(grid, [](double) { return 1.0; }), 10.0), 0.0);
    EXPECT_NEAR(ionization_probability(record_from(grid, [](double) { return 0.8; }), 10.0), 0.2, 1e-15);
    const double f = 0.03;
    const auto decay = record_from(uniform_grid(0.0, 50.0, 0.5), [f](double t) { return std::exp(-2.0 * f * t); });
    EXPECT_NEAR(ionization_probability(decay, 50.0), 1.0 - std::exp(-2.0 * f * 50.0), 1e-15);
}

TEST(Ionization, InterpolatesBetweenSamples)
{
    const std::vector<double> t{0.0, 1.0, 2.0};
    const std::vector<double> v{1.0, 0.8, 0.6};
    EXPECT_NEAR(value_at(t, v, 1.5), 0.7, 1e-15);
    EXPECT_EQ(value_at(t, v, 5.0), 0.6);
    EXPECT_EQ(value_at(t, v, -1.0), 1.0);
}

TEST(Record, ValidationRejectsRaggedOrUnorderedColumns)
{
    auto r = record_from(uniform_grid(0.0, 3.0, 1.0), [](double) { return 1.0; });
    EXPECT_NO_THROW(r.validate());
    auto ragged = r;
    ragged.energy.pop_back();
    EXPECT_THROW(ragged.validate(), ValidationError);
    auto unordered = r;
    unordered.time[2] = unordered.time[1];
    EXPECT_THROW(unordered.validate(), ValidationError);
}

TEST(SingleDouble, Examples)
{
    auto p = single_double(1.0, 1.0);
    EXPECT_EQ(p.single, 0.0);
    EXPECT_EQ(p.twofold, 0.0);
    p = single_double(0.5, 0.5);
    EXPECT_DOUBLE_EQ(p.single, 0.5);
    EXPECT_DOUBLE_EQ(p.twofold, 0.25);
    p = single_double(0.0, 1.0);
    EXPECT_DOUBLE_EQ(p.single, 1.0);
    EXPECT_DOUBLE_EQ(p.twofold, 0.0);
}

TEST(SingleDouble, PartitionOfProbability)
{
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double best_single = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double n1 = u(rng);
        const double n2 = i % 2 ? n1 : u(rng);
        const auto p = single_double(n1, n2);
        EXPECT_NEAR(p.single + p.twofold + n1 * n2, 1.0, 1e-15);
        EXPECT_GE(p.single, 0.0);
        EXPECT_LE(p.single, 1.0);
        EXPECT_GE(p.twofold, 0.0);
        EXPECT_LE(p.twofold, 1.0);
        if (i % 2) {
            EXPECT_NEAR(p.single, 2.0 * n1 * (1.0 - n1), 1e-15);
            EXPECT_NEAR(p.twofold, (1.0 - n1) * (1.0 - n1), 1e-15);
            best_single = std::max(best_single, p.single);
        }
    }
    EXPECT_LE(best_single, 0.5);
}

TEST(Fragmentation, BoundMoleculeNeverFragments)
{
    const auto r = record_from(uniform_grid(0.0, 100.0, 1.0), [](double) { return 0.9; },
                               [](double t) { return 2.0 + 0.05 * t; });
    const auto s = fragmentation_dissociation(r);
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_EQ(s.fragmentation[i], 0.0);
        EXPECT_EQ(s.dissociation[i], 0.0);
    }
}

TEST(Fragmentation, StepAtDissociationDistance)
{
    const auto grid = uniform_grid(0.0, 100.0, 1.0);
    const auto distance = [](double t) { return 2.0 + 0.1 * t; };
    const auto intact = fragmentation_dissociation(record_from(grid, [](double) { return 1.0; }, distance));
    const auto partial = fragmentation_dissociation(record_from(grid, [](double) { return 0.6; }, distance));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double expected = distance(grid[i]) >= 9.5 ? 1.0 : 0.0;
        EXPECT_EQ(intact.fragmentation[i], expected);
        EXPECT_EQ(intact.dissociation[i], expected);
        // Dissociation weight is the surviving norm, (1 - P_ion) P_frag.
        EXPECT_DOUBLE_EQ(partial.dissociation[i], 0.6 * expected);
    }
}

TEST(Cos2Fit, RecoversExactModel)
{
    std::vector<double> angles;
    std::vector<double> values;
    for (int k = 0; k <= 6; ++k) {
        const double theta = k * std::numbers::pi / 12.0;
        angles.push_back(theta);
        values.push_back(0.3 * std::pow(std::cos(theta), 2) + 0.1 * std::pow(std::sin(theta), 2));
    }
    const auto fit = cos2_fit(angles, values);
    EXPECT_NEAR(fit.parallel, 0.3, 1e-12);
    EXPECT_NEAR(fit.perpendicular, 0.1, 1e-12);
    EXPECT_LT(fit.residual, 1e-12);
}

TEST(Cos2Fit, IsotropicData)
{
    const std::vector<double> angles{0.0, 0.4, 0.9, 1.3};
    const std::vector<double> values(4, 0.17);
    const auto fit = cos2_fit(angles, values);
    EXPECT_NEAR(fit.parallel, 0.17, 1e-14);
    EXPECT_NEAR(fit.perpendicular, 0.17, 1e-14);
}

TEST(Cos2Fit, NoisyDataWithinStatisticalError)
{
    const double sigma = 0.01;
    std::vector<double> angles;
    Eigen::MatrixXd A(7, 2);
    for (int k = 0; k < 7; ++k) {
        angles.push_back(k * std::numbers::pi / 12.0);
        A(k, 0) = std::pow(std::cos(angles[k]), 2);
        A(k, 1) = std::pow(std::sin(angles[k]), 2);
    }
    const Eigen::Matrix2d cov = sigma * sigma * (A.transpose() * A).inverse();
    const double err_par = std::sqrt(cov(0, 0));
    const double err_perp = std::sqrt(cov(1, 1));
    int within = 0;
    double sq_par = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, sigma);
        std::vector<double> values;
        for (int k = 0; k < 7; ++k) {
            values.push_back(0.3 * A(k, 0) + 0.1 * A(k, 1) + noise(rng));
        }
        const auto fit = cos2_fit(angles, values);
        within += std::abs(fit.parallel - 0.3) < 3.0 * err_par && std::abs(fit.perpendicular - 0.1) < 3.0 * err_perp;
        sq_par += std::pow(fit.parallel - 0.3, 2);
    }
    EXPECT_GE(within, 97);
    EXPECT_NEAR(std::sqrt(sq_par / 100.0), err_par, 0.3 * err_par);
}

TEST(Cos2Fit, RejectsBadInput)
{
    const std::vector<double> one{0.0};
    EXPECT_THROW(cos2_fit(one, one), ValidationError);
    const std::vector<double> angles{0.0, 1.0};
    const std::vector<double> values{0.0, 1.0, 2.0};
    EXPECT_THROW(cos2_fit(angles, values), ValidationError);
}

TEST(RateFit, ExponentialDecay)
{
    const double gamma = 2.5e-3;
    const auto r = record_from(uniform_grid(0.0, 800.0, 2.0), [gamma](double t) { return std::exp(-gamma * t); });
    const auto fit = rate_fit(r, 100.0, 700.0);
    EXPECT_NEAR(fit.rate_au, gamma, 1e-10);
    EXPECT_NEAR(fit.rate_per_s, gamma / au_time_seconds, 1e-10 / au_time_seconds);
    EXPECT_EQ(fit.points, 301u);
}

TEST(RateFit, ConstantNormGivesZero)
{
    const auto r = record_from(uniform_grid(0.0, 100.0, 1.0), [](double) { return 0.7; });
    EXPECT_NEAR(rate_fit(r, 10.0, 90.0).rate_au, 0.0, 1e-15);
}

TEST(RateFit, WindowShiftByOneCycleIsStable)
{
    // Cycle-averaged exponential decay with sub-cycle steps, as produced by a driven cw run.
    const double gamma = 1e-3;
    const double omega = 0.171;
    const double period = 2.0 * std::numbers::pi / omega;
    const auto norm = [&](double t) {
        return std::exp(-gamma * t - 0.5 * gamma * std::sin(2.0 * omega * t) / (2.0 * omega));
    };
    const auto r = record_from(uniform_grid(0.0, 2000.0, 0.5), norm);
    const double start = default_rate_window_start(3.0 * period, period);
    EXPECT_NEAR(start, 5.0 * period, 1e-12);
    const double a = rate_fit(r, start, 2000.0).rate_au;
    const double b = rate_fit(r, start + period, 2000.0).rate_au;
    EXPECT_LT(std::abs(a - b), 0.05 * a);
    EXPECT_NEAR(a, gamma, 0.02 * gamma);
}

TEST(RateFit, MatchesAveragedLogarithmicDerivative)
{
    const double gamma = 4e-3;
    std::vector<double> time = uniform_grid(0.0, 600.0, 0.25);
    const auto r = record_from(time, [gamma](double t) { return 0.9 * std::exp(-gamma * t); });
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 1; i + 1 < time.size(); ++i) {
        if (time[i] >= 100.0 && time[i] <= 500.0) {
            const double dn = (r.norm[i + 1] - r.norm[i - 1]) / (time[i + 1] - time[i - 1]);
            sum += -dn / r.norm[i];
            ++count;
        }
    }
    EXPECT_NEAR(rate_fit(r, 100.0, 500.0).rate_au, sum / count, 0.02 * gamma);
}

TEST(RateFit, RejectsDegenerateWindow)
{
    const auto r = record_from(uniform_grid(0.0, 10.0, 1.0), [](double) { return 1.0; });
    EXPECT_THROW(rate_fit(r, 5.0, 5.2), ValidationError);
}

TEST(EnsembleAverage, Examples)
{
    const std::vector<double> same(10, 0.42);
    auto m = ensemble_average(same);
    EXPECT_DOUBLE_EQ(m.mean, 0.42);
    EXPECT_NEAR(m.standard_error, 0.0, 1e-15);
    const std::vector<double> half{0.0, 1.0, 0.0, 1.0};
    EXPECT_DOUBLE_EQ(ensemble_average(half).mean, 0.5);

    std::mt19937_64 rng(73);
    std::bernoulli_distribution coin(0.3);
    std::vector<double> draws;
    for (int i = 0; i < 1000; ++i) {
        draws.push_back(coin(rng) ? 1.0 : 0.0);
    }
    m = ensemble_average(draws);
    EXPECT_NEAR(m.mean, 0.3, 0.05);
    EXPECT_NEAR(m.standard_error, std::sqrt(0.3 * 0.7 / 1000.0), 3e-3);
}

TEST(EnsembleAverage, JackknifeMatchesSampleStandardError)
{
    const std::vector<double> v{0.1, 0.5, 0.3, 0.9, 0.2};
    double mean = 0.0;
    for (double x : v) {
        mean += x / 5.0;
    }
    double var = 0.0;
    for (double x : v) {
        var += (x - mean) * (x - mean) / 4.0;
    }
    EXPECT_NEAR(ensemble_average(v).standard_error, std::sqrt(var / 5.0), 1e-15);
}

TEST(PairwiseSum, ExactOnRepresentableValues)
{
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) {
        v.push_back(0.125 * i);
    }
    EXPECT_EQ(pairwise_sum(v), 0.125 * 999.0 * 1000.0 / 2.0);
    EXPECT_EQ(pairwise_sum(std::span<const double>{}), 0.0);
}

TEST(Plateau, FlagsDecayingNormAtFinalTime)
{
    const auto flat = record_from(uniform_grid(0.0, 100.0, 1.0), [](double) { return 0.8; });
    EXPECT_TRUE(check_plateau(flat, 100.0));
    auto falling = record_from(uniform_grid(0.0, 100.0, 1.0), [](double t) { return std::exp(-1e-3 * t); });
    for (std::size_t i = 0; i < falling.size(); ++i) {
        falling.norm_rate[i] = -1e-3 * falling.norm[i];
    }
    EXPECT_FALSE(check_plateau(falling, 100.0));
}

TEST(Ensemble, AveragesProbabilitiesOverTrajectories)
{
    const auto grid = uniform_grid(0.0, 100.0, 1.0);
    std::vector<TrajectoryRecord> records;
    records.push_back(record_from(grid, [](double t) { return 1.0 - 0.002 * t; }, [](double t) { return 2.0 + 0.1 * t; }));
    records.push_back(record_from(grid, [](double) { return 1.0; }, [](double) { return 2.0; }));
    const auto s = average_ensemble(records);
    ASSERT_EQ(s.time.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        EXPECT_NEAR(s.ionization[i], 0.5 * 0.002 * t, 1e-15);
        const double frag = 2.0 + 0.1 * t >= 9.5 ? 1.0 : 0.0;
        EXPECT_NEAR(s.fragmentation[i], 0.5 * frag, 1e-15);
        EXPECT_NEAR(s.dissociation[i], 0.5 * frag * (1.0 - 0.002 * t), 1e-15);
        EXPECT_GE(s.ionization[i], 0.0);
        EXPECT_LE(s.ionization[i], 1.0);
    }
}

TEST(Ensemble, ParallelJobsAreScheduleIndependent)
{
    std::vector<double> serial(200);
    std::vector<double> threaded(200);
    const auto job = [](std::vector<double>& out) {
        return [&out](std::size_t i) { out[i] = std::sin(0.1 * static_cast<double>(i)); };
    };
    parallel_for(serial.size(), 1, job(serial));
    parallel_for(threaded.size(), 4, job(threaded));
    EXPECT_EQ(serial, threaded);
    EXPECT_EQ(pairwise_sum(serial), pairwise_sum(threaded));

    std::atomic<int> ran{0};
    EXPECT_THROW(parallel_for(20, 3,
                              [&](std::size_t i) {
                                  ++ran;
                                  if (i == 7) {
                                      throw std::runtime_error("job failed");
                                  }
                              }),
                 std::runtime_error);
}
