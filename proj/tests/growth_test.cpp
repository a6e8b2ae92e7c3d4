#include "consensus/errors.hpp"
#include "consensus/growth.hpp"
#include "consensus/gantmacher.hpp"
#include "test_support.hpp"

#include <boost/math/special_functions/zeta.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace consensus;
namespace ts = testing_support;

TEST(Gaps, Formulas) {
    const GapRule bounded{GapMode::Bounded, 2.5};
    for (std::size_t i : {0u, 1u, 100u}) EXPECT_EQ(bounded.gap(i), 3u);

    const GapRule log1{GapMode::Log, 1.0};
    const std::vector<std::size_t> expect = {1, 2, 2, 2, 2, 2, 3};
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(log1.gap(i), expect[i]) << i;

    const GapRule loglog{GapMode::LogLog, 1.0};
    EXPECT_EQ(loglog.gap(0), 1u);
    EXPECT_EQ(loglog.gap(1000000), 3u);
    // Oracle over a range.
    for (std::size_t i = 0; i < 5000; i += 7) {
        const double x = static_cast<double>(i);
        EXPECT_EQ(log1.gap(i), static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(x + 2)))));
        EXPECT_EQ(loglog.gap(i), static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(std::log(x + 3))))));
    }
}

TEST(Generator, FactorsFollowSpec) {
    ts::Rng rng(61);
    for (int trial = 0; trial < 40; ++trial) {
        GeneratorSpec spec;
        spec.n = ts::uniform_size(rng, 1, 6);
        spec.seed = rng();
        spec.steps = 300;
        spec.delta = ts::uniform(rng, 0.01, 1.0 / static_cast<double>(spec.n));
        spec.gaps = {trial % 2 ? GapMode::Log : GapMode::Bounded, ts::uniform(rng, 1.0, 3.0)};
        if (trial % 3 == 0) {
            spec.activation = Activation::RandomSubset;
            spec.activation_probability = ts::uniform(rng, 0.0, 1.0);
        }
        const auto seq = generate_sequence(spec);

        std::size_t expected_t = 0;
        for (std::size_t i = 0; i < seq.activation_times().size(); ++i) {
            EXPECT_EQ(seq.activation_times()[i], expected_t);
            expected_t += spec.gaps.gap(i);
        }
        for (std::size_t t = 0; t < spec.steps; ++t) {
            const auto f = seq.at(t);
            if (!seq.is_active(t)) {
                EXPECT_EQ(f.matrix(), Eigen::MatrixXd::Identity(spec.n, spec.n));
                continue;
            }
            for (std::size_t i = 0; i < spec.n; ++i) {
                EXPECT_GT(f(i, i), 0.0);
                EXPECT_NEAR(f.matrix().row(i).sum(), 1.0, 1e-12);
                for (std::size_t j = 0; j < spec.n; ++j)
                    if (f(i, j) > 0.0) EXPECT_GE(f(i, j), spec.delta - 1e-15);
            }
            if (spec.activation == Activation::Full) EXPECT_EQ(pattern_of(f), ZeroPattern::full(spec.n));
        }
    }
}

TEST(Generator, SeedDeterminismAndRandomAccess) {
    GeneratorSpec spec{.n = 4, .seed = 99, .steps = 200, .delta = 0.2, .gaps = {GapMode::Log, 1.0}};
    const auto a = generate_sequence(spec);
    const auto b = generate_sequence(spec);
    std::vector<Eigen::MatrixXd> forward;
    for (std::size_t t = 0; t < spec.steps; ++t) forward.push_back(a.at(t).matrix());
    for (std::size_t t = spec.steps; t-- > 0;) EXPECT_EQ(b.at(t).matrix(), forward[t]);
    for (int k = 0; k < 50; ++k) {
        const std::size_t t = (k * 37) % spec.steps;
        EXPECT_EQ(a.at(t).matrix(), forward[t]);
    }
    spec.seed = 100;
    const auto c = generate_sequence(spec);
    EXPECT_NE(c.at(0).matrix(), forward[0]);
    EXPECT_ERROR_CODE(a.at(spec.steps), ErrorCode::SourceExhausted);
}

TEST(Generator, BasePatternRespected) {
    ZeroPattern base(3);
    for (std::size_t i = 0; i < 3; ++i) base.set(i, i);
    base.set(1, 0);
    base.set(2, 1);
    GeneratorSpec spec{.n = 3, .seed = 5, .steps = 50, .delta = 0.3, .base_pattern = base};
    const auto seq = generate_sequence(spec);
    for (std::size_t t = 0; t < 50; ++t) EXPECT_EQ(pattern_of(seq.at(t)), base);
}

TEST(Generator, Errors) {
    EXPECT_ERROR_CODE(generate_sequence({.n = 4, .delta = 0.3}), ErrorCode::InvalidDelta);
    EXPECT_ERROR_CODE(generate_sequence({.n = 3, .delta = 0.0}), ErrorCode::InvalidDelta);
    EXPECT_NO_THROW(generate_sequence({.n = 4, .delta = 0.25}));
    EXPECT_ERROR_CODE(generate_sequence({.n = 0}), ErrorCode::ParameterOutOfRange);
    EXPECT_ERROR_CODE(generate_sequence({.n = 2, .steps = 0}), ErrorCode::ParameterOutOfRange);
    EXPECT_ERROR_CODE(generate_sequence({.n = 2, .gaps = {GapMode::Log, 0.0}}), ErrorCode::ParameterOutOfRange);
    EXPECT_ERROR_CODE(generate_sequence({.n = 2, .base_pattern = ZeroPattern(2)}), ErrorCode::MissingPositiveDiagonal);
    EXPECT_ERROR_CODE(generate_sequence({.n = 2, .base_pattern = ZeroPattern::full(3)}), ErrorCode::DimensionMismatch);
    EXPECT_ERROR_CODE(
        generate_sequence({.n = 2, .activation = Activation::RandomSubset, .activation_probability = 1.5}),
        ErrorCode::ParameterOutOfRange);
}

TEST(Series, LogClassification) {
    for (double delta : {0.30, 0.35, 0.40, 0.45}) {
        const auto r = series_partial_sums(SeriesMode::Log, delta, 1.0, 1000000);
        const bool converging = delta < std::exp(-1.0);
        EXPECT_NEAR(r.exponent, std::log(delta), 1e-15);
        EXPECT_EQ(r.verdict, converging ? Trend::Converging : Trend::Diverging) << delta;
        EXPECT_EQ(r.empirical, converging ? Trend::Converging : Trend::Diverging) << delta;
        EXPECT_EQ(r.near_boundary, delta == 0.35);
        ASSERT_EQ(r.checkpoints.size(), 6u);
        for (std::size_t k = 1; k < r.checkpoints.size(); ++k)
            EXPECT_GT(r.checkpoints[k].partial_sum, r.checkpoints[k - 1].partial_sum);
        for (std::size_t k = 1; k < r.samples.size(); ++k) {
            EXPECT_GT(r.samples[k].n, r.samples[k - 1].n);
            EXPECT_GT(r.samples[k].partial_sum, r.samples[k - 1].partial_sum);
        }
        EXPECT_EQ(r.samples.back().n, 1000000u);
        EXPECT_EQ(r.tail_corrected_limit.has_value(), converging);
        if (converging) {
            const double zeta = boost::math::zeta(-r.exponent);
            EXPECT_NEAR(*r.tail_corrected_limit, zeta, 1e-9 * zeta);
            EXPECT_LT(r.checkpoints.back().partial_sum, zeta);
        }
    }
}

TEST(Series, PartialSumAgainstDirectSum) {
    const auto r = series_partial_sums(SeriesMode::Log, 0.5, 2.0, 1000);
    long double direct = 0;
    for (int n = 1; n <= 1000; ++n) direct += std::pow(static_cast<long double>(n), 2.0L * std::log(0.5L));
    EXPECT_NEAR(r.checkpoints.back().partial_sum, static_cast<double>(direct), 1e-13);
}

TEST(Series, LogLogDiverges) {
    const auto r = series_partial_sums(SeriesMode::LogLog, 0.1, 1.0, 1000000);
    EXPECT_EQ(r.verdict, Trend::Diverging);
    ASSERT_EQ(r.interval_gains.size(), 5u);
    EXPECT_TRUE(r.gains_exceed_bounds);
    for (std::size_t k = 0; k < r.interval_gains.size(); ++k) {
        EXPECT_GT(r.interval_lower_bounds[k], 0.0);
        EXPECT_GT(r.interval_gains[k], r.interval_lower_bounds[k]);
    }
    // Gains per decade grow.
    for (std::size_t k = 1; k < r.interval_gains.size(); ++k) EXPECT_GT(r.interval_gains[k], r.interval_gains[k - 1]);
}

TEST(Series, Errors) {
    EXPECT_ERROR_CODE(series_partial_sums(SeriesMode::Log, 1.0, 1.0, 100), ErrorCode::ParameterOutOfRange);
    EXPECT_ERROR_CODE(series_partial_sums(SeriesMode::Log, 0.5, 0.0, 100), ErrorCode::ParameterOutOfRange);
    EXPECT_ERROR_CODE(series_partial_sums(SeriesMode::Log, 0.5, 1.0, 9), ErrorCode::ParameterOutOfRange);
}

TEST(Experiment, BoundedGapsConverge) {
    GeneratorSpec spec{.n = 3, .seed = 7, .delta = 0.1, .gaps = {GapMode::Bounded, 3.0}};
    const auto r = growth_experiment(spec, 20000, 1e-9);
    EXPECT_TRUE(r.schedule.stabilized);
    EXPECT_TRUE(r.reached_consensus);
    EXPECT_TRUE(r.delta_floor_holds);
    EXPECT_FALSE(r.hypothesis_at_risk);
    EXPECT_GT(r.designed_series, 0.0);
    EXPECT_GT(r.measured_delta_sum, 0.0);
    EXPECT_LE(r.steps_to_converge, 20000u);
    for (auto g : r.gaps) EXPECT_EQ(g, 3u);
}

TEST(Experiment, HypothesisFlag) {
    GeneratorSpec spec{.n = 2, .seed = 8, .delta = 0.2, .gaps = {GapMode::Log, 1.0}};
    const auto r = growth_experiment(spec, 2000, 1e-9);
    EXPECT_TRUE(r.hypothesis_at_risk);
    EXPECT_TRUE(r.delta_floor_holds);
    spec.delta = 0.45;
    EXPECT_FALSE(growth_experiment(spec, 2000, 1e-9).hypothesis_at_risk);
}

TEST(Threshold, Constants) {
    const auto a = check_delta_threshold(0.34);
    EXPECT_EQ(a.max_positive_entries, 2u);
    EXPECT_FALSE(a.above_inv_e);
    EXPECT_NEAR(a.inv_e, 0.36787944117144233, 1e-15);
    EXPECT_EQ(check_delta_threshold(0.25).max_positive_entries, 4u);
    EXPECT_EQ(check_delta_threshold(0.5).max_positive_entries, 2u);
    EXPECT_TRUE(check_delta_threshold(0.4).above_inv_e);
    EXPECT_EQ(check_delta_threshold(1.0).max_positive_entries, 1u);
    EXPECT_ERROR_CODE(check_delta_threshold(0.0), ErrorCode::ParameterOutOfRange);
    EXPECT_ERROR_CODE(check_delta_threshold(1.5), ErrorCode::ParameterOutOfRange);
}
