#include "consensus/errors.hpp"
#include "consensus/source.hpp"
#include "consensus/stochastic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace consensus;
namespace ts = testing_support;

namespace {

Eigen::MatrixXd m2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

const Eigen::MatrixXd kChain2 = m2(0.8, 0.2, 0.3, 0.7);

} // namespace

TEST(Validate, IdentityIsValid) {
    const auto a = validate(Eigen::MatrixXd::Identity(2, 2), 1e-10);
    EXPECT_EQ(a.size(), 2u);
    EXPECT_EQ(a.matrix(), Eigen::MatrixXd::Identity(2, 2));
}

TEST(Validate, RowSumViolationReportsRow) {
    try {
        validate(m2(0.5, 0.5, 0.3, 0.6), 1e-10, false);
        FAIL() << "no throw";
    } catch (const RowSumViolation& e) {
        EXPECT_EQ(e.code(), ErrorCode::RowSumViolation);
        EXPECT_EQ(e.row(), 1u);
        EXPECT_NEAR(e.deviation(), 0.1, 1e-15);
    }
}

TEST(Validate, RenormalizeDividesRows) {
    const auto a = validate(m2(0.5, 0.5, 0.3, 0.6), 1e-10, true);
    EXPECT_DOUBLE_EQ(a(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(a(0, 1), 0.5);
    EXPECT_NEAR(a(1, 0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(a(1, 1), 2.0 / 3.0, 1e-15);
}

TEST(Validate, Errors) {
    EXPECT_ERROR_CODE(validate(Eigen::MatrixXd::Ones(2, 3) / 3.0), ErrorCode::NonSquare);
    EXPECT_ERROR_CODE(validate(Eigen::MatrixXd(0, 0)), ErrorCode::NonSquare);
    EXPECT_ERROR_CODE(validate(m2(1.1, -0.1, 0.5, 0.5)), ErrorCode::NegativeEntry);
    EXPECT_ERROR_CODE(validate(m2(std::nan(""), 1.0, 0.5, 0.5)), ErrorCode::NegativeEntry);
    EXPECT_ERROR_CODE(validate(m2(0.0, 0.0, 0.5, 0.5), 1e-10, true), ErrorCode::ZeroRow);
    // Within tolerance passes.
    EXPECT_NO_THROW(validate(m2(0.5, 0.5 + 5e-11, 0.5, 0.5)));
}

TEST(Multiply, Examples) {
    const auto a = validate(kChain2);
    const auto id = StochasticMatrix::identity(2);
    EXPECT_EQ(multiply(a, id).matrix(), a.matrix());

    const auto sq = multiply(a, a);
    EXPECT_NEAR(sq(0, 0), 0.70, 1e-15);
    EXPECT_NEAR(sq(0, 1), 0.30, 1e-15);
    EXPECT_NEAR(sq(1, 0), 0.45, 1e-15);
    EXPECT_NEAR(sq(1, 1), 0.55, 1e-15);

    ts::Rng rng(11);
    Eigen::MatrixXd k(3, 3);
    for (int i = 0; i < 3; ++i) k.row(i) << 0.2, 0.5, 0.3;
    const auto kk = validate(k);
    for (int trial = 0; trial < 20; ++trial) {
        const auto b = validate(ts::random_stochastic(rng, 3));
        EXPECT_TRUE(multiply(b, kk).matrix().isApprox(k, 1e-14));
    }
    EXPECT_ERROR_CODE(multiply(a, StochasticMatrix::identity(3)), ErrorCode::DimensionMismatch);
}

TEST(Accumulate, BackwardAndForward) {
    const auto a0 = validate(kChain2);
    const auto a1 = validate(m2(1.0, 0.0, 0.6, 0.4));
    VectorSource seq({a0, a1, a0});

    EXPECT_EQ(backward_accumulate(seq, 1, 1).matrix(), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_EQ(forward_accumulate(seq, 2, 2).matrix(), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_EQ(backward_accumulate(seq, 1, 2).matrix(), a1.matrix());
    EXPECT_EQ(forward_accumulate(seq, 1, 2).matrix(), a1.matrix());

    const Eigen::MatrixXd fwd = a0.matrix() * a1.matrix();
    const Eigen::MatrixXd bwd = a1.matrix() * a0.matrix();
    ASSERT_FALSE(fwd.isApprox(bwd));
    EXPECT_TRUE(forward_accumulate(seq, 0, 2).matrix().isApprox(fwd, 1e-15));
    EXPECT_TRUE(backward_accumulate(seq, 0, 2).matrix().isApprox(bwd, 1e-15));

    ConstantSource constant(a0);
    const Eigen::MatrixXd cube = kChain2 * kChain2 * kChain2;
    EXPECT_TRUE(backward_accumulate(constant, 0, 3).matrix().isApprox(cube, 1e-15));
    EXPECT_TRUE(forward_accumulate(constant, 0, 3).matrix().isApprox(cube, 1e-15));

    EXPECT_ERROR_CODE(backward_accumulate(seq, 2, 1), ErrorCode::ParameterOutOfRange);
    EXPECT_ERROR_CODE(backward_accumulate(seq, 0, 4), ErrorCode::SourceExhausted);
}

TEST(Accumulate, BackwardRecursionProperty) {
    ts::Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = ts::uniform_size(rng, 2, 6);
        std::vector<StochasticMatrix> f;
        for (int t = 0; t < 6; ++t) f.push_back(validate(ts::random_stochastic(rng, n)));
        VectorSource seq(f);
        for (std::size_t t = 1; t < 6; ++t) {
            const auto next = backward_accumulate(seq, 1, t + 1);
            const auto rec = multiply(f[t], backward_accumulate(seq, 1, t));
            EXPECT_TRUE(next.matrix().isApprox(rec.matrix(), 1e-14));
        }
    }
}

TEST(Sources, VectorAndFunction) {
    EXPECT_ERROR_CODE(VectorSource({}), ErrorCode::MalformedInput);
    EXPECT_ERROR_CODE(VectorSource({StochasticMatrix::identity(2), StochasticMatrix::identity(3)}),
                      ErrorCode::DimensionMismatch);
    FunctionSource f(2, [](std::size_t) { return StochasticMatrix::identity(2); }, 4);
    EXPECT_EQ(f.available(10), 4u);
    EXPECT_ERROR_CODE(f.at(4), ErrorCode::SourceExhausted);
    ConstantSource c(StochasticMatrix::identity(2));
    EXPECT_EQ(c.available(10), 10u);
}

TEST(Patterns, PatternOf) {
    const ZeroPattern id = pattern_of(StochasticMatrix::identity(3));
    EXPECT_EQ(id, ZeroPattern::identity(3));
    EXPECT_EQ(pattern_of(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0)), ZeroPattern::full(3));

    Eigen::MatrixXd a(3, 3);
    a << 0.5, 0.5, 0, 0, 1, 0, 0, 0.2, 0.8;
    const ZeroPattern p = pattern_of(validate(a));
    const bool expected[3][3] = {{true, true, false}, {false, true, false}, {false, true, true}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(p(i, j), expected[i][j]);
    // Threshold is strict.
    EXPECT_FALSE(pattern_of(m2(1e-12, 1.0, 0.0, 1.0), 1e-12)(0, 0));
}

TEST(Patterns, Product) {
    ts::Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = ts::uniform_size(rng, 1, 70);
        const auto mask = ts::random_mask(rng, n, 0.1);
        const ZeroPattern p = ts::pattern_from_mask(mask);
        EXPECT_EQ(pattern_product(p, ZeroPattern::identity(n)), p);
        EXPECT_EQ(pattern_product(ZeroPattern::identity(n), p), p);
        const ZeroPattern sq = pattern_product(p, p);
        EXPECT_TRUE(p.is_subset_of(sq));
        EXPECT_EQ(ts::mask_of(sq), ts::bool_product(mask, mask));
    }

    ZeroPattern chain(3);
    for (std::size_t i = 0; i < 3; ++i) chain.set(i, i);
    chain.set(0, 1);
    chain.set(1, 2);
    const ZeroPattern sq = pattern_product(chain, chain);
    EXPECT_FALSE(chain(0, 2));
    EXPECT_TRUE(sq(0, 2));
    EXPECT_EQ(sq.count(), chain.count() + 1);
    EXPECT_ERROR_CODE(pattern_product(chain, ZeroPattern(2)), ErrorCode::DimensionMismatch);
}

TEST(Patterns, ProductMatchesFloatProduct) {
    ts::Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = ts::uniform_size(rng, 2, 8);
        const auto a = validate(ts::random_stochastic(rng, n, 0.5, ts::coin(rng, 0.5)));
        const auto b = validate(ts::random_stochastic(rng, n, 0.5, ts::coin(rng, 0.5)));
        EXPECT_EQ(pattern_of(multiply(a, b)), pattern_product(pattern_of(a), pattern_of(b)));
    }
}

TEST(Tau, Examples) {
    EXPECT_EQ(tau(m2(0.5, 0.5, 0.5, 0.5)), 0.0);
    EXPECT_EQ(tau(Eigen::MatrixXd::Identity(2, 2)), 1.0);
    EXPECT_NEAR(tau(kChain2), 0.5, 1e-15);
    EXPECT_NEAR(tau(kChain2), ts::tau_overlap(kChain2), 1e-15);
    EXPECT_EQ(tau(Eigen::MatrixXd::Ones(1, 1)), 0.0);
}

TEST(Tau, MatchesOverlapFormulaAndRange) {
    ts::Rng rng(4);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = ts::uniform_size(rng, 2, 8);
        const Eigen::MatrixXd a = ts::random_stochastic(rng, n, 0.4, false);
        const double t = tau(a);
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, 1.0);
        EXPECT_NEAR(t, ts::tau_overlap(a), 1e-14);
    }
}

TEST(Tau, ZeroExactlyOnConsensus) {
    ts::Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = ts::uniform_size(rng, 2, 8);
        Eigen::RowVectorXd row = ts::random_positive_stochastic(rng, n).row(0);
        Eigen::MatrixXd k = row.replicate(static_cast<Eigen::Index>(n), 1);
        const auto kk = validate(k);
        EXPECT_EQ(tau(kk), 0.0);
        EXPECT_TRUE(is_consensus(kk, 0.0));
        const auto a = validate(ts::random_stochastic(rng, n));
        EXPECT_EQ(tau(a) == 0.0, is_consensus(a, 0.0));
    }
}

TEST(Tau, SubmultiplicativeAndPosMinBound) {
    ts::Rng rng(7);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = ts::uniform_size(rng, 2, 8);
        const auto a = validate(ts::random_stochastic(rng, n, 0.4, false));
        const auto b = validate(ts::random_stochastic(rng, n, 0.4, false));
        const auto ab = multiply(a, b);
        EXPECT_LE(tau(ab), tau(a) * tau(b) + 1e-12);
        EXPECT_GE(pos_min(ab), pos_min(a) * pos_min(b) - 1e-12);
        const Eigen::VectorXd sums = ab.matrix().rowwise().sum();
        EXPECT_LE((sums.array() - 1.0).abs().maxCoeff(), static_cast<double>(n) * 1e-10);
    }
}

TEST(PosMin, Examples) {
    EXPECT_EQ(pos_min(StochasticMatrix::identity(3)), 1.0);
    Eigen::MatrixXd a(3, 3);
    a << 0.5, 0.5, 0, 0.1, 0.9, 0, 0, 0.2, 0.8;
    EXPECT_DOUBLE_EQ(pos_min(a), 0.1);
    const Eigen::MatrixXd half = m2(0.5, 0.5, 0.5, 0.5);
    EXPECT_DOUBLE_EQ(pos_min(half * half), 0.5);
    EXPECT_GE(pos_min(half * half), pos_min(half) * pos_min(half));

    ts::Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd r = ts::random_stochastic(rng, ts::uniform_size(rng, 1, 9), 0.5);
        EXPECT_EQ(pos_min(r), ts::pos_min_scan(r));
    }
}

TEST(RowSumNorm, Examples) {
    EXPECT_DOUBLE_EQ(row_sum_norm(kChain2), 1.0);
    EXPECT_EQ(row_sum_norm(Eigen::MatrixXd::Zero(3, 2)), 0.0);
    EXPECT_EQ(row_sum_norm(Eigen::MatrixXd(0, 0)), 0.0);
    EXPECT_DOUBLE_EQ(row_sum_norm(m2(0.3, 0.2, 0.1, 0.1)), 0.5);
    EXPECT_DOUBLE_EQ(row_sum_norm(m2(-0.3, 0.2, 0.1, 0.1)), 0.5);
}

TEST(Consensus, Predicates) {
    Eigen::MatrixXd k(3, 3);
    for (int i = 0; i < 3; ++i) k.row(i) << 0.1, 0.6, 0.3;
    EXPECT_TRUE(is_consensus(validate(k), 1e-9));
    EXPECT_FALSE(is_consensus(StochasticMatrix::identity(2), 1e-9));
    EXPECT_NEAR(column_spread(kChain2), 0.5, 1e-15);

    EXPECT_TRUE(is_type_symmetric(validate(m2(0.6, 0.4, 0.4, 0.6))));
    EXPECT_FALSE(is_type_symmetric(validate(m2(1.0, 0.0, 0.5, 0.5))));
    EXPECT_TRUE(is_type_symmetric(validate(m2(0.9, 0.1, 0.6, 0.4))));

    ts::Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd r = ts::random_stochastic(rng, 5, 0.5);
        const Eigen::MatrixXd s = 0.5 * (r + r.transpose());
        Eigen::MatrixXd sym = s;
        for (Eigen::Index i = 0; i < sym.rows(); ++i) sym.row(i) /= sym.row(i).sum();
        EXPECT_TRUE(is_type_symmetric(validate(sym)));
    }
}

TEST(ZeroPatternOps, Basics) {
    ZeroPattern p(130);
    EXPECT_EQ(p.count(), 0u);
    p.set(129, 0);
    p.set(3, 127);
    EXPECT_TRUE(p(129, 0));
    EXPECT_TRUE(p.transposed()(0, 129));
    EXPECT_FALSE(p.has_positive_diagonal());
    p.set(3, 127, false);
    EXPECT_EQ(p.count(), 1u);
    EXPECT_TRUE(ZeroPattern::identity(130).has_positive_diagonal());
    EXPECT_EQ(ZeroPattern::full(130).count(), 130u * 130u);
}
