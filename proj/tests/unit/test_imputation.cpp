#include "misscov/errors.hpp"
#include "misscov/imputation.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace misscov;
using misscov::testing::Gen;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Brute force: every candidate observing `channel`, sorted by (distance, index).
std::vector<std::pair<double, Eigen::Index>> brute_neighbors(const Eigen::MatrixXd& cands,
                                                             const Eigen::VectorXd& ranges,
                                                             const Eigen::VectorXd& x, Eigen::Index channel) {
    std::vector<std::pair<double, Eigen::Index>> out;
    for (Eigen::Index i = 0; i < cands.cols(); ++i) {
        if (std::isnan(cands(channel, i))) continue;
        out.emplace_back(heom_distance(x, cands.col(i), ranges), i);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(Heom, Examples) {
    const Eigen::Vector4d ones = Eigen::Vector4d::Ones();
    const Eigen::Vector4d x(0.1, 0.2, 0.3, 0.4);
    EXPECT_EQ(heom_distance(x, x, ones), 0.0);
    const Eigen::Vector4d y = Eigen::Vector4d::Constant(kNaN);
    EXPECT_EQ(heom_distance(x, y, ones), 2.0);
    EXPECT_DOUBLE_EQ(heom_distance(Eigen::VectorXd::Constant(1, 0.2), Eigen::VectorXd::Constant(1, 0.7),
                                   Eigen::VectorXd::Ones(1)),
                     0.5);
}

TEST(Heom, RangeNormalizationAndSymmetry) {
    Gen gen(51);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x = gen.gaussian(5, 1);
        Eigen::VectorXd y = gen.gaussian(5, 1);
        if (gen.coin(0.5)) x(gen.integer(0, 4)) = kNaN;
        if (gen.coin(0.5)) y(gen.integer(0, 4)) = kNaN;
        Eigen::VectorXd ranges(5);
        for (Eigen::Index a = 0; a < 5; ++a) ranges(a) = gen.uniform(0.5, 3.0);
        double expected = 0.0;
        for (Eigen::Index a = 0; a < 5; ++a) {
            const double d = (std::isnan(x(a)) || std::isnan(y(a))) ? 1.0 : (x(a) - y(a)) / ranges(a);
            expected += d * d;
        }
        EXPECT_NEAR(heom_distance(x, y, ranges), std::sqrt(expected), 1e-14);
        EXPECT_EQ(heom_distance(x, y, ranges), heom_distance(y, x, ranges));
    }
}

TEST(NeighborPool, RangesAndConstantChannelGuard) {
    Eigen::MatrixXd c(3, 4);
    c << 1.0, 3.0, kNaN, 2.0,
         5.0, 5.0, 5.0, 5.0,
         kNaN, kNaN, -1.0, 4.0;
    const NeighborPool pool(c, 1);
    EXPECT_EQ(pool.ranges()(0), 2.0);
    EXPECT_EQ(pool.ranges()(1), 1.0);
    EXPECT_EQ(pool.ranges()(2), 5.0);
    EXPECT_EQ(pool.observed_count(0), 3);
    EXPECT_EQ(pool.observed_count(2), 2);
}

TEST(NeighborPool, SquaredDistancesMatchHeom) {
    Gen gen(52);
    Eigen::MatrixXd c = gen.gaussian(4, 30);
    for (Eigen::Index i = 0; i < c.cols(); ++i) {
        if (gen.coin(0.3)) c(gen.integer(0, 3), i) = kNaN;
    }
    const NeighborPool pool(c, 3);
    Eigen::VectorXd x = gen.gaussian(4, 1);
    x(1) = kNaN;
    const Eigen::VectorXd d2 = pool.squared_distances(x);
    for (Eigen::Index i = 0; i < c.cols(); ++i) {
        const double d = heom_distance(x, c.col(i), pool.ranges());
        EXPECT_NEAR(d2(i), d * d, 1e-12);
    }
}

TEST(KnnImpute, TwoNeighborWeightedExample) {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, 2.0,
         0.0, 3.0;
    const NeighborPool pool(c, 2);
    const std::vector<Neighbor> nbrs{{0, 1.0}, {1, 2.0}};
    EXPECT_EQ(weighted_neighbor_value(pool, nbrs, 1), 0.6);
}

TEST(KnnImpute, TwoNeighborExampleEndToEnd) {
    // The missing query coordinate adds 1 to every squared distance, so the
    // candidates sit at squared distances 1 and 1 + 3 = 4.
    Eigen::MatrixXd c(4, 2);
    c << 0.0, 1.0,
         0.0, 1.0,
         0.0, 1.0,
         0.0, 3.0;
    const NeighborPool pool(c, 2);
    Eigen::MatrixXd q(4, 1);
    q << 0.0, 0.0, 0.0, kNaN;
    const auto nbrs = nearest_observing(pool, pool.squared_distances(q.col(0)), 3);
    ASSERT_EQ(nbrs.size(), 2u);
    EXPECT_EQ(nbrs[0].distance, 1.0);
    EXPECT_EQ(nbrs[1].distance, 2.0);
    EXPECT_EQ(knn_impute(Trial::from_nan(q), pool).values()(3, 0), 0.6);
}

TEST(KnnImpute, ZeroDistanceCopiesExactly) {
    // A query always misses a coordinate, so under HEOM a zero distance only
    // reaches the weighting step directly.
    Eigen::MatrixXd c(2, 3);
    c << 0.5, 0.7, 0.1,
         1.234567, 9.0, -3.0;
    const NeighborPool pool(c, 3);
    const std::vector<Neighbor> nbrs{{0, 0.0}, {1, 0.3}, {2, 0.9}};
    EXPECT_EQ(weighted_neighbor_value(pool, nbrs, 1), 1.234567);
}

TEST(KnnImpute, KEqualsOneCopiesNearest) {
    Eigen::MatrixXd c(2, 3);
    c << 0.0, 1.0, 2.0,
         10.0, 20.0, 30.0;
    const NeighborPool pool(c, 1);
    Eigen::MatrixXd q(2, 1);
    q << 1.1, kNaN;
    EXPECT_EQ(knn_impute(Trial::from_nan(q), pool).values()(1, 0), 20.0);
}

TEST(KnnImpute, TiesBrokenByLowestIndex) {
    Eigen::MatrixXd c(2, 3);
    c << 1.0, -1.0, 1.0,
         5.0, 7.0, 9.0;
    const NeighborPool pool(c, 1);
    const Eigen::VectorXd x = Eigen::Vector2d(0.0, kNaN);
    const auto nbrs = nearest_observing(pool, pool.squared_distances(x), 1);
    ASSERT_EQ(nbrs.size(), 1u);
    EXPECT_EQ(nbrs[0].index, 0);
}

TEST(KnnImpute, PoolExhaustionNamesChannel) {
    Eigen::MatrixXd c(2, 3);
    c << 1.0, 2.0, 3.0,
         kNaN, 4.0, kNaN;
    const NeighborPool pool(c, 2);
    Eigen::MatrixXd q(2, 1);
    q << 1.0, kNaN;
    try {
        knn_impute(Trial::from_nan(q), pool);
        FAIL() << "expected PoolExhaustedError";
    } catch (const PoolExhaustedError& e) {
        EXPECT_NE(std::string(e.what()).find("channel 1"), std::string::npos);
    }
}

TEST(KnnImpute, PropertiesOnRandomData) {
    Gen gen(53);
    for (int trial = 0; trial < 10; ++trial) {
        const SPDMatrix sigma = gen.spd(5);
        std::vector<Trial> train;
        for (int i = 0; i < 4; ++i) train.push_back(gen.mcar(Trial::complete(gen.samples(sigma, 30)), 0.2));
        const NeighborPool pool = NeighborPool::from_trials(train, 5);
        const Trial query = gen.mcar(Trial::complete(gen.samples(sigma, 20)), 0.3);
        const Trial out = knn_impute(query, pool);
        ASSERT_TRUE(out.is_complete());

        Eigen::MatrixXd cands(5, pool.size());
        for (Eigen::Index i = 0; i < pool.size(); ++i) cands.col(i) = pool.candidate(i);

        for (Eigen::Index s = 0; s < query.samples(); ++s) {
            for (Eigen::Index c = 0; c < query.channels(); ++c) {
                if (query.observed()(c, s)) {
                    EXPECT_EQ(out.values()(c, s), query.values()(c, s));
                    continue;
                }
                const auto brute = brute_neighbors(cands, pool.ranges(), query.values().col(s), c);
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                double num = 0.0, den = 0.0;
                for (int j = 0; j < 5; ++j) {
                    const double v = cands(c, brute[static_cast<std::size_t>(j)].second);
                    const double d = brute[static_cast<std::size_t>(j)].first;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    num += v / (d * d);
                    den += 1.0 / (d * d);
                }
                const double imputed = out.values()(c, s);
                EXPECT_GE(imputed, lo - 1e-12);
                EXPECT_LE(imputed, hi + 1e-12);
                EXPECT_NEAR(imputed, num / den, 1e-10);
            }
        }
    }
}

TEST(KnnImpute, PoolOrderDoesNotMatterWithDistinctDistances) {
    Gen gen(54);
    const Eigen::MatrixXd c = gen.gaussian(3, 40);
    std::vector<Eigen::Index> perm(40);
    for (Eigen::Index i = 0; i < 40; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), gen.engine());
    Eigen::MatrixXd shuffled(3, 40);
    for (Eigen::Index i = 0; i < 40; ++i) shuffled.col(i) = c.col(perm[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd q = gen.gaussian(3, 10);
    for (Eigen::Index s = 0; s < 10; ++s) q(s % 3, s) = kNaN;
    const Trial a = knn_impute(Trial::from_nan(q), NeighborPool(c, 4));
    const Trial b = knn_impute(Trial::from_nan(q), NeighborPool(shuffled, 4));
    EXPECT_LE((a.values() - b.values()).cwiseAbs().maxCoeff(), 1e-12);
}
