#pragma once

// K-nearest-neighbour imputation of missing sample entries under the
// heterogeneous Euclidean-overlap metric (HEOM). Partially observed vectors
// use NaN for missing coordinates.

#include "misscov/trial.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace misscov {

// sqrt(sum_a d_a^2) with d_a = |x_a - y_a| / range_a when both are observed,
// and d_a = 1 when either is missing.
double heom_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& ranges);

// Candidate sample vectors (columns) with per-channel range normalizers.
class NeighborPool {
public:
    static constexpr int kDefaultK = 5;

    // `candidates` is p x N with NaN at missing positions.
    NeighborPool(const Eigen::MatrixXd& candidates, int k = kDefaultK);

    // Every sample column of every trial, in trial then sample order.
    static NeighborPool from_trials(std::span<const Trial> trials, int k = kDefaultK);

    Eigen::Index channels() const noexcept { return observed_.rows(); }
    Eigen::Index size() const noexcept { return observed_.cols(); }
    int k() const noexcept { return k_; }
    // max - min over observed values, 1 for channels with no spread.
    const Eigen::VectorXd& ranges() const noexcept { return ranges_; }
    Eigen::VectorXd candidate(Eigen::Index i) const;
    bool observed(Eigen::Index channel, Eigen::Index i) const { return observed_(channel, i) != 0.0; }
    Eigen::Index observed_count(Eigen::Index channel) const { return counts_(channel); }

    // Squared HEOM distance from `x` (NaN = missing) to every candidate.
    Eigen::VectorXd squared_distances(const Eigen::VectorXd& x) const;

    double value(Eigen::Index channel, Eigen::Index i) const { return values_(channel, i); }

private:
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    RowMajor values_;    // NaN at missing
    RowMajor scaled_;    // values / range, 0 at missing
    RowMajor observed_;  // 1.0 / 0.0
    Eigen::VectorXd ranges_;
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1> counts_;
    int k_;
};

struct Neighbor {
    Eigen::Index index;
    double distance;
};

// The k candidates nearest to `x` among those observing `channel`, ascending
// by (distance, pool index). Throws PoolExhaustedError if fewer than k exist.
std::vector<Neighbor> nearest_observing(const NeighborPool& pool, const Eigen::VectorXd& squared_distances,
                                        Eigen::Index channel);

// Inverse-square-distance weighted average of the neighbours' values at
// `channel`, weights normalized to one. A neighbour at distance 0 is copied.
double weighted_neighbor_value(const NeighborPool& pool, std::span<const Neighbor> neighbors, Eigen::Index channel);

// Fills every missing entry; observed entries are returned unchanged.
Trial knn_impute(const Trial& trial, const NeighborPool& pool);

}  // namespace misscov
