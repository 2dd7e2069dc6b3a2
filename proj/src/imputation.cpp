#include "misscov/imputation.hpp"

#include "misscov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace misscov {

double heom_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& ranges) {
    if (x.size() != y.size() || x.size() != ranges.size()) throw ShapeError("heom_distance: length mismatch");
    double sum = 0.0;
    for (Eigen::Index a = 0; a < x.size(); ++a) {
        if (std::isnan(x(a)) || std::isnan(y(a))) {
            sum += 1.0;
        } else {
            const double d = std::abs(x(a) - y(a)) / ranges(a);
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

NeighborPool::NeighborPool(const Eigen::MatrixXd& candidates, int k) : values_(candidates), k_(k) {
    if (k < 1) throw ShapeError("NeighborPool: k must be positive");
    const Eigen::Index p = values_.rows();
    const Eigen::Index n = values_.cols();
    observed_ = (!values_.array().isNaN()).cast<double>().matrix();
    if (((observed_.array() > 0.0) && !values_.array().isFinite()).any()) {
        throw NumericInputError("NeighborPool: infinite candidate value");
    }

    ranges_ = Eigen::VectorXd::Ones(p);
    counts_.resize(p);
    for (Eigen::Index c = 0; c < p; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (observed_(c, i) == 0.0) continue;
            lo = std::min(lo, values_(c, i));
            hi = std::max(hi, values_(c, i));
            ++count;
        }
        counts_(c) = count;
        if (count > 0 && hi > lo) ranges_(c) = hi - lo;
    }
    scaled_ = (observed_.array() > 0.0).select(values_.array().colwise() / ranges_.array(), 0.0).matrix();
}

NeighborPool NeighborPool::from_trials(std::span<const Trial> trials, int k) {
    if (trials.empty()) throw ShapeError("NeighborPool: no trials");
    const Eigen::Index p = trials.front().channels();
    Eigen::Index total = 0;
    for (const auto& t : trials) {
        if (t.channels() != p) throw ShapeError("NeighborPool: trials with different channel counts");
        total += t.samples();
    }
    Eigen::MatrixXd all(p, total);
    Eigen::Index offset = 0;
    for (const auto& t : trials) {
        all.middleCols(offset, t.samples()) = t.values();
        offset += t.samples();
    }
    return NeighborPool(all, k);
}

Eigen::VectorXd NeighborPool::candidate(Eigen::Index i) const { return values_.col(i); }

Eigen::VectorXd NeighborPool::squared_distances(const Eigen::VectorXd& x) const {
    if (x.size() != channels()) throw ShapeError("squared_distances: dimension mismatch");
    Eigen::ArrayXd d2 = Eigen::ArrayXd::Zero(size());
    double missing = 0.0;
    for (Eigen::Index a = 0; a < channels(); ++a) {
        if (std::isnan(x(a))) {
            missing += 1.0;
            continue;
        }
        const double xs = x(a) / ranges_(a);
        const auto obs = observed_.row(a).array().transpose();
        d2 += obs * (scaled_.row(a).array().transpose() - xs).square() + (1.0 - obs);
    }
    return (d2 + missing).matrix();
}

std::vector<Neighbor> nearest_observing(const NeighborPool& pool, const Eigen::VectorXd& squared_distances,
                                        Eigen::Index channel) {
    const int k = pool.k();
    if (pool.observed_count(channel) < k) {
        throw PoolExhaustedError("knn_impute: channel " + std::to_string(channel) + " is observed in only " +
                                 std::to_string(pool.observed_count(channel)) + " candidates, need " +
                                 std::to_string(k));
    }
    std::vector<Eigen::Index> eligible;
    eligible.reserve(static_cast<std::size_t>(pool.observed_count(channel)));
    for (Eigen::Index i = 0; i < pool.size(); ++i) {
        if (pool.observed(channel, i)) eligible.push_back(i);
    }
    const auto closer = [&](Eigen::Index a, Eigen::Index b) {
        return squared_distances(a) < squared_distances(b) || (squared_distances(a) == squared_distances(b) && a < b);
    };
    std::partial_sort(eligible.begin(), eligible.begin() + k, eligible.end(), closer);

    std::vector<Neighbor> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out.push_back({eligible[j], std::sqrt(squared_distances(eligible[j]))});
    return out;
}

double weighted_neighbor_value(const NeighborPool& pool, std::span<const Neighbor> neighbors, Eigen::Index channel) {
    if (neighbors.empty()) throw PoolExhaustedError("knn_impute: no neighbours");
    if (neighbors.front().distance == 0.0) return pool.value(channel, neighbors.front().index);
    double num = 0.0;
    double den = 0.0;
    for (const auto& nb : neighbors) {
        const double w = 1.0 / (nb.distance * nb.distance);
        num += w * pool.value(channel, nb.index);
        den += w;
    }
    return num / den;
}

namespace {

// Nearest candidates overall, used to answer most per-channel queries without
// rescanning the pool. Returns false when the shortlist runs out for `channel`.
bool pick_from_shortlist(const NeighborPool& pool, const std::vector<Eigen::Index>& shortlist,
                         const Eigen::VectorXd& d2, Eigen::Index channel, std::vector<Neighbor>& out) {
    out.clear();
    for (Eigen::Index i : shortlist) {
        if (!pool.observed(channel, i)) continue;
        out.push_back({i, std::sqrt(d2(i))});
        if (static_cast<int>(out.size()) == pool.k()) return true;
    }
    return false;
}

}  // namespace

Trial knn_impute(const Trial& trial, const NeighborPool& pool) {
    if (trial.channels() != pool.channels()) throw ShapeError("knn_impute: channel count differs from pool");
    const Eigen::Index p = trial.channels();
    for (Eigen::Index c = 0; c < p; ++c) {
        if (!trial.channel_fully_observed(c) && pool.observed_count(c) < pool.k()) {
            throw PoolExhaustedError("knn_impute: channel " + std::to_string(c) + " is observed in only " +
                                     std::to_string(pool.observed_count(c)) + " candidates, need " +
                                     std::to_string(pool.k()));
        }
    }

    Eigen::MatrixXd filled = trial.values();
    const std::size_t shortlist_size =
        std::min<std::size_t>(static_cast<std::size_t>(pool.size()), static_cast<std::size_t>(4 * pool.k()));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pool.size()));
    std::vector<Neighbor> neighbors;

    for (Eigen::Index s = 0; s < trial.samples(); ++s) {
        if (trial.sample_fully_observed(s)) continue;
        const Eigen::VectorXd x = trial.values().col(s);
        const Eigen::VectorXd d2 = pool.squared_distances(x);

        std::iota(order.begin(), order.end(), Eigen::Index{0});
        const auto closer = [&](Eigen::Index a, Eigen::Index b) { return d2(a) < d2(b) || (d2(a) == d2(b) && a < b); };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(shortlist_size), order.end(),
                          closer);
        const std::vector<Eigen::Index> shortlist(order.begin(),
                                                  order.begin() + static_cast<std::ptrdiff_t>(shortlist_size));

        for (Eigen::Index c = 0; c < p; ++c) {
            if (trial.observed()(c, s)) continue;
            if (!pick_from_shortlist(pool, shortlist, d2, c, neighbors)) neighbors = nearest_observing(pool, d2, c);
            filled(c, s) = weighted_neighbor_value(pool, neighbors, c);
        }
    }
    return Trial::complete(std::move(filled));
}

}  // namespace misscov
