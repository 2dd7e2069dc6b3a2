#pragma once

// Channel-selection masks and the masked Riemannian mean: the SPD matrix
// minimizing 1/2 sum_i w_i d^2(M_i^T S_i M_i, M_i^T S M_i), which only compares
// each input with the mean on the channels that input kept.

#include "misscov/spd.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace misscov {

// Channels retained out of `dim()`. As a matrix it is the identity with the
// columns of the dropped channels removed. Channel indices are 0-based.
class Mask {
public:
    // `kept` must be strictly increasing and inside [0, p).
    Mask(Eigen::Index p, std::vector<Eigen::Index> kept);

    static Mask full(Eigen::Index p);
    static Mask dropping(Eigen::Index p, std::span<const Eigen::Index> dropped);

    Eigen::Index dim() const noexcept { return p_; }
    const std::vector<Eigen::Index>& kept() const noexcept { return kept_; }
    Eigen::Index kept_count() const noexcept { return static_cast<Eigen::Index>(kept_.size()); }
    Eigen::Index dropped_count() const noexcept { return p_ - kept_count(); }
    bool is_full() const noexcept { return dropped_count() == 0; }
    bool keeps(Eigen::Index channel) const;

    // p x (p - r) selection matrix.
    Eigen::MatrixXd matrix() const;

    bool operator==(const Mask&) const = default;

private:
    Eigen::Index p_;
    std::vector<Eigen::Index> kept_;
};

// M^T s M: the principal submatrix on the kept channels.
SPDMatrix apply_mask(const SPDMatrix& s, const Mask& mask);

struct MaskedMeanOptions {
    double tol = 1e-6;  // Riemannian gradient norm
    int max_iter = 200;
    double initial_step = 1.0;
    double shrink = 0.5;
    double armijo = 1e-4;
    int max_backtracks = 50;
};

struct MaskedMeanResult {
    SPDMatrix mean;
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;
    // Objective at the start point and after each accepted step.
    std::vector<double> objective_history;
};

// Precomputed masked problem: objective, Euclidean gradient and starting point.
class MaskedMeanProblem {
public:
    // Validates inputs: equal p x p dims, one mask per matrix, every mask keeps
    // at least one channel, every channel kept somewhere, weights normalized.
    MaskedMeanProblem(std::span<const SPDMatrix> mats, std::span<const Mask> masks, std::span<const double> weights);

    Eigen::Index dim() const noexcept { return p_; }

    double objective(const SPDMatrix& sigma) const;
    // Gradient of the objective with respect to the entries of sigma
    // (symmetric). Riemannian gradient under the affine-invariant metric is
    // sigma * G * sigma.
    Eigen::MatrixXd euclidean_gradient(const SPDMatrix& sigma) const;
    // Both at once, sharing the per-term decompositions.
    double objective_and_gradient(const SPDMatrix& sigma, Eigen::MatrixXd& gradient) const;

    // Weighted average of each entry over the inputs keeping both its
    // channels (0 where no input does), eigenvalues clipped at 1e-6 * max.
    SPDMatrix initial_point() const;

private:
    Eigen::Index p_;
    std::vector<Mask> masks_;
    std::vector<SPDMatrix> masked_;  // M_i^T S_i M_i
    std::vector<SPDMatrix> full_;
    std::vector<double> weights_;
};

// Riemannian gradient descent with exponential retraction and Armijo
// backtracking. Throws ConvergenceError if the gradient norm stays above tol.
MaskedMeanResult masked_karcher_mean_detailed(std::span<const SPDMatrix> mats, std::span<const Mask> masks,
                                              std::span<const double> weights, const MaskedMeanOptions& opts = {});

SPDMatrix masked_karcher_mean(std::span<const SPDMatrix> mats, std::span<const Mask> masks,
                              std::span<const double> weights, const MaskedMeanOptions& opts = {});

// Uniform weights.
SPDMatrix masked_karcher_mean(std::span<const SPDMatrix> mats, std::span<const Mask> masks,
                              const MaskedMeanOptions& opts = {});

}  // namespace misscov
