#pragma once

// Zero-mean Gaussian covariance estimation: the sample covariance matrix for
// complete trials and an expectation-maximization estimator for trials with
// entries missing at arbitrary (channel, sample) positions.

#include "misscov/spd.hpp"
#include "misscov/trial.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace misscov {

// Whenever a covariance block or a final estimate has condition number above
// `max_condition`, `scale * trace / dim` is added to its diagonal.
struct RidgePolicy {
    double max_condition = 1e12;
    double scale = 1e-9;
};

// Returns `a` (symmetrized) with the ridge added if it is ill-conditioned or
// indefinite. Does not guarantee positive definiteness.
Eigen::MatrixXd apply_ridge(const Eigen::MatrixXd& a, const RidgePolicy& ridge = {});

// (1/n) X X^T. Throws IncompleteInputError if the trial has missing entries.
SPDMatrix scm(const Trial& trial, const RidgePolicy& ridge = {});
SPDMatrix scm(const Eigen::MatrixXd& x, const RidgePolicy& ridge = {});

// Observed/missing split of one sample. The implied permutation lists the
// observed channels (ascending) before the missing ones (ascending).
struct SamplePartition {
    Eigen::Index sample = 0;
    std::vector<Eigen::Index> observed;
    std::vector<Eigen::Index> missing;
    Eigen::VectorXd x_observed;

    Eigen::Index dim() const noexcept {
        return static_cast<Eigen::Index>(observed.size() + missing.size());
    }
    // Channel index at each permuted position.
    std::vector<Eigen::Index> order() const;
};

SamplePartition make_partition(const Trial& trial, Eigen::Index sample);
std::vector<SamplePartition> make_partitions(const Trial& trial);

struct ConditionalMoments {
    Eigen::VectorXd mean_m;           // E[x_m | x_o]
    Eigen::MatrixXd second_moment_mm;  // E[x_m x_m^T | x_o]
};

// Gaussian conditioning of the missing coordinates on the observed ones.
// `x` is indexed by channel; entries at unobserved positions are ignored.
// Throws ConditioningError if the observed block stays singular after the ridge.
ConditionalMoments conditional_moments(const Eigen::VectorXd& x, const std::vector<bool>& observed,
                                       const SPDMatrix& sigma, const RidgePolicy& ridge = {});

// Expected complete-data scatter of one sample, in permuted (observed-first) order:
//   [ x_o x_o^T      x_o E[x_m]^T ]
//   [ E[x_m] x_o^T   E[x_m x_m^T] ]
Eigen::MatrixXd estep_B(const SamplePartition& part, const SPDMatrix& sigma, const RidgePolicy& ridge = {});

// (1/n) sum_i unpermute(B_i), then the ridge policy. Throws
// DegenerateEstimateError if the result is not positive definite.
SPDMatrix mstep(std::span<const SamplePartition> parts, std::span<const Eigen::MatrixXd> b_list,
                const RidgePolicy& ridge = {});

struct EMOptions {
    double tol = 1e-6;  // on ||S_{t+1} - S_t||_F / ||S_t||_F
    int max_iter = 100;
    RidgePolicy ridge{};
    bool track_loglik = true;
};

struct EMResult {
    SPDMatrix sigma;
    int iterations = 0;
    bool converged = false;
    // Relative Frobenius change at each iteration; size == iterations.
    std::vector<double> delta_history;
    // Observed-data log-likelihood at the initial point and after each
    // iteration (size iterations + 1), empty unless track_loglik.
    std::vector<double> loglik_history;
};

// Starting point: SCM over fully observed samples when there are at least p of
// them, otherwise the pairwise-available second moments projected onto the SPD
// cone (eigenvalues clipped at 1e-6 * max). Channels never observed start with
// unit variance and no covariance.
SPDMatrix em_initialization(const Trial& trial, const RidgePolicy& ridge = {});

// EM estimate of the covariance of a zero-mean Gaussian trial. A complete trial
// returns scm(trial) after exactly one iteration.
EMResult em_covariance(const Trial& trial, const EMOptions& opts = {});

// Sum over samples of log N(x_o; 0, Sigma_oo).
double observed_loglik(const Trial& trial, const SPDMatrix& sigma);

}  // namespace misscov
