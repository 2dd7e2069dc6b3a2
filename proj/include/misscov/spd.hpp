#pragma once

// Affine-invariant geometry on symmetric positive-definite matrices.
//
// Matrix functions (sqrt, log, exp) are computed from the symmetric
// eigendecomposition with the function applied to the eigenvalues. SPDMatrix
// keeps its decomposition so repeated functions of the same value are cheap.

#include <Eigen/Dense>

#include <span>

namespace misscov {

// Real symmetric matrix, not necessarily definite (tangent vectors, logs).
class SymmetricMatrix {
public:
    // Rejects non-square, non-finite or visibly asymmetric input (relative
    // asymmetry above 1e-8), then stores the exact symmetrization (A+A^T)/2.
    explicit SymmetricMatrix(const Eigen::MatrixXd& a);

    static SymmetricMatrix zero(Eigen::Index p);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }

private:
    Eigen::MatrixXd m_;
};

class SPDMatrix {
public:
    // Same validation as SymmetricMatrix, plus smallest eigenvalue > 0.
    explicit SPDMatrix(const Eigen::MatrixXd& a);

    static SPDMatrix identity(Eigen::Index p);
    static SPDMatrix diagonal(const Eigen::VectorXd& d);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }
    // Ascending.
    const Eigen::VectorXd& eigenvalues() const noexcept { return evals_; }
    const Eigen::MatrixXd& eigenvectors() const noexcept { return evecs_; }
    double condition_number() const noexcept { return evals_(evals_.size() - 1) / evals_(0); }

    bool operator==(const SPDMatrix& other) const { return m_ == other.m_; }

private:
    Eigen::MatrixXd m_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
};

// Largest |A_ij - A_ji| divided by max(1, max |A_ij|).
double relative_asymmetry(const Eigen::MatrixXd& a);

SPDMatrix spd_sqrt(const SPDMatrix& s);
// S with S * s * S = I.
SPDMatrix spd_invsqrt(const SPDMatrix& s);
SymmetricMatrix spd_log(const SPDMatrix& s);
SPDMatrix spd_exp(const SymmetricMatrix& s);

// t * s * t^T, symmetrized. Throws if the result is not positive definite.
SPDMatrix congruence(const SPDMatrix& s, const Eigen::MatrixXd& t);

// ||log(a^{-1/2} b a^{-1/2})||_F
double air_distance(const SPDMatrix& a, const SPDMatrix& b);

// Exponential retraction at `base`: base^{1/2} exp(v) base^{1/2}, where v is
// a symmetric matrix expressed in the whitened frame at `base`.
SPDMatrix retract(const SPDMatrix& base, const SymmetricMatrix& whitened_step);

struct KarcherOptions {
    double tol = 1e-8;
    int max_iter = 50;
    double step = 1.0;
};

struct KarcherResult {
    SPDMatrix mean;
    int iterations = 0;
    double residual = 0.0;
};

// sum_i w_i log(m^{-1/2} mats_i m^{-1/2}). The Karcher mean is the zero of this map.
SymmetricMatrix karcher_residual(const SPDMatrix& m, std::span<const SPDMatrix> mats,
                                 std::span<const double> weights);

// Weighted Frechet mean under the affine-invariant metric, by fixed-point
// iteration m <- m^{1/2} exp(step * T(m)) m^{1/2} from the weighted arithmetic
// mean. The step is halved whenever the residual norm would increase.
// Throws ConvergenceError if ||T||_F > tol after max_iter updates.
KarcherResult karcher_mean_detailed(std::span<const SPDMatrix> mats, std::span<const double> weights,
                                    const KarcherOptions& opts = {});

SPDMatrix karcher_mean(std::span<const SPDMatrix> mats, std::span<const double> weights,
                       const KarcherOptions& opts = {});

// Uniform weights 1/n.
SPDMatrix karcher_mean(std::span<const SPDMatrix> mats, const KarcherOptions& opts = {});

// Checks weights are non-negative, finite, sum to one (1e-9) and match `count`.
void validate_weights(std::span<const double> weights, std::size_t count);

}  // namespace misscov
