#include "misscov/spd.hpp"

#include "misscov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace misscov {

namespace {

constexpr double kAsymmetryTolerance = 1e-8;

Eigen::MatrixXd checked_symmetrize(const Eigen::MatrixXd& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ShapeError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    if (!a.allFinite()) throw NumericInputError(std::string(what) + ": non-finite entries");
    const double asym = relative_asymmetry(a);
    if (asym > kAsymmetryTolerance) {
        throw AsymmetricInputError(std::string(what) + ": relative asymmetry " + std::to_string(asym) +
                                   " exceeds 1e-8");
    }
    return (a + a.transpose()) / 2.0;
}

template <class F>
Eigen::MatrixXd apply_to_spectrum(const Eigen::VectorXd& evals, const Eigen::MatrixXd& evecs, F f) {
    const Eigen::VectorXd mapped = evals.unaryExpr(f);
    return evecs * mapped.asDiagonal() * evecs.transpose();
}

}  // namespace

double relative_asymmetry(const Eigen::MatrixXd& a) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

SymmetricMatrix::SymmetricMatrix(const Eigen::MatrixXd& a) : m_(checked_symmetrize(a, "SymmetricMatrix")) {}

SymmetricMatrix SymmetricMatrix::zero(Eigen::Index p) {
    return SymmetricMatrix(Eigen::MatrixXd::Zero(p, p));
}

SPDMatrix::SPDMatrix(const Eigen::MatrixXd& a) : m_(checked_symmetrize(a, "SPDMatrix")) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_);
    if (es.info() != Eigen::Success) throw NumericInputError("SPDMatrix: eigendecomposition failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
    if (!(evals_(0) > 0.0)) {
        throw NotPositiveDefiniteError("SPDMatrix: smallest eigenvalue " + std::to_string(evals_(0)) +
                                       " is not positive");
    }
}

SPDMatrix SPDMatrix::identity(Eigen::Index p) { return SPDMatrix(Eigen::MatrixXd::Identity(p, p)); }

SPDMatrix SPDMatrix::diagonal(const Eigen::VectorXd& d) { return SPDMatrix(Eigen::MatrixXd(d.asDiagonal())); }

SPDMatrix spd_sqrt(const SPDMatrix& s) {
    return SPDMatrix(apply_to_spectrum(s.eigenvalues(), s.eigenvectors(), [](double x) { return std::sqrt(x); }));
}

SPDMatrix spd_invsqrt(const SPDMatrix& s) {
    return SPDMatrix(
        apply_to_spectrum(s.eigenvalues(), s.eigenvectors(), [](double x) { return 1.0 / std::sqrt(x); }));
}

SymmetricMatrix spd_log(const SPDMatrix& s) {
    return SymmetricMatrix(apply_to_spectrum(s.eigenvalues(), s.eigenvectors(), [](double x) { return std::log(x); }));
}

SPDMatrix spd_exp(const SymmetricMatrix& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix());
    if (es.info() != Eigen::Success) throw NumericInputError("spd_exp: eigendecomposition failed");
    return SPDMatrix(apply_to_spectrum(es.eigenvalues(), es.eigenvectors(), [](double x) { return std::exp(x); }));
}

SPDMatrix congruence(const SPDMatrix& s, const Eigen::MatrixXd& t) {
    if (t.cols() != s.dim()) throw ShapeError("congruence: transform has wrong number of columns");
    const Eigen::MatrixXd c = t * s.matrix() * t.transpose();
    return SPDMatrix((c + c.transpose()) / 2.0);
}

double air_distance(const SPDMatrix& a, const SPDMatrix& b) {
    if (a.dim() != b.dim()) {
        throw ShapeError("air_distance: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
    }
    const SPDMatrix whitened = congruence(b, spd_invsqrt(a).matrix());
    return std::sqrt(whitened.eigenvalues().array().log().square().sum());
}

SPDMatrix retract(const SPDMatrix& base, const SymmetricMatrix& whitened_step) {
    return congruence(spd_exp(whitened_step), spd_sqrt(base).matrix());
}

void validate_weights(std::span<const double> weights, std::size_t count) {
    if (weights.size() != count) {
        throw ShapeError("weights: expected " + std::to_string(count) + " weights, got " +
                         std::to_string(weights.size()));
    }
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw NumericInputError("weights: negative or non-finite weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw NumericInputError("weights: must sum to 1, got " + std::to_string(total));
    }
}

SymmetricMatrix karcher_residual(const SPDMatrix& m, std::span<const SPDMatrix> mats,
                                 std::span<const double> weights) {
    const Eigen::MatrixXd w = spd_invsqrt(m).matrix();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m.dim(), m.dim());
    for (std::size_t i = 0; i < mats.size(); ++i) {
        if (weights[i] == 0.0) continue;
        t += weights[i] * spd_log(congruence(mats[i], w)).matrix();
    }
    return SymmetricMatrix(t);
}

KarcherResult karcher_mean_detailed(std::span<const SPDMatrix> mats, std::span<const double> weights,
                                    const KarcherOptions& opts) {
    if (mats.empty()) throw ShapeError("karcher_mean: empty input");
    const Eigen::Index p = mats.front().dim();
    for (const auto& m : mats) {
        if (m.dim() != p) throw ShapeError("karcher_mean: matrices of different dimensions");
    }
    validate_weights(weights, mats.size());

    Eigen::MatrixXd arithmetic = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i = 0; i < mats.size(); ++i) arithmetic += weights[i] * mats[i].matrix();

    SPDMatrix mean(arithmetic);
    SymmetricMatrix residual = karcher_residual(mean, mats, weights);
    double norm = residual.matrix().norm();
    double step = opts.step;

    int it = 0;
    while (norm > opts.tol && it < opts.max_iter) {
        ++it;
        SPDMatrix candidate = retract(mean, SymmetricMatrix(step * residual.matrix()));
        SymmetricMatrix cand_residual = karcher_residual(candidate, mats, weights);
        const double cand_norm = cand_residual.matrix().norm();
        if (cand_norm > norm) {
            step *= 0.5;
            continue;
        }
        mean = std::move(candidate);
        residual = std::move(cand_residual);
        norm = cand_norm;
    }
    if (norm > opts.tol) {
        throw ConvergenceError("karcher_mean: residual " + std::to_string(norm) + " above tolerance after " +
                                   std::to_string(opts.max_iter) + " iterations",
                               mean.matrix(), norm);
    }
    return KarcherResult{std::move(mean), it, norm};
}

SPDMatrix karcher_mean(std::span<const SPDMatrix> mats, std::span<const double> weights,
                       const KarcherOptions& opts) {
    return karcher_mean_detailed(mats, weights, opts).mean;
}

SPDMatrix karcher_mean(std::span<const SPDMatrix> mats, const KarcherOptions& opts) {
    const std::vector<double> w(mats.size(), mats.empty() ? 0.0 : 1.0 / static_cast<double>(mats.size()));
    return karcher_mean(mats, w, opts);
}

}  // namespace misscov
