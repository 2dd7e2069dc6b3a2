#include "misscov/masked_mean.hpp"

#include "misscov/errors.hpp"

#include <algorithm>
#include <string>

namespace misscov {

Mask::Mask(Eigen::Index p, std::vector<Eigen::Index> kept) : p_(p), kept_(std::move(kept)) {
    if (p < 1) throw ShapeError("Mask: dimension must be positive");
    for (std::size_t i = 0; i < kept_.size(); ++i) {
        if (kept_[i] < 0 || kept_[i] >= p) throw ShapeError("Mask: channel index out of range");
        if (i > 0 && kept_[i] <= kept_[i - 1]) throw ShapeError("Mask: kept channels must be strictly increasing");
    }
}

Mask Mask::full(Eigen::Index p) {
    std::vector<Eigen::Index> kept(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) kept[static_cast<std::size_t>(i)] = i;
    return Mask(p, std::move(kept));
}

Mask Mask::dropping(Eigen::Index p, std::span<const Eigen::Index> dropped) {
    for (Eigen::Index c : dropped) {
        if (c < 0 || c >= p) throw ShapeError("Mask: dropped channel out of range");
    }
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < p; ++i) {
        if (std::find(dropped.begin(), dropped.end(), i) == dropped.end()) kept.push_back(i);
    }
    return Mask(p, std::move(kept));
}

bool Mask::keeps(Eigen::Index channel) const { return std::binary_search(kept_.begin(), kept_.end(), channel); }

Eigen::MatrixXd Mask::matrix() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p_, kept_count());
    for (Eigen::Index j = 0; j < kept_count(); ++j) m(kept_[static_cast<std::size_t>(j)], j) = 1.0;
    return m;
}

SPDMatrix apply_mask(const SPDMatrix& s, const Mask& mask) {
    if (s.dim() != mask.dim()) {
        throw ShapeError("apply_mask: matrix is " + std::to_string(s.dim()) + "x" + std::to_string(s.dim()) +
                         " but mask has dimension " + std::to_string(mask.dim()));
    }
    if (mask.kept_count() == 0) throw EmptyMaskError("apply_mask: mask removes every channel");
    if (mask.is_full()) return s;
    return SPDMatrix(s.matrix()(mask.kept(), mask.kept()));
}

MaskedMeanProblem::MaskedMeanProblem(std::span<const SPDMatrix> mats, std::span<const Mask> masks,
                                     std::span<const double> weights)
    : p_(mats.empty() ? 0 : mats.front().dim()), masks_(masks.begin(), masks.end()),
      full_(mats.begin(), mats.end()), weights_(weights.begin(), weights.end()) {
    if (mats.empty()) throw ShapeError("masked_karcher_mean: empty input");
    if (masks.size() != mats.size()) throw ShapeError("masked_karcher_mean: one mask per matrix is required");
    validate_weights(weights, mats.size());

    std::vector<bool> covered(static_cast<std::size_t>(p_), false);
    masked_.reserve(mats.size());
    for (std::size_t i = 0; i < mats.size(); ++i) {
        if (mats[i].dim() != p_) throw ShapeError("masked_karcher_mean: matrices of different dimensions");
        if (masks[i].dim() != p_) throw ShapeError("masked_karcher_mean: mask dimension mismatch");
        if (masks[i].kept_count() == 0) {
            throw EmptyMaskError("masked_karcher_mean: mask " + std::to_string(i) + " removes every channel");
        }
        masked_.push_back(apply_mask(mats[i], masks[i]));
        if (weights[i] > 0.0) {
            for (Eigen::Index c : masks[i].kept()) covered[static_cast<std::size_t>(c)] = true;
        }
    }
    for (Eigen::Index c = 0; c < p_; ++c) {
        if (!covered[static_cast<std::size_t>(c)]) {
            throw UnidentifiableChannelError("masked_karcher_mean: channel " + std::to_string(c) +
                                             " is not kept by any weighted input");
        }
    }
}

double MaskedMeanProblem::objective_and_gradient(const SPDMatrix& sigma, Eigen::MatrixXd& gradient) const {
    if (sigma.dim() != p_) throw ShapeError("masked mean objective: dimension mismatch");
    gradient = Eigen::MatrixXd::Zero(p_, p_);
    double f = 0.0;
    for (std::size_t i = 0; i < masked_.size(); ++i) {
        if (weights_[i] == 0.0) continue;
        const SPDMatrix b = apply_mask(sigma, masks_[i]);
        const Eigen::MatrixXd b_isqrt = spd_invsqrt(b).matrix();
        const Eigen::MatrixXd log_ratio = spd_log(congruence(masked_[i], b_isqrt)).matrix();
        f += 0.5 * weights_[i] * log_ratio.squaredNorm();
        const auto& kept = masks_[i].kept();
        gradient(kept, kept) -= weights_[i] * (b_isqrt * log_ratio * b_isqrt);
    }
    gradient = (gradient + gradient.transpose()) / 2.0;
    return f;
}

double MaskedMeanProblem::objective(const SPDMatrix& sigma) const {
    if (sigma.dim() != p_) throw ShapeError("masked mean objective: dimension mismatch");
    double f = 0.0;
    for (std::size_t i = 0; i < masked_.size(); ++i) {
        if (weights_[i] == 0.0) continue;
        const double d = air_distance(apply_mask(sigma, masks_[i]), masked_[i]);
        f += 0.5 * weights_[i] * d * d;
    }
    return f;
}

Eigen::MatrixXd MaskedMeanProblem::euclidean_gradient(const SPDMatrix& sigma) const {
    Eigen::MatrixXd g;
    objective_and_gradient(sigma, g);
    return g;
}

SPDMatrix MaskedMeanProblem::initial_point() const {
    Eigen::MatrixXd num = Eigen::MatrixXd::Zero(p_, p_);
    Eigen::MatrixXd den = Eigen::MatrixXd::Zero(p_, p_);
    for (std::size_t i = 0; i < full_.size(); ++i) {
        const auto& kept = masks_[i].kept();
        num(kept, kept) += weights_[i] * full_[i].matrix()(kept, kept);
        den(kept, kept).array() += weights_[i];
    }
    const Eigen::MatrixXd avg = (den.array() > 0.0).select(num.array() / den.array(), 0.0).matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((avg + avg.transpose()) / 2.0);
    if (es.info() != Eigen::Success) throw NumericInputError("masked mean: eigendecomposition of start point failed");
    const double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw DegenerateEstimateError("masked mean: start point has no positive eigenvalue");
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(1e-6 * top);
    return SPDMatrix(es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose());
}

MaskedMeanResult masked_karcher_mean_detailed(std::span<const SPDMatrix> mats, std::span<const Mask> masks,
                                              std::span<const double> weights, const MaskedMeanOptions& opts) {
    const MaskedMeanProblem problem(mats, masks, weights);

    SPDMatrix sigma = problem.initial_point();
    Eigen::MatrixXd grad;
    double f = problem.objective_and_gradient(sigma, grad);
    // Gradient in the whitened frame at sigma; its norm is the Riemannian norm.
    auto whiten = [](const SPDMatrix& s, const Eigen::MatrixXd& g) {
        const Eigen::MatrixXd r = spd_sqrt(s).matrix();
        return Eigen::MatrixXd(r * g * r);
    };
    Eigen::MatrixXd w = whiten(sigma, grad);
    double gnorm = w.norm();

    MaskedMeanResult result{sigma, 0, gnorm, f, {f}};
    int it = 0;
    while (gnorm > opts.tol && it < opts.max_iter) {
        ++it;
        double step = opts.initial_step;
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt, step *= opts.shrink) {
            SPDMatrix candidate = retract(sigma, SymmetricMatrix(-step * w));
            Eigen::MatrixXd cand_grad;
            const double cand_f = problem.objective_and_gradient(candidate, cand_grad);
            if (cand_f <= f - opts.armijo * step * gnorm * gnorm) {
                sigma = std::move(candidate);
                grad = std::move(cand_grad);
                f = cand_f;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        w = whiten(sigma, grad);
        gnorm = w.norm();
        result.objective_history.push_back(f);
    }
    if (gnorm > opts.tol) {
        throw ConvergenceError("masked_karcher_mean: gradient norm " + std::to_string(gnorm) +
                                   " above tolerance after " + std::to_string(it) + " iterations",
                               sigma.matrix(), gnorm);
    }
    result.mean = std::move(sigma);
    result.iterations = it;
    result.gradient_norm = gnorm;
    result.objective = f;
    return result;
}

SPDMatrix masked_karcher_mean(std::span<const SPDMatrix> mats, std::span<const Mask> masks,
                              std::span<const double> weights, const MaskedMeanOptions& opts) {
    return masked_karcher_mean_detailed(mats, masks, weights, opts).mean;
}

SPDMatrix masked_karcher_mean(std::span<const SPDMatrix> mats, std::span<const Mask> masks,
                              const MaskedMeanOptions& opts) {
    const std::vector<double> w(mats.size(), mats.empty() ? 0.0 : 1.0 / static_cast<double>(mats.size()));
    return masked_karcher_mean(mats, masks, w, opts);
}

}  // namespace misscov
