#include "misscov/covariance.hpp"

#include "misscov/errors.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace misscov {

namespace {

using Index = Eigen::Index;
using IndexList = std::vector<Index>;

// Samples sharing one observed/missing pattern. x_observed holds the observed
// rows of those samples, columns in sample order.
struct PatternGroup {
    IndexList observed;
    IndexList missing;
    IndexList samples;
    Eigen::MatrixXd x_observed;
};

std::vector<PatternGroup> group_by_pattern(const Trial& trial) {
    const Index p = trial.channels();
    std::map<std::vector<bool>, std::size_t> lookup;
    std::vector<PatternGroup> groups;
    for (Index s = 0; s < trial.samples(); ++s) {
        std::vector<bool> key(static_cast<std::size_t>(p));
        for (Index c = 0; c < p; ++c) key[static_cast<std::size_t>(c)] = trial.observed()(c, s);
        auto [it, inserted] = lookup.try_emplace(key, groups.size());
        if (inserted) {
            PatternGroup g;
            for (Index c = 0; c < p; ++c) (key[static_cast<std::size_t>(c)] ? g.observed : g.missing).push_back(c);
            groups.push_back(std::move(g));
        }
        groups[it->second].samples.push_back(s);
    }
    for (auto& g : groups) g.x_observed = trial.values()(g.observed, g.samples);
    return groups;
}

void add_outer(Eigen::MatrixXd& sum, const Eigen::MatrixXd& cols) { sum.noalias() += cols * cols.transpose(); }

SPDMatrix finalize_estimate(const Eigen::MatrixXd& sum, Index n, const RidgePolicy& ridge) {
    const Eigen::MatrixXd estimate = apply_ridge(sum / static_cast<double>(n), ridge);
    try {
        return SPDMatrix(estimate);
    } catch (const NotPositiveDefiniteError& e) {
        throw DegenerateEstimateError(std::string("covariance estimate is not positive definite: ") + e.what());
    }
}

// Regression of the missing block on the observed block under `sigma`.
struct ConditionedBlock {
    Eigen::MatrixXd gain;          // Sigma_mo Sigma_oo^{-1}
    Eigen::MatrixXd residual_cov;  // Sigma_mm - Sigma_mo Sigma_oo^{-1} Sigma_om
};

ConditionedBlock condition_on(const Eigen::MatrixXd& sigma, const IndexList& observed, const IndexList& missing,
                              const RidgePolicy& ridge) {
    if (observed.empty()) throw IncompleteInputError("conditioning on an empty observed set");
    const Eigen::MatrixXd s_oo = apply_ridge(sigma(observed, observed), ridge);
    Eigen::LLT<Eigen::MatrixXd> llt(s_oo);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("observed covariance block is singular after ridge (" +
                                std::to_string(observed.size()) + " channels)");
    }
    const Eigen::MatrixXd s_om = sigma(observed, missing);
    ConditionedBlock out;
    out.gain = llt.solve(s_om).transpose();
    const Eigen::MatrixXd r = sigma(missing, missing) - out.gain * s_om;
    out.residual_cov = (r + r.transpose()) / 2.0;
    return out;
}

// Sum over samples of E[x x^T | x_o] under `sigma`, in channel order.
Eigen::MatrixXd expected_scatter(const std::vector<PatternGroup>& groups, Index p, const Eigen::MatrixXd& sigma,
                                 const RidgePolicy& ridge) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
    for (const auto& g : groups) {
        if (g.missing.empty()) {
            add_outer(sum, g.x_observed);
            continue;
        }
        const ConditionedBlock cb = condition_on(sigma, g.observed, g.missing, ridge);
        const Index count = static_cast<Index>(g.samples.size());
        Eigen::MatrixXd completed(p, count);
        completed(g.observed, Eigen::all) = g.x_observed;
        completed(g.missing, Eigen::all) = cb.gain * g.x_observed;
        add_outer(sum, completed);
        sum(g.missing, g.missing) += static_cast<double>(count) * cb.residual_cov;
    }
    return sum;
}

double loglik_of_groups(const std::vector<PatternGroup>& groups, const Eigen::MatrixXd& sigma) {
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    double total = 0.0;
    for (const auto& g : groups) {
        Eigen::LLT<Eigen::MatrixXd> llt(sigma(g.observed, g.observed));
        if (llt.info() != Eigen::Success) throw ConditioningError("observed_loglik: singular observed block");
        const Eigen::MatrixXd l = llt.matrixL();
        const double logdet = 2.0 * l.diagonal().array().log().sum();
        const double quad = llt.matrixL().solve(g.x_observed).squaredNorm();
        const double count = static_cast<double>(g.samples.size());
        total += -0.5 * (count * (static_cast<double>(g.observed.size()) * log_2pi + logdet) + quad);
    }
    return total;
}

}  // namespace

Eigen::MatrixXd apply_ridge(const Eigen::MatrixXd& a, const RidgePolicy& ridge) {
    Eigen::MatrixXd sym = (a + a.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericInputError("apply_ridge: eigendecomposition failed");
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (lo <= 0.0 || hi / lo > ridge.max_condition) {
        const double shift = ridge.scale * sym.trace() / static_cast<double>(sym.rows());
        sym.diagonal().array() += shift;
    }
    return sym;
}

SPDMatrix scm(const Eigen::MatrixXd& x, const RidgePolicy& ridge) {
    if (x.rows() == 0 || x.cols() == 0) throw ShapeError("scm: empty data");
    if (!x.allFinite()) throw NumericInputError("scm: non-finite data");
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(x.rows(), x.rows());
    add_outer(sum, x);
    return finalize_estimate(sum, x.cols(), ridge);
}

SPDMatrix scm(const Trial& trial, const RidgePolicy& ridge) {
    if (!trial.is_complete()) {
        throw IncompleteInputError("scm: trial has " + std::to_string(trial.missing_count()) +
                                   " missing entries; use em_covariance");
    }
    return scm(trial.values(), ridge);
}

std::vector<Index> SamplePartition::order() const {
    std::vector<Index> out = observed;
    out.insert(out.end(), missing.begin(), missing.end());
    return out;
}

SamplePartition make_partition(const Trial& trial, Index sample) {
    if (sample < 0 || sample >= trial.samples()) throw ShapeError("make_partition: sample out of range");
    SamplePartition part;
    part.sample = sample;
    for (Index c = 0; c < trial.channels(); ++c) {
        (trial.observed()(c, sample) ? part.observed : part.missing).push_back(c);
    }
    part.x_observed = trial.values()(part.observed, sample);
    return part;
}

std::vector<SamplePartition> make_partitions(const Trial& trial) {
    std::vector<SamplePartition> parts;
    parts.reserve(static_cast<std::size_t>(trial.samples()));
    for (Index s = 0; s < trial.samples(); ++s) parts.push_back(make_partition(trial, s));
    return parts;
}

ConditionalMoments conditional_moments(const Eigen::VectorXd& x, const std::vector<bool>& observed,
                                       const SPDMatrix& sigma, const RidgePolicy& ridge) {
    const Index p = sigma.dim();
    if (x.size() != p || static_cast<Index>(observed.size()) != p) {
        throw ShapeError("conditional_moments: vector length does not match covariance dimension");
    }
    IndexList obs;
    IndexList mis;
    for (Index c = 0; c < p; ++c) (observed[static_cast<std::size_t>(c)] ? obs : mis).push_back(c);
    if (obs.empty()) throw IncompleteInputError("conditional_moments: no observed coordinate");
    if (mis.empty()) return {Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)};

    const ConditionedBlock cb = condition_on(sigma.matrix(), obs, mis, ridge);
    ConditionalMoments out;
    out.mean_m = cb.gain * x(obs);
    out.second_moment_mm = cb.residual_cov + out.mean_m * out.mean_m.transpose();
    return out;
}

Eigen::MatrixXd estep_B(const SamplePartition& part, const SPDMatrix& sigma, const RidgePolicy& ridge) {
    const Index p = sigma.dim();
    if (part.dim() != p) throw ShapeError("estep_B: partition dimension does not match covariance");
    const Index no = static_cast<Index>(part.observed.size());
    const Index nm = static_cast<Index>(part.missing.size());
    const Eigen::VectorXd& xo = part.x_observed;

    Eigen::MatrixXd b(p, p);
    b.topLeftCorner(no, no) = xo * xo.transpose();
    if (nm == 0) return b;

    const ConditionedBlock cb = condition_on(sigma.matrix(), part.observed, part.missing, ridge);
    const Eigen::VectorXd mean_m = cb.gain * xo;
    b.topRightCorner(no, nm) = xo * mean_m.transpose();
    b.bottomLeftCorner(nm, no) = b.topRightCorner(no, nm).transpose();
    b.bottomRightCorner(nm, nm) = cb.residual_cov + mean_m * mean_m.transpose();
    return b;
}

SPDMatrix mstep(std::span<const SamplePartition> parts, std::span<const Eigen::MatrixXd> b_list,
                const RidgePolicy& ridge) {
    if (parts.empty()) throw ShapeError("mstep: no samples");
    if (parts.size() != b_list.size()) throw ShapeError("mstep: one B matrix per sample is required");
    const Index p = parts.front().dim();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].dim() != p || b_list[i].rows() != p || b_list[i].cols() != p) {
            throw ShapeError("mstep: inconsistent dimensions");
        }
        const IndexList order = parts[i].order();
        for (Index a = 0; a < p; ++a) {
            for (Index b = 0; b < p; ++b) sum(order[a], order[b]) += b_list[i](a, b);
        }
    }
    return finalize_estimate(sum, static_cast<Index>(parts.size()), ridge);
}

SPDMatrix em_initialization(const Trial& trial, const RidgePolicy& ridge) {
    const Index p = trial.channels();
    IndexList complete_samples;
    for (Index s = 0; s < trial.samples(); ++s) {
        if (trial.sample_fully_observed(s)) complete_samples.push_back(s);
    }
    if (static_cast<Index>(complete_samples.size()) >= p) {
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
        add_outer(sum, trial.values()(Eigen::all, complete_samples));
        return finalize_estimate(sum, static_cast<Index>(complete_samples.size()), ridge);
    }

    const Eigen::MatrixXd obs = trial.observed().cast<double>().matrix();
    const Eigen::MatrixXd zero_filled = trial.observed().select(trial.values().array(), 0.0).matrix();
    const Eigen::MatrixXd products = zero_filled * zero_filled.transpose();
    const Eigen::MatrixXd counts = obs * obs.transpose();
    if (counts.maxCoeff() == 0.0) throw IncompleteInputError("em_covariance: trial has no observed entry");

    Eigen::MatrixXd pairwise = Eigen::MatrixXd::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (counts(i, j) > 0.0) pairwise(i, j) = products(i, j) / counts(i, j);
        }
        if (counts(i, i) == 0.0) pairwise(i, i) = 1.0;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pairwise);
    if (es.info() != Eigen::Success) throw NumericInputError("em_initialization: eigendecomposition failed");
    const double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw DegenerateEstimateError("em_initialization: pairwise moments are not positive");
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(1e-6 * top);
    return SPDMatrix(es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose());
}

EMResult em_covariance(const Trial& trial, const EMOptions& opts) {
    const Index p = trial.channels();
    const Index n = trial.samples();
    const std::vector<PatternGroup> groups = group_by_pattern(trial);

    EMResult result{em_initialization(trial, opts.ridge), 0, false, {}, {}};
    if (opts.track_loglik) result.loglik_history.push_back(loglik_of_groups(groups, result.sigma.matrix()));

    for (int t = 1; t <= opts.max_iter; ++t) {
        SPDMatrix next = finalize_estimate(expected_scatter(groups, p, result.sigma.matrix(), opts.ridge), n, opts.ridge);
        const double change = (next.matrix() - result.sigma.matrix()).norm() / result.sigma.matrix().norm();
        result.delta_history.push_back(change);
        result.sigma = std::move(next);
        result.iterations = t;
        if (opts.track_loglik) result.loglik_history.push_back(loglik_of_groups(groups, result.sigma.matrix()));
        if (change <= opts.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

double observed_loglik(const Trial& trial, const SPDMatrix& sigma) {
    if (sigma.dim() != trial.channels()) throw ShapeError("observed_loglik: dimension mismatch");
    return loglik_of_groups(group_by_pattern(trial), sigma.matrix());
}

}  // namespace misscov
