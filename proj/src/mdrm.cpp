#include "misscov/mdrm.hpp"

#include "misscov/errors.hpp"

#include <string>

namespace misscov {

void LabeledCovDataset::validate() const {
    if (classes < 2) throw ShapeError("dataset: at least two classes are required");
    if (covs.size() != labels.size()) throw ShapeError("dataset: one label per covariance is required");
    if (!masks.empty() && masks.size() != covs.size()) throw ShapeError("dataset: one mask per covariance is required");
    if (covs.empty()) throw ShapeError("dataset: empty");
    std::vector<std::size_t> per_class(static_cast<std::size_t>(classes), 0);
    for (std::size_t i = 0; i < covs.size(); ++i) {
        if (covs[i].dim() != covs.front().dim()) throw ShapeError("dataset: covariances of different dimensions");
        if (labels[i] < 0 || labels[i] >= classes) {
            throw ShapeError("dataset: label " + std::to_string(labels[i]) + " outside [0, " +
                             std::to_string(classes) + ")");
        }
        ++per_class[static_cast<std::size_t>(labels[i])];
    }
    for (int z = 0; z < classes; ++z) {
        if (per_class[static_cast<std::size_t>(z)] == 0) {
            throw ShapeError("dataset: class " + std::to_string(z) + " has no items");
        }
    }
}

ClassMeans mdrm_fit(const LabeledCovDataset& data, bool masked, const MdrmOptions& opts) {
    data.validate();
    const Eigen::Index p = data.covs.front().dim();
    ClassMeans out;
    for (int z = 0; z < data.classes; ++z) {
        std::vector<SPDMatrix> members;
        std::vector<Mask> member_masks;
        for (std::size_t i = 0; i < data.covs.size(); ++i) {
            if (data.labels[i] != z) continue;
            members.push_back(data.covs[i]);
            member_masks.push_back(data.masks.empty() ? Mask::full(p) : data.masks[i]);
        }
        const std::vector<double> weights(members.size(), 1.0 / static_cast<double>(members.size()));
        try {
            if (masked) {
                auto r = masked_karcher_mean_detailed(members, member_masks, weights, opts.masked);
                out.means.push_back(std::move(r.mean));
                out.iterations.push_back(r.iterations);
                out.residuals.push_back(r.gradient_norm);
            } else {
                auto r = karcher_mean_detailed(members, weights, opts.karcher);
                out.means.push_back(std::move(r.mean));
                out.iterations.push_back(r.iterations);
                out.residuals.push_back(r.residual);
            }
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("class " + std::to_string(z) + ": " + e.what(), e.last_iterate(), e.residual());
        } catch (const UnidentifiableChannelError& e) {
            throw UnidentifiableChannelError("class " + std::to_string(z) + ": " + e.what());
        }
        out.counts.push_back(members.size());
    }
    return out;
}

Prediction mdrm_predict(const SPDMatrix& query, const ClassMeans& means, const std::optional<Mask>& mask) {
    if (means.means.empty()) throw ShapeError("mdrm_predict: no class means");
    const Eigen::Index p = means.means.front().dim();
    Prediction out;
    out.distances.reserve(means.means.size());

    if (!mask || mask->is_full()) {
        if (mask && mask->dim() != p) throw ShapeError("mdrm_predict: mask dimension differs from the means");
        for (const auto& m : means.means) out.distances.push_back(air_distance(query, m));
    } else {
        if (mask->dim() != p) throw ShapeError("mdrm_predict: mask dimension differs from the means");
        const SPDMatrix reduced = query.dim() == p ? apply_mask(query, *mask) : query;
        if (reduced.dim() != mask->kept_count()) {
            throw ShapeError("mdrm_predict: query dimension matches neither the mask nor the means");
        }
        for (const auto& m : means.means) out.distances.push_back(air_distance(reduced, apply_mask(m, *mask)));
    }

    for (std::size_t z = 1; z < out.distances.size(); ++z) {
        if (out.distances[z] < out.distances[static_cast<std::size_t>(out.label)]) out.label = static_cast<int>(z);
    }
    return out;
}

}  // namespace misscov
