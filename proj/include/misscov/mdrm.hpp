#pragma once

// Minimum distance to Riemannian mean classification: one affine-invariant
// mean per class, prediction by nearest mean.

#include "misscov/masked_mean.hpp"
#include "misscov/spd.hpp"

#include <optional>
#include <vector>

namespace misscov {

// Covariances with class labels in [0, classes). `masks` is either empty or
// holds one mask per item.
struct LabeledCovDataset {
    std::vector<SPDMatrix> covs;
    std::vector<int> labels;
    std::vector<Mask> masks;
    int classes = 0;

    // Every class has at least one item, classes >= 2, equal dimensions.
    void validate() const;
};

struct ClassMeans {
    std::vector<SPDMatrix> means;
    std::vector<int> iterations;
    // Karcher residual, or masked-mean gradient norm.
    std::vector<double> residuals;
    // Items each mean was fitted on.
    std::vector<std::size_t> counts;

    int classes() const noexcept { return static_cast<int>(means.size()); }
};

struct MdrmOptions {
    KarcherOptions karcher{};
    MaskedMeanOptions masked{};
};

// Uniform-weight class means. With masked = true the items' masks (full masks
// when none are given) enter the masked Riemannian mean.
ClassMeans mdrm_fit(const LabeledCovDataset& data, bool masked, const MdrmOptions& opts = {});

struct Prediction {
    int label = 0;
    std::vector<double> distances;
};

// Nearest class mean, lowest class index on ties. With a mask, the query is
// compared with the masked means; the query may be given at full size (it is
// masked too) or already reduced to the kept channels.
Prediction mdrm_predict(const SPDMatrix& query, const ClassMeans& means, const std::optional<Mask>& mask = std::nullopt);

}  // namespace misscov
