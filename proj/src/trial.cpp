#include "misscov/trial.hpp"

#include "misscov/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace misscov {

Trial::Trial(Eigen::MatrixXd values, ObservedMask observed)
    : values_(std::move(values)), observed_(std::move(observed)) {
    if (values_.rows() == 0 || values_.cols() == 0) throw ShapeError("Trial: empty values");
    if (observed_.rows() != values_.rows() || observed_.cols() != values_.cols()) {
        throw ShapeError("Trial: mask shape does not match values");
    }
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        if (!observed_.col(j).any()) {
            throw IncompleteInputError("Trial: sample " + std::to_string(j) + " has no observed entry");
        }
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (!observed_(i, j)) {
                values_(i, j) = std::numeric_limits<double>::quiet_NaN();
            } else if (!std::isfinite(values_(i, j))) {
                throw NumericInputError("Trial: non-finite observed value at (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ")");
            }
        }
    }
}

Trial Trial::complete(Eigen::MatrixXd values) {
    ObservedMask mask = ObservedMask::Constant(values.rows(), values.cols(), true);
    return Trial(std::move(values), std::move(mask));
}

Trial Trial::from_nan(Eigen::MatrixXd values) {
    ObservedMask mask = !values.array().isNaN();
    return Trial(std::move(values), std::move(mask));
}

Trial Trial::hide(const ObservedMask& hide) const {
    if (hide.rows() != observed_.rows() || hide.cols() != observed_.cols()) {
        throw ShapeError("Trial::hide: mask shape does not match trial");
    }
    ObservedMask next = observed_ && !hide;
    return Trial(values_, std::move(next));
}

bool Trial::operator==(const Trial& other) const {
    if (values_.rows() != other.values_.rows() || values_.cols() != other.values_.cols()) return false;
    if ((observed_ != other.observed_).any()) return false;
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (observed_(i, j) && values_(i, j) != other.values_(i, j)) return false;
        }
    }
    return true;
}

}  // namespace misscov
