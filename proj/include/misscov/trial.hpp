#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace misscov {

// true = observed
using ObservedMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// One channels x samples recording segment with its observedness mask.
// Unobserved positions hold NaN and are never read by estimators.
class Trial {
public:
    // Requires p, n >= 1, matching shapes, finite values at observed positions
    // and at least one observed entry in every sample column.
    Trial(Eigen::MatrixXd values, ObservedMask observed);

    static Trial complete(Eigen::MatrixXd values);
    // NaN entries become unobserved.
    static Trial from_nan(Eigen::MatrixXd values);

    Eigen::Index channels() const noexcept { return values_.rows(); }
    Eigen::Index samples() const noexcept { return values_.cols(); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const ObservedMask& observed() const noexcept { return observed_; }

    bool is_complete() const noexcept { return observed_.all(); }
    std::size_t missing_count() const noexcept {
        return static_cast<std::size_t>(observed_.size() - observed_.count());
    }
    bool channel_fully_observed(Eigen::Index c) const { return observed_.row(c).all(); }
    bool sample_fully_observed(Eigen::Index s) const { return observed_.col(s).all(); }

    // Copy with additional positions hidden (hide == true). Observed values
    // elsewhere are left untouched.
    Trial hide(const ObservedMask& hide) const;

    // Same shape, same mask, bitwise-equal values at observed positions.
    bool operator==(const Trial& other) const;

private:
    Eigen::MatrixXd values_;
    ObservedMask observed_;
};

}  // namespace misscov
