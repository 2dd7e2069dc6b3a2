#pragma once

// Bivariate observed-data likelihood written out case by case, and its direct
// maximization by simplex search. Shared by the unit and acceptance suites.

#include "misscov/trial.hpp"

#include <gsl/gsl_multimin.h>

#include <array>
#include <cmath>

namespace misscov::testing {

inline constexpr double kLog2Pi = 1.8378770664093453;

inline double bivariate_loglik(const Trial& t, double s11, double s22, double s12) {
    const double det = s11 * s22 - s12 * s12;
    double ll = 0.0;
    for (Eigen::Index k = 0; k < t.samples(); ++k) {
        const bool o1 = t.observed()(0, k);
        const bool o2 = t.observed()(1, k);
        const double x1 = t.values()(0, k);
        const double x2 = t.values()(1, k);
        if (o1 && o2) {
            const double q = (s22 * x1 * x1 - 2.0 * s12 * x1 * x2 + s11 * x2 * x2) / det;
            ll += -kLog2Pi - 0.5 * std::log(det) - 0.5 * q;
        } else if (o1) {
            ll += -0.5 * (kLog2Pi + std::log(s11)) - x1 * x1 / (2.0 * s11);
        } else {
            ll += -0.5 * (kLog2Pi + std::log(s22)) - x2 * x2 / (2.0 * s22);
        }
    }
    return ll;
}

// theta = (log l11, l21, log l22) with Sigma = L L^T.
inline std::array<double, 3> sigma_of(const gsl_vector* theta) {
    const double l11 = std::exp(gsl_vector_get(theta, 0));
    const double l21 = gsl_vector_get(theta, 1);
    const double l22 = std::exp(gsl_vector_get(theta, 2));
    return {l11 * l11, l21 * l21 + l22 * l22, l11 * l21};
}

inline double negative_loglik(const gsl_vector* theta, void* params) {
    const auto s = sigma_of(theta);
    return -bivariate_loglik(*static_cast<const Trial*>(params), s[0], s[1], s[2]);
}

// Direct simplex search, restarted from its own optimum until it stops moving.
inline std::array<double, 3> direct_mle(const Trial& t) {
    double v1 = 0.0, v2 = 0.0;
    int c1 = 0, c2 = 0;
    for (Eigen::Index k = 0; k < t.samples(); ++k) {
        if (t.observed()(0, k)) v1 += t.values()(0, k) * t.values()(0, k), ++c1;
        if (t.observed()(1, k)) v2 += t.values()(1, k) * t.values()(1, k), ++c2;
    }
    gsl_vector* x = gsl_vector_alloc(3);
    gsl_vector_set(x, 0, 0.5 * std::log(v1 / c1));
    gsl_vector_set(x, 1, 0.0);
    gsl_vector_set(x, 2, 0.5 * std::log(v2 / c2));
    gsl_vector* step = gsl_vector_alloc(3);
    gsl_multimin_function f{&negative_loglik, 3, const_cast<Trial*>(&t)};
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);

    for (int restart = 0; restart < 6; ++restart) {
        gsl_vector_set_all(step, restart == 0 ? 0.3 : 0.01);
        gsl_multimin_fminimizer_set(m, &f, x, step);
        for (int it = 0; it < 20000; ++it) {
            if (gsl_multimin_fminimizer_iterate(m)) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-11) == GSL_SUCCESS) break;
        }
        gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(m));
    }
    const auto out = sigma_of(x);
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return out;
}

}  // namespace misscov::testing
