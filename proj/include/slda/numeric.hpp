#ifndef SLDA_NUMERIC_HPP
#define SLDA_NUMERIC_HPP

#include <cmath>

#include "slda/types.hpp"

namespace slda {

// Logistic sigmoid, saturates without overflow for |x| up to DBL_MAX.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// Max-shifted softmax; returns a strictly positive vector summing to 1.
inline Vector softmax(const Vector& scores) {
    const double m = scores.maxCoeff();
    Vector out = (scores.array() - m).exp();
    out /= out.sum();
    return out;
}

// log Dir(p | conc * 1_dim) evaluated with its normalizing constant.
inline double log_dirichlet_symmetric(const Vector& p, double conc) {
    const int dim = static_cast<int>(p.size());
    double val = std::lgamma(conc * dim) - dim * std::lgamma(conc);
    for (int i = 0; i < dim; ++i) val += (conc - 1.0) * std::log(p[i]);
    return val;
}

}  // namespace slda

#endif
