#include "slda/model.hpp"

#include <cmath>

#include "slda/rng.hpp"

namespace slda {

void validate_weights(const PenaltyWeights& weights) {
    if (weights.w_x < 0.0 || weights.w_y < 0.0)
        throw std::invalid_argument("penalty weights must be nonnegative");
    if (weights.w_x == 0.0 && weights.w_y == 0.0)
        throw std::invalid_argument("degenerate weights: w_x and w_y are both zero");
}

Matrix phi_from_logits(const Matrix& topic_logits) {
    if (!topic_logits.allFinite())
        throw numerical_error("phi_from_logits: non-finite logits");
    Matrix phi(topic_logits.rows(), topic_logits.cols());
    for (Eigen::Index k = 0; k < topic_logits.rows(); ++k) {
        const double m = topic_logits.row(k).maxCoeff();
        phi.row(k) = (topic_logits.row(k).array() - m).exp();
        phi.row(k) /= phi.row(k).sum();
    }
    return phi;
}

double log_prior_phi(const Matrix& phi, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("log_prior_phi: beta must be positive");
    const int V = static_cast<int>(phi.cols());
    double val = 0.0;
    for (Eigen::Index k = 0; k < phi.rows(); ++k) {
        val += std::lgamma(beta * V) - V * std::lgamma(beta);
        for (int v = 0; v < V; ++v) {
            if (phi(k, v) <= 0.0)
                throw std::domain_error("log_prior_phi: nonpositive phi entry");
            val += (beta - 1.0) * std::log(phi(k, v));
        }
    }
    return val;
}

ModelParams init_params(int K, int V, uint64_t seed, double scale) {
    if (K < 1 || V < 1) throw std::invalid_argument("init_params: K and V must be >= 1");
    if (scale < 0.0) throw std::invalid_argument("init_params: scale must be nonnegative");
    Rng rng(seed);
    ModelParams params;
    params.topic_logits.resize(K, V);
    for (int k = 0; k < K; ++k)
        for (int v = 0; v < V; ++v) params.topic_logits(k, v) = rng.uniform(-scale, scale);
    params.eta = Vector::Zero(K);
    return params;
}

}  // namespace slda
