#ifndef SLDA_MODEL_HPP
#define SLDA_MODEL_HPP

#include <cstdint>

#include "slda/types.hpp"

namespace slda {

// Topic-word parameters live as unconstrained logits; phi is the row-softmax.
struct ModelParams {
    Matrix topic_logits;  // K x V
    Vector eta;           // K regression coefficients
    double alpha = 1.01;  // symmetric Dirichlet over document proportions
    double beta = 1.0;    // symmetric Dirichlet over topic-word rows

    int K() const { return static_cast<int>(topic_logits.rows()); }
    int V() const { return static_cast<int>(topic_logits.cols()); }
};

struct PenaltyWeights {
    double w_x = 1.0;
    double w_y = 1.0;
};

// Throws std::invalid_argument when weights are unusable for training.
void validate_weights(const PenaltyWeights& weights);

// Row-wise max-shifted softmax of the logits. Rows of the result are strictly
// positive and sum to 1. Throws numerical_error on non-finite input.
Matrix phi_from_logits(const Matrix& topic_logits);

// Sum over topics of log Dir(phi_k | beta * 1_V), normalizing constants
// included. beta = 1 gives the constant K * lgamma(V).
double log_prior_phi(const Matrix& phi, double beta);

// Logits i.i.d. uniform in [-scale, scale] from Rng(seed); eta all zero.
ModelParams init_params(int K, int V, uint64_t seed, double scale);

}  // namespace slda

#endif
