#ifndef SLDA_OBJECTIVE_HPP
#define SLDA_OBJECTIVE_HPP

#include <limits>

#include "slda/corpus.hpp"
#include "slda/embed_approx.hpp"
#include "slda/embed_ideal.hpp"
#include "slda/model.hpp"
#include "slda/types.hpp"

namespace slda {

// Term-by-term decomposition of the training objective. The total always
// recombines as w_y * label_term + w_x * (word_term + pi_prior_term +
// phi_prior_term); embedded objectives have pi_prior_term = 0.
struct ObjectiveBreakdown {
    double label_term = 0.0;
    double word_term = 0.0;
    double pi_prior_term = 0.0;
    double phi_prior_term = 0.0;
    double total = 0.0;
};

// Multinomial word log-likelihood up to the multinomial coefficient, which is
// constant in all parameters and dropped throughout.
double log_lik_words(const Document& doc, const Vector& pi, const Matrix& phi);

// Bernoulli label log-likelihood, computed through softplus so large scores
// neither overflow nor lose the sign.
double log_lik_label(int y, const Vector& pi, const Vector& eta);

// Which embedding replaces the per-document proportions in the end-to-end
// objectives.
struct Embedder {
    enum class Kind { ideal, approx };
    Kind kind = Kind::ideal;
    EmbedConfig cfg;                           // used by the ideal embedder
    const RecognitionParams* recog = nullptr;  // used by the approx embedder
};

Vector embed_document(const Document& doc, const Matrix& phi, double alpha, const Embedder& emb);

// Objective with explicitly instantiated per-document proportions (one row of
// `pis` per document).
ObjectiveBreakdown objective_instantiated(const Corpus& corpus, const ModelParams& params,
                                          const Matrix& pis, const PenaltyWeights& weights,
                                          bool include_phi_prior = true);

// Objective with proportions produced by the embedder. `threads` > 1 enables
// the OpenMP kernel; the serial variant is the reference implementation.
ObjectiveBreakdown objective_embedded(const Corpus& corpus, const ModelParams& params,
                                      const PenaltyWeights& weights, const Embedder& emb,
                                      int threads = 1, bool include_phi_prior = true);
ObjectiveBreakdown objective_embedded_serial(const Corpus& corpus, const ModelParams& params,
                                             const PenaltyWeights& weights, const Embedder& emb,
                                             bool include_phi_prior = true);
ObjectiveBreakdown objective_embedded_parallel(const Corpus& corpus, const ModelParams& params,
                                               const PenaltyWeights& weights, const Embedder& emb,
                                               int threads, bool include_phi_prior = true);

struct EmbeddedGrads {
    Matrix d_logits;  // K x V, chained through the row softmax
    Vector d_eta;     // K
    ObjectiveBreakdown breakdown;
    double train_error = std::numeric_limits<double>::quiet_NaN();  // over labeled docs
};

// Full-objective gradients with respect to topic logits and eta, including the
// embedding's dependence on phi. The ideal embedder must use fixed_unroll
// mode. `phi_path_through_embedding` = false ablates the gradient path through
// the approximate embedding's pre-activations.
EmbeddedGrads objective_embedded_grads(const Corpus& corpus, const ModelParams& params,
                                       const PenaltyWeights& weights, const Embedder& emb,
                                       int threads = 1, bool include_phi_prior = true,
                                       bool phi_path_through_embedding = true);
EmbeddedGrads objective_embedded_grads_serial(const Corpus& corpus, const ModelParams& params,
                                              const PenaltyWeights& weights, const Embedder& emb,
                                              bool include_phi_prior = true,
                                              bool phi_path_through_embedding = true);
EmbeddedGrads objective_embedded_grads_parallel(const Corpus& corpus, const ModelParams& params,
                                                const PenaltyWeights& weights, const Embedder& emb,
                                                int threads, bool include_phi_prior = true,
                                                bool phi_path_through_embedding = true);

// Chain a gradient in phi to the underlying logits through the row softmax.
Matrix chain_softmax_rows(const Matrix& phi, const Matrix& d_phi);

}  // namespace slda

#endif
