#ifndef SLDA_EMBED_APPROX_HPP
#define SLDA_EMBED_APPROX_HPP

#include <cstdint>
#include <span>

#include "slda/corpus.hpp"
#include "slda/embed_ideal.hpp"
#include "slda/types.hpp"

namespace slda {

// One-hidden-layer recognition network mapping (counts, topics) to
// document proportions.
struct RecognitionParams {
    Matrix hidden;  // H x V
    Matrix output;  // H x K

    int H() const { return static_cast<int>(hidden.rows()); }
};

// Hidden weights uniform in [-0.1, 0.1]; output weights zero, so the initial
// network maps every document to the uniform distribution.
RecognitionParams init_recognition(int H, int V, int K, uint64_t seed);

// Forward pass: a_hk = sum_v hidden_hv x_v phi_kv over the document support,
// s_k = sum_h output_hk sigmoid(a_hk), result softmax(s).
Vector recog_forward(const Document& doc, const Matrix& phi, const RecognitionParams& lam);

struct RecogGrads {
    Matrix d_hidden;  // H x V
    Matrix d_output;  // H x K
    Matrix d_phi;     // K x V
};

// Reverse-mode gradients of upstream . pi through the network, including the
// path through phi inside the pre-activations.
RecogGrads recog_forward_grads(const Document& doc, const Matrix& phi,
                               const RecognitionParams& lam, const Vector& upstream);

// KL(target || approx) for strictly positive simplex points.
double kl_loss(const Vector& target, const Vector& approx);

struct RecogOptConfig {
    int epochs = 20;
    double learn_rate = 0.05;
    uint64_t seed = 0;
    int threads = 1;  // used when precomputing the target embeddings
};

struct RecogTrainResult {
    RecognitionParams lam;
    double initial_mean_kl = 0.0;
    double final_mean_kl = 0.0;
};

// Stochastic gradient descent on the mean KL between the MAP embedding and
// the network output over `docs`. Returns the best parameters seen, so the
// final mean KL never exceeds the initial one.
RecogTrainResult train_recognition(std::span<const Document> docs, const Matrix& phi,
                                   double alpha, const RecognitionParams& init,
                                   const EmbedConfig& embed_cfg, const RecogOptConfig& opt);

}  // namespace slda

#endif
