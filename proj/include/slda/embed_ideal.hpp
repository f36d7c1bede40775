#ifndef SLDA_EMBED_IDEAL_HPP
#define SLDA_EMBED_IDEAL_HPP

#include <vector>

#include "slda/corpus.hpp"
#include "slda/types.hpp"

namespace slda {

enum class EmbedMode { converge, fixed_unroll };

struct EmbedConfig {
    double step_size = 0.005;  // multiplicative-update step
    int max_iters = 200;       // iteration budget; exact count in fixed_unroll mode
    double tol = 1e-8;         // converge-mode stop: max |pi_t - pi_{t-1}| < tol
    EmbedMode mode = EmbedMode::converge;
};

// Converge-mode defaults used at evaluation time (larger budget).
EmbedConfig converge_config(int max_iters = 2000, double step_size = 0.005, double tol = 1e-8);
// Fixed-length unrolled config used when gradients must flow through the map.
EmbedConfig unroll_config(int iters = 200, double step_size = 0.005);

struct EmbedResult {
    Vector pi;  // strictly positive, sums to 1
    int iters_used = 0;
    bool converged = false;
    // Iterates pi^0..pi^T, retained only when requested (needed for the VJP).
    std::vector<Vector> trajectory;
};

// Per-document MAP objective: sum_v x_v log(sum_k pi_k phi_kv)
// + log Dir(pi | alpha), normalizer included.
double doc_objective(const Vector& pi, const Document& doc, const Matrix& phi, double alpha);

// Gradient of doc_objective: component k is
// sum_v x_v phi_kv / (sum_j pi_j phi_jv) + (alpha - 1) / pi_k.
Vector doc_objective_grad(const Vector& pi, const Document& doc, const Matrix& phi, double alpha);

// Multiplicative-update MAP inference of the document proportions. Starts
// uniform, repeatedly reweights each entry by exp(step * grad) (max-shifted)
// and renormalizes.
EmbedResult embed_map(const Document& doc, const Matrix& phi, double alpha,
                      const EmbedConfig& cfg, bool keep_trajectory = false);

// Reverse-mode d(upstream . pi^T)/d(phi) through all unrolled iterations.
// Requires fixed_unroll mode and alpha >= 1. Nonzero only on the document's
// support columns.
Matrix embed_map_vjp(const Document& doc, const Matrix& phi, double alpha, const EmbedConfig& cfg,
                     const Vector& upstream);

// Same, reusing a forward result whose trajectory was retained.
Matrix embed_map_vjp_traced(const EmbedResult& fwd, const Document& doc, const Matrix& phi,
                            double alpha, const EmbedConfig& cfg, const Vector& upstream);

}  // namespace slda

#endif
