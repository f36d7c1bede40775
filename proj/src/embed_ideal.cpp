#include "slda/embed_ideal.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

#include "slda/numeric.hpp"

namespace slda {

namespace {

void check_dims(const Vector& pi, const Document& doc, const Matrix& phi) {
    if (pi.size() != phi.rows()) throw std::invalid_argument("pi/phi topic dimension mismatch");
    if (!doc.counts.empty() && doc.counts.back().first >= phi.cols())
        throw std::invalid_argument("document term id out of range for phi");
}

// Mixture probabilities m_v = sum_k pi_k phi_kv over the document support.
std::vector<double> support_mixture(const Vector& pi, const Document& doc, const Matrix& phi) {
    std::vector<double> mix(doc.counts.size());
    for (size_t i = 0; i < doc.counts.size(); ++i) {
        const int v = doc.counts[i].first;
        mix[i] = pi.dot(phi.col(v));
    }
    return mix;
}

std::atomic<bool> warned_small_alpha{false};

}  // namespace

EmbedConfig converge_config(int max_iters, double step_size, double tol) {
    EmbedConfig cfg;
    cfg.mode = EmbedMode::converge;
    cfg.max_iters = max_iters;
    cfg.step_size = step_size;
    cfg.tol = tol;
    return cfg;
}

EmbedConfig unroll_config(int iters, double step_size) {
    EmbedConfig cfg;
    cfg.mode = EmbedMode::fixed_unroll;
    cfg.max_iters = iters;
    cfg.step_size = step_size;
    return cfg;
}

double doc_objective(const Vector& pi, const Document& doc, const Matrix& phi, double alpha) {
    check_dims(pi, doc, phi);
    if (pi.minCoeff() <= 0.0) throw std::domain_error("doc_objective: pi must be strictly positive");
    double val = 0.0;
    for (const auto& [v, count] : doc.counts) {
        const double m = pi.dot(phi.col(v));
        if (m <= 0.0) throw std::domain_error("doc_objective: zero mixture probability for observed word");
        val += count * std::log(m);
    }
    return val + log_dirichlet_symmetric(pi, alpha);
}

Vector doc_objective_grad(const Vector& pi, const Document& doc, const Matrix& phi, double alpha) {
    check_dims(pi, doc, phi);
    if (pi.minCoeff() <= 0.0)
        throw std::domain_error("doc_objective_grad: pi must be strictly positive");
    Vector grad = Vector::Zero(pi.size());
    for (const auto& [v, count] : doc.counts) {
        const double m = pi.dot(phi.col(v));
        if (m <= 0.0)
            throw std::domain_error("doc_objective_grad: zero mixture probability for observed word");
        grad += (count / m) * phi.col(v);
    }
    grad.array() += (alpha - 1.0) / pi.array();
    return grad;
}

EmbedResult embed_map(const Document& doc, const Matrix& phi, double alpha,
                      const EmbedConfig& cfg, bool keep_trajectory) {
    if (cfg.step_size <= 0.0 || cfg.max_iters < 1 || cfg.tol < 0.0)
        throw std::invalid_argument("embed_map: invalid config");
    if (doc.token_total < 1) throw std::invalid_argument("embed_map: empty document");
    if (alpha < 1.0 && cfg.mode == EmbedMode::converge && !warned_small_alpha.exchange(true))
        std::fprintf(stderr,
                     "warning: alpha=%g < 1 makes the proportion objective unbounded at the "
                     "simplex boundary; iterates stay interior but may not converge\n",
                     alpha);

    const int K = static_cast<int>(phi.rows());
    EmbedResult result;
    result.pi = Vector::Constant(K, 1.0 / K);
    if (keep_trajectory) result.trajectory.push_back(result.pi);

    for (int t = 1; t <= cfg.max_iters; ++t) {
        const Vector grad = doc_objective_grad(result.pi, doc, phi, alpha);
        if (!grad.allFinite()) throw numerical_error("embed_map: non-finite gradient");
        // Multiplicative reweighting; the shift by the max exponent cancels in
        // the normalization but keeps exp() in range. The floor guards against
        // underflow to an exact zero on long runs.
        Vector expo = cfg.step_size * grad;
        const double shift = expo.maxCoeff();
        Vector next = result.pi.array() * (expo.array() - shift).exp();
        next = next.cwiseMax(1e-290);
        next /= next.sum();
        const double delta = (next - result.pi).cwiseAbs().maxCoeff();
        result.pi = next;
        result.iters_used = t;
        if (keep_trajectory) result.trajectory.push_back(result.pi);
        if (cfg.mode == EmbedMode::converge && delta < cfg.tol) {
            result.converged = true;
            break;
        }
        if (cfg.mode == EmbedMode::fixed_unroll && t == cfg.max_iters)
            result.converged = delta < cfg.tol;
    }
    return result;
}

Matrix embed_map_vjp_traced(const EmbedResult& fwd, const Document& doc, const Matrix& phi,
                            double alpha, const EmbedConfig& cfg, const Vector& upstream) {
    if (cfg.mode != EmbedMode::fixed_unroll)
        throw std::invalid_argument("embed_map_vjp: differentiation requires fixed_unroll mode");
    if (alpha < 1.0)
        throw std::invalid_argument("embed_map_vjp: alpha must be >= 1 for differentiation");
    if (fwd.trajectory.empty())
        throw std::invalid_argument("embed_map_vjp: forward trajectory not retained");
    if (upstream.size() != phi.rows())
        throw std::invalid_argument("embed_map_vjp: upstream gradient dimension mismatch");

    const int K = static_cast<int>(phi.rows());
    const int T = static_cast<int>(fwd.trajectory.size()) - 1;
    Matrix d_phi = Matrix::Zero(K, phi.cols());
    Vector r = upstream;  // dL/d(pi^t), walked backwards

    for (int t = T; t >= 1; --t) {
        const Vector& prev = fwd.trajectory[t - 1];
        const Vector& cur = fwd.trajectory[t];

        // Recompute the forward step's intermediates from pi^{t-1}.
        const std::vector<double> mix = support_mixture(prev, doc, phi);
        Vector grad = Vector::Zero(K);
        for (size_t i = 0; i < doc.counts.size(); ++i)
            grad += (doc.counts[i].second / mix[i]) * phi.col(doc.counts[i].first);
        grad.array() += (alpha - 1.0) / prev.array();
        Vector expo = cfg.step_size * grad;
        const double shift = expo.maxCoeff();
        const Vector u = (prev.array() * (expo.array() - shift).exp()).cwiseMax(1e-290);
        const double total = u.sum();

        // Normalization: pi^t = u / sum(u). The shift acts as a common scale
        // on u and so contributes nothing through the normalized output.
        const double rdot = r.dot(cur);
        const Vector d_u = (r.array() - rdot) / total;
        const Vector d_grad = cfg.step_size * d_u.array() * u.array();
        Vector d_prev = d_u.array() * u.array() / prev.array();
        d_prev.array() -= d_grad.array() * (alpha - 1.0) / prev.array().square();

        for (size_t i = 0; i < doc.counts.size(); ++i) {
            const int v = doc.counts[i].first;
            const double count = doc.counts[i].second;
            const double m = mix[i];
            const double c = d_grad.dot(phi.col(v));
            // d(grad_k)/d(phi_kv) = x_v/m_v, plus the mixture path -x_v phi_kv pi_j / m_v^2
            d_phi.col(v) += (count / m) * d_grad - (count * c / (m * m)) * prev;
            d_prev -= (count * c / (m * m)) * phi.col(v);
        }
        if (!d_prev.allFinite()) throw numerical_error("embed_map_vjp: non-finite intermediate");
        r = d_prev;
    }
    return d_phi;
}

Matrix embed_map_vjp(const Document& doc, const Matrix& phi, double alpha, const EmbedConfig& cfg,
                     const Vector& upstream) {
    const EmbedResult fwd = embed_map(doc, phi, alpha, cfg, /*keep_trajectory=*/true);
    return embed_map_vjp_traced(fwd, doc, phi, alpha, cfg, upstream);
}

}  // namespace slda
