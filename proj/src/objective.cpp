#include "slda/objective.hpp"

#include <cmath>
#include <omp.h>

#include "slda/numeric.hpp"

namespace slda {

namespace {

void require_labels_if_supervised(const Corpus& corpus, const PenaltyWeights& weights) {
    if (weights.w_y > 0.0 && !corpus.fully_labeled())
        throw std::invalid_argument("supervised objective (w_y > 0) requires labeled documents");
}

void check_embedder(const Embedder& emb, const Matrix& phi) {
    if (emb.kind == Embedder::Kind::approx) {
        if (emb.recog == nullptr)
            throw std::invalid_argument("approx embedder requires recognition parameters");
        if (emb.recog->output.cols() != phi.rows() || emb.recog->hidden.cols() != phi.cols())
            throw std::invalid_argument("recognition parameters do not match model dimensions");
    }
}

// Per-document contribution accumulator. Parallel runs keep one per thread and
// merge in thread order so results are reproducible at a fixed thread count.
struct GradAccum {
    Matrix d_phi;
    Vector d_eta;
    double label_term = 0.0;
    double word_term = 0.0;
    long n_labeled = 0;
    long n_wrong = 0;

    void init(Eigen::Index K, Eigen::Index V) {
        d_phi = Matrix::Zero(K, V);
        d_eta = Vector::Zero(K);
    }
    void merge(const GradAccum& other) {
        d_phi += other.d_phi;
        d_eta += other.d_eta;
        label_term += other.label_term;
        word_term += other.word_term;
        n_labeled += other.n_labeled;
        n_wrong += other.n_wrong;
    }
};

struct ValueAccum {
    double label_term = 0.0;
    double word_term = 0.0;

    void merge(const ValueAccum& other) {
        label_term += other.label_term;
        word_term += other.word_term;
    }
};

void accumulate_doc_value(const Document& doc, const Matrix& phi, const ModelParams& params,
                          const PenaltyWeights& weights, const Embedder& emb, ValueAccum& acc) {
    const Vector pi = embed_document(doc, phi, params.alpha, emb);
    acc.word_term += log_lik_words(doc, pi, phi);
    if (doc.label && weights.w_y != 0.0)
        acc.label_term += log_lik_label(*doc.label, pi, params.eta);
}

void accumulate_doc_grads(const Document& doc, const Matrix& phi, const ModelParams& params,
                          const PenaltyWeights& weights, const Embedder& emb, bool phi_path,
                          GradAccum& acc) {
    const int K = static_cast<int>(phi.rows());

    EmbedResult fwd;
    Vector pi;
    if (emb.kind == Embedder::Kind::ideal) {
        fwd = embed_map(doc, phi, params.alpha, emb.cfg, /*keep_trajectory=*/true);
        pi = fwd.pi;
    } else {
        pi = recog_forward(doc, phi, *emb.recog);
    }

    // word term and its gradients at the embedded proportions
    Vector word_pi_grad = Vector::Zero(K);
    for (const auto& [v, count] : doc.counts) {
        const double m = pi.dot(phi.col(v));
        if (m <= 0.0)
            throw numerical_error("objective: zero mixture probability for observed word");
        acc.word_term += count * std::log(m);
        word_pi_grad += (count / m) * phi.col(v);
        if (weights.w_x != 0.0) acc.d_phi.col(v) += (weights.w_x * count / m) * pi;
    }

    Vector upstream = weights.w_x * word_pi_grad;
    if (doc.label) {
        const double s = params.eta.dot(pi);
        const double p = sigmoid(s);
        const int y = *doc.label;
        if (weights.w_y != 0.0) {
            acc.label_term += y == 1 ? -softplus(-s) : -softplus(s);
            upstream += (weights.w_y * (y - p)) * params.eta;
            acc.d_eta += (weights.w_y * (y - p)) * pi;
        }
        ++acc.n_labeled;
        if ((p >= 0.5 ? 1 : 0) != y) ++acc.n_wrong;
    }

    if (emb.kind == Embedder::Kind::ideal) {
        acc.d_phi += embed_map_vjp_traced(fwd, doc, phi, params.alpha, emb.cfg, upstream);
    } else if (phi_path) {
        acc.d_phi += recog_forward_grads(doc, phi, *emb.recog, upstream).d_phi;
    }
}

ObjectiveBreakdown finish_breakdown(double label_term, double word_term, double pi_prior_term,
                                    const Matrix& phi, const ModelParams& params,
                                    const PenaltyWeights& weights, bool include_phi_prior) {
    ObjectiveBreakdown bd;
    bd.label_term = label_term;
    bd.word_term = word_term;
    bd.pi_prior_term = pi_prior_term;
    bd.phi_prior_term = include_phi_prior ? log_prior_phi(phi, params.beta) : 0.0;
    bd.total = weights.w_y * bd.label_term +
               weights.w_x * (bd.word_term + bd.pi_prior_term + bd.phi_prior_term);
    return bd;
}

}  // namespace

double log_lik_words(const Document& doc, const Vector& pi, const Matrix& phi) {
    if (pi.size() != phi.rows()) throw std::invalid_argument("log_lik_words: dimension mismatch");
    double val = 0.0;
    for (const auto& [v, count] : doc.counts) {
        if (v >= phi.cols()) throw std::invalid_argument("log_lik_words: term id out of range");
        const double m = pi.dot(phi.col(v));
        if (m <= 0.0)
            throw std::domain_error("log_lik_words: zero mixture probability for observed word");
        val += count * std::log(m);
    }
    return val;
}

double log_lik_label(int y, const Vector& pi, const Vector& eta) {
    if (y != 0 && y != 1) throw std::invalid_argument("log_lik_label: label must be 0 or 1");
    if (pi.size() != eta.size()) throw std::invalid_argument("log_lik_label: dimension mismatch");
    const double s = eta.dot(pi);
    return y == 1 ? -softplus(-s) : -softplus(s);
}

Vector embed_document(const Document& doc, const Matrix& phi, double alpha, const Embedder& emb) {
    if (emb.kind == Embedder::Kind::ideal) return embed_map(doc, phi, alpha, emb.cfg).pi;
    if (emb.recog == nullptr)
        throw std::invalid_argument("approx embedder requires recognition parameters");
    return recog_forward(doc, phi, *emb.recog);
}

ObjectiveBreakdown objective_instantiated(const Corpus& corpus, const ModelParams& params,
                                          const Matrix& pis, const PenaltyWeights& weights,
                                          bool include_phi_prior) {
    require_labels_if_supervised(corpus, weights);
    if (pis.rows() != corpus.n_docs() || pis.cols() != params.K())
        throw std::invalid_argument("objective_instantiated: pis shape mismatch");
    const Matrix phi = phi_from_logits(params.topic_logits);

    double label_term = 0.0, word_term = 0.0, pi_prior_term = 0.0;
    for (int d = 0; d < corpus.n_docs(); ++d) {
        const Vector pi = pis.row(d).transpose();
        if (pi.minCoeff() <= 0.0)
            throw std::domain_error("objective_instantiated: proportions must be positive");
        const Document& doc = corpus.documents[d];
        word_term += log_lik_words(doc, pi, phi);
        pi_prior_term += log_dirichlet_symmetric(pi, params.alpha);
        if (doc.label && weights.w_y != 0.0)
            label_term += log_lik_label(*doc.label, pi, params.eta);
    }
    return finish_breakdown(label_term, word_term, pi_prior_term, phi, params, weights,
                            include_phi_prior);
}

ObjectiveBreakdown objective_embedded_serial(const Corpus& corpus, const ModelParams& params,
                                             const PenaltyWeights& weights, const Embedder& emb,
                                             bool include_phi_prior) {
    require_labels_if_supervised(corpus, weights);
    const Matrix phi = phi_from_logits(params.topic_logits);
    check_embedder(emb, phi);

    ValueAccum acc;
    for (const Document& doc : corpus.documents)
        accumulate_doc_value(doc, phi, params, weights, emb, acc);
    return finish_breakdown(acc.label_term, acc.word_term, 0.0, phi, params, weights,
                            include_phi_prior);
}

ObjectiveBreakdown objective_embedded_parallel(const Corpus& corpus, const ModelParams& params,
                                               const PenaltyWeights& weights, const Embedder& emb,
                                               int threads, bool include_phi_prior) {
    require_labels_if_supervised(corpus, weights);
    const Matrix phi = phi_from_logits(params.topic_logits);
    check_embedder(emb, phi);

    const int T = std::max(1, threads);
    const int D = corpus.n_docs();
    std::vector<ValueAccum> partial(T);
    std::exception_ptr first_error = nullptr;
#pragma omp parallel num_threads(T)
    {
        ValueAccum& acc = partial[omp_get_thread_num()];
#pragma omp for schedule(static)
        for (int d = 0; d < D; ++d) {
            try {
                accumulate_doc_value(corpus.documents[d], phi, params, weights, emb, acc);
            } catch (...) {
#pragma omp critical
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    ValueAccum acc;
    for (const ValueAccum& p : partial) acc.merge(p);
    return finish_breakdown(acc.label_term, acc.word_term, 0.0, phi, params, weights,
                            include_phi_prior);
}

ObjectiveBreakdown objective_embedded(const Corpus& corpus, const ModelParams& params,
                                      const PenaltyWeights& weights, const Embedder& emb,
                                      int threads, bool include_phi_prior) {
    if (threads <= 1)
        return objective_embedded_serial(corpus, params, weights, emb, include_phi_prior);
    return objective_embedded_parallel(corpus, params, weights, emb, threads, include_phi_prior);
}

Matrix chain_softmax_rows(const Matrix& phi, const Matrix& d_phi) {
    Matrix d_logits(phi.rows(), phi.cols());
    for (Eigen::Index k = 0; k < phi.rows(); ++k) {
        const double inner = d_phi.row(k).dot(phi.row(k));
        d_logits.row(k) = phi.row(k).array() * (d_phi.row(k).array() - inner);
    }
    return d_logits;
}

namespace {

EmbeddedGrads finish_grads(GradAccum& acc, const Matrix& phi, const ModelParams& params,
                           const PenaltyWeights& weights, bool include_phi_prior) {
    EmbeddedGrads out;
    out.breakdown = finish_breakdown(acc.label_term, acc.word_term, 0.0, phi, params, weights,
                                     include_phi_prior);
    if (include_phi_prior && weights.w_x != 0.0)
        acc.d_phi.array() += weights.w_x * (params.beta - 1.0) / phi.array();
    out.d_logits = chain_softmax_rows(phi, acc.d_phi);
    out.d_eta = acc.d_eta;
    if (acc.n_labeled > 0)
        out.train_error = static_cast<double>(acc.n_wrong) / static_cast<double>(acc.n_labeled);
    return out;
}

void check_grad_preconditions(const Embedder& emb) {
    if (emb.kind == Embedder::Kind::ideal && emb.cfg.mode != EmbedMode::fixed_unroll)
        throw std::invalid_argument(
            "objective_embedded_grads: ideal embedder must use fixed_unroll mode");
}

}  // namespace

EmbeddedGrads objective_embedded_grads_serial(const Corpus& corpus, const ModelParams& params,
                                              const PenaltyWeights& weights, const Embedder& emb,
                                              bool include_phi_prior,
                                              bool phi_path_through_embedding) {
    require_labels_if_supervised(corpus, weights);
    check_grad_preconditions(emb);
    const Matrix phi = phi_from_logits(params.topic_logits);
    check_embedder(emb, phi);

    GradAccum acc;
    acc.init(phi.rows(), phi.cols());
    for (const Document& doc : corpus.documents)
        accumulate_doc_grads(doc, phi, params, weights, emb, phi_path_through_embedding, acc);
    return finish_grads(acc, phi, params, weights, include_phi_prior);
}

EmbeddedGrads objective_embedded_grads_parallel(const Corpus& corpus, const ModelParams& params,
                                                const PenaltyWeights& weights, const Embedder& emb,
                                                int threads, bool include_phi_prior,
                                                bool phi_path_through_embedding) {
    require_labels_if_supervised(corpus, weights);
    check_grad_preconditions(emb);
    const Matrix phi = phi_from_logits(params.topic_logits);
    check_embedder(emb, phi);

    const int T = std::max(1, threads);
    const int D = corpus.n_docs();
    std::vector<GradAccum> partial(T);
    for (GradAccum& p : partial) p.init(phi.rows(), phi.cols());
    std::exception_ptr first_error = nullptr;
#pragma omp parallel num_threads(T)
    {
        GradAccum& acc = partial[omp_get_thread_num()];
#pragma omp for schedule(static)
        for (int d = 0; d < D; ++d) {
            try {
                accumulate_doc_grads(corpus.documents[d], phi, params, weights, emb,
                                     phi_path_through_embedding, acc);
            } catch (...) {
#pragma omp critical
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    GradAccum acc;
    acc.init(phi.rows(), phi.cols());
    for (const GradAccum& p : partial) acc.merge(p);
    return finish_grads(acc, phi, params, weights, include_phi_prior);
}

EmbeddedGrads objective_embedded_grads(const Corpus& corpus, const ModelParams& params,
                                       const PenaltyWeights& weights, const Embedder& emb,
                                       int threads, bool include_phi_prior,
                                       bool phi_path_through_embedding) {
    if (threads <= 1)
        return objective_embedded_grads_serial(corpus, params, weights, emb, include_phi_prior,
                                               phi_path_through_embedding);
    return objective_embedded_grads_parallel(corpus, params, weights, emb, threads,
                                             include_phi_prior, phi_path_through_embedding);
}

}  // namespace slda
