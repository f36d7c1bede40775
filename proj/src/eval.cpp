#include "slda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <omp.h>

#include "slda/numeric.hpp"

namespace slda {

double predict_proba(const Document& doc, const ModelParams& params, const Embedder& emb) {
    const Matrix phi = phi_from_logits(params.topic_logits);
    const Vector pi = embed_document(doc, phi, params.alpha, emb);
    return sigmoid(params.eta.dot(pi));
}

PredictionSet predict_corpus(const Corpus& corpus, const ModelParams& params, const Embedder& emb,
                             int threads) {
    const Matrix phi = phi_from_logits(params.topic_logits);
    std::vector<int> labeled;
    for (int d = 0; d < corpus.n_docs(); ++d)
        if (corpus.documents[d].label) labeled.push_back(d);
    if (labeled.empty()) throw std::invalid_argument("predict_corpus: no labeled documents");

    PredictionSet preds(labeled.size());
    const int n = static_cast<int>(labeled.size());
    const int T = std::max(1, threads);
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(static) num_threads(T)
    for (int i = 0; i < n; ++i) {
        try {
            const Document& doc = corpus.documents[labeled[i]];
            const Vector pi = embed_document(doc, phi, params.alpha, emb);
            preds[i].score = sigmoid(params.eta.dot(pi));
            preds[i].label = *doc.label;
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return preds;
}

double error_rate(const PredictionSet& preds, double threshold) {
    if (preds.empty()) throw std::invalid_argument("error_rate: empty prediction set");
    long wrong = 0;
    for (const Prediction& p : preds)
        if ((p.score >= threshold ? 1 : 0) != p.label) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

double auc(const PredictionSet& preds) {
    if (preds.empty()) throw std::invalid_argument("auc: empty prediction set");
    const size_t n = preds.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return preds[a].score < preds[b].score; });

    // average ranks within tied groups
    long n_pos = 0;
    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && preds[order[j]].score == preds[order[i]].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (size_t k = i; k < j; ++k) {
            if (preds[order[k]].label == 1) {
                ++n_pos;
                pos_rank_sum += avg_rank;
            }
        }
        i = j;
    }
    const long n_neg = static_cast<long>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: needs at least one positive and one negative label");
    return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_pair_oracle(const PredictionSet& preds) {
    long n_pos = 0, n_neg = 0;
    double credit = 0.0;
    for (const Prediction& p : preds) {
        if (p.label == 1)
            ++n_pos;
        else
            ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: needs at least one positive and one negative label");
    for (const Prediction& p : preds) {
        if (p.label != 1) continue;
        for (const Prediction& q : preds) {
            if (q.label != 0) continue;
            if (p.score > q.score)
                credit += 1.0;
            else if (p.score == q.score)
                credit += 0.5;
        }
    }
    return credit / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

double feature_value(long count, bool log1p) {
    return log1p ? std::log1p(static_cast<double>(count)) : static_cast<double>(count);
}

double bow_score(const Vector& weights, double bias, const Document& doc, bool log1p) {
    double s = bias;
    for (const auto& [v, count] : doc.counts) s += weights[v] * feature_value(count, log1p);
    return s;
}

}  // namespace

double bow_loss_and_grad(const Corpus& corpus, const Vector& weights, double bias, double l2,
                         bool log1p, Vector& d_weights, double& d_bias) {
    if (!corpus.fully_labeled())
        throw std::invalid_argument("bow logistic regression requires a labeled corpus");
    const int D = corpus.n_docs();
    d_weights = Vector::Zero(weights.size());
    d_bias = 0.0;
    double loss = 0.0;
    for (const Document& doc : corpus.documents) {
        const double s = bow_score(weights, bias, doc, log1p);
        const int y = *doc.label;
        loss += softplus(s) - y * s;
        const double resid = sigmoid(s) - y;
        for (const auto& [v, count] : doc.counts)
            d_weights[v] += resid * feature_value(count, log1p);
        d_bias += resid;
    }
    loss /= D;
    d_weights /= D;
    d_bias /= D;
    loss += 0.5 * l2 * weights.squaredNorm();
    d_weights += l2 * weights;
    return loss;
}

BowModel bow_logreg_train(const Corpus& corpus, double l2, int epochs, double learn_rate,
                          uint64_t seed, bool log1p) {
    (void)seed;
    if (l2 < 0.0) throw std::invalid_argument("bow_logreg_train: l2 must be nonnegative");
    if (epochs < 1 || learn_rate <= 0.0)
        throw std::invalid_argument("bow_logreg_train: invalid optimizer config");
    BowModel model;
    model.weights = Vector::Zero(corpus.n_terms());
    model.log1p = log1p;
    Vector d_weights;
    double d_bias = 0.0;
    // proximal handling of the L2 term: exact shrinkage, stable for any l2
    for (int epoch = 0; epoch < epochs; ++epoch) {
        bow_loss_and_grad(corpus, model.weights, model.bias, 0.0, log1p, d_weights, d_bias);
        model.weights = (model.weights - learn_rate * d_weights) / (1.0 + learn_rate * l2);
        model.bias -= learn_rate * d_bias;
        if (!model.weights.allFinite() || !std::isfinite(model.bias))
            throw numerical_error("bow_logreg_train diverged");
    }
    return model;
}

double bow_predict(const BowModel& model, const Document& doc) {
    return sigmoid(bow_score(model.weights, model.bias, doc, model.log1p));
}

PredictionSet bow_predict_corpus(const BowModel& model, const Corpus& corpus) {
    PredictionSet preds;
    for (const Document& doc : corpus.documents) {
        if (!doc.label) continue;
        preds.push_back({bow_predict(model, doc), *doc.label});
    }
    if (preds.empty()) throw std::invalid_argument("bow_predict_corpus: no labeled documents");
    return preds;
}

}  // namespace slda
