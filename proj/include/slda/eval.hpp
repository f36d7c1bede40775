#ifndef SLDA_EVAL_HPP
#define SLDA_EVAL_HPP

#include <cstdint>
#include <vector>

#include "slda/corpus.hpp"
#include "slda/model.hpp"
#include "slda/objective.hpp"

namespace slda {

struct Prediction {
    double score = 0.0;  // probability of the positive label
    int label = 0;
};
using PredictionSet = std::vector<Prediction>;

// Probability of a positive label from the observed words alone: embed the
// document, then apply the logistic regression head.
double predict_proba(const Document& doc, const ModelParams& params, const Embedder& emb);

// Scores every labeled document; slot writes, deterministic for any thread
// count. Throws if the corpus has no labeled documents.
PredictionSet predict_corpus(const Corpus& corpus, const ModelParams& params, const Embedder& emb,
                             int threads = 1);

// Fraction of documents where (score >= threshold) differs from the label.
double error_rate(const PredictionSet& preds, double threshold = 0.5);

// Probability a random positive outscores a random negative, ties counted
// half. Rank-statistic implementation, O(n log n).
double auc(const PredictionSet& preds);

// O(n^2) all-pairs counting; reference implementation for testing.
double auc_pair_oracle(const PredictionSet& preds);

struct BowModel {
    Vector weights;  // V
    double bias = 0.0;
    bool log1p = false;
};

// Mean logistic loss over documents with L2 penalty (l2/2)*||w||^2 on the
// weights (bias unpenalized), its gradient, at raw or log1p counts.
double bow_loss_and_grad(const Corpus& corpus, const Vector& weights, double bias, double l2,
                         bool log1p, Vector& d_weights, double& d_bias);

// Full-batch gradient descent from zero weights. Deterministic; the seed is
// accepted for interface stability but the descent itself draws nothing.
BowModel bow_logreg_train(const Corpus& corpus, double l2, int epochs, double learn_rate,
                          uint64_t seed, bool log1p = false);

double bow_predict(const BowModel& model, const Document& doc);
PredictionSet bow_predict_corpus(const BowModel& model, const Corpus& corpus);

}  // namespace slda

#endif
