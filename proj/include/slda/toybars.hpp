#ifndef SLDA_TOYBARS_HPP
#define SLDA_TOYBARS_HPP

#include <cstdint>
#include <string>
#include <utility>

#include "slda/corpus.hpp"
#include "slda/types.hpp"

namespace slda {

// Synthetic pixel-grid corpus. Words are generated by 6 bar topics
// (3 horizontal, 3 vertical); labels are produced from an expanded set of 10
// topics whose first four rows are bar-pair combinations, so no single bar
// predicts a positive label but designated pairs do.
struct ToyBarsConfig {
    int grid_side = 12;  // V = grid_side^2; must be >= 3 and divisible by 3
    int n_docs = 1000;
    int tokens_per_doc = 50;
    double doc_alpha = 0.5;    // Dirichlet concentration for the 6-bar mixtures
    Vector label_coeffs;       // 10 coefficients; empty selects the default
    bool label_noise = true;  // Bernoulli labels; false thresholds at 0.5
    uint64_t seed = 0;
    int threads = 1;
};

// +4 on the four combination topics, -2 on the six single bars.
Vector default_label_coeffs();

// (phi6, phi10). phi6 rows: horizontal bars 0-2, vertical bars 0-2, each
// uniform over its cells. phi10 rows 0-3: the combinations (h0,v0), (h1,v1),
// (h2,v2), (h0,v1), uniform over the union; rows 4-9: the six single bars.
std::pair<Matrix, Matrix> make_true_topics(const ToyBarsConfig& cfg);

struct ToyBarsTruth {
    Matrix phi6;      // 6 x V
    Matrix phi10;     // 10 x V
    Vector eta_true;  // 10
    // Per-document generating mixtures and their 10-topic lifts (the label
    // representation), rows aligned with train then test documents.
    Matrix pi6;
    Matrix pi10;
};

struct ToyBarsData {
    Corpus train;
    Corpus test;
    ToyBarsTruth truth;
};

// Draws each document's bar mixture from Dir(doc_alpha), samples its tokens
// from the 6-topic mixture, lifts the mixture into the 10 topics (designated
// pair overlap goes to the pair's combination topic), and draws the label
// from the logistic score of the lifted representation. 90/10 train/test
// split after a seeded shuffle.
ToyBarsData generate(const ToyBarsConfig& cfg);

// Writes phi6.csv, phi10.csv, eta_true.csv and config.txt under dir.
void write_truth(const ToyBarsData& data, const ToyBarsConfig& cfg, const std::string& dir);

}  // namespace slda

#endif
