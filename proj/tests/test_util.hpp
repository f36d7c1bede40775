#ifndef SLDA_TEST_UTIL_HPP
#define SLDA_TEST_UTIL_HPP

#include <string>
#include <vector>

#include "slda/corpus.hpp"
#include "slda/model.hpp"
#include "slda/rng.hpp"
#include "slda/types.hpp"

namespace slda::test {

inline Document make_doc(std::vector<std::pair<int, long>> counts, std::optional<int> label) {
    Document doc;
    doc.counts = std::move(counts);
    doc.label = label;
    for (const auto& [id, count] : doc.counts) doc.token_total += count;
    return doc;
}

inline Document random_doc(Rng& rng, int V, int max_distinct = 6, int max_count = 5) {
    const int distinct = 1 + static_cast<int>(rng.below(std::min(V, max_distinct)));
    std::vector<int> ids(V);
    for (int v = 0; v < V; ++v) ids[v] = v;
    rng.shuffle(ids);
    ids.resize(distinct);
    std::sort(ids.begin(), ids.end());
    std::vector<std::pair<int, long>> counts;
    for (int id : ids) counts.emplace_back(id, 1 + static_cast<long>(rng.below(max_count)));
    return make_doc(std::move(counts), std::nullopt);
}

inline Corpus random_corpus(Rng& rng, int D, int V, bool labeled) {
    std::vector<std::string> terms;
    for (int v = 0; v < V; ++v) terms.push_back("w" + std::to_string(v));
    Corpus corpus;
    corpus.vocabulary = Vocabulary::from_terms(std::move(terms));
    for (int d = 0; d < D; ++d) {
        Document doc = random_doc(rng, V);
        if (labeled) doc.label = static_cast<int>(rng.below(2));
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

inline Vector random_simplex(Rng& rng, int K) { return rng.dirichlet(1.0, K); }

inline Matrix random_phi(Rng& rng, int K, int V) {
    Matrix phi(K, V);
    for (int k = 0; k < K; ++k) phi.row(k) = rng.dirichlet(1.0, V).transpose();
    return phi;
}

inline Matrix random_logits(Rng& rng, int K, int V, double scale = 1.0) {
    Matrix logits(K, V);
    for (int k = 0; k < K; ++k)
        for (int v = 0; v < V; ++v) logits(k, v) = rng.uniform(-scale, scale);
    return logits;
}

// |a - b| <= tol * max(|a|, |b|, floor)
inline bool close_rel(double a, double b, double tol, double floor = 1e-8) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace slda::test

#endif
