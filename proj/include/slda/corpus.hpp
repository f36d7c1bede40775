#ifndef SLDA_CORPUS_HPP
#define SLDA_CORPUS_HPP

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slda/types.hpp"

namespace slda {

// Ordered list of distinct term strings; position in `terms` is the term id.
struct Vocabulary {
    std::vector<std::string> terms;
    std::unordered_map<std::string, int> index;

    static Vocabulary from_terms(std::vector<std::string> terms);
    int size() const { return static_cast<int>(terms.size()); }

    bool operator==(const Vocabulary& other) const { return terms == other.terms; }
};

// Sparse count histogram over the vocabulary, optionally labeled.
struct Document {
    // (term id, count) pairs, ids strictly ascending, counts >= 1.
    std::vector<std::pair<int, long>> counts;
    std::optional<int> label;  // 0 or 1 when present
    long token_total = 0;      // sum of counts

    bool operator==(const Document& other) const {
        return counts == other.counts && label == other.label && token_total == other.token_total;
    }
};

struct Corpus {
    Vocabulary vocabulary;
    std::vector<Document> documents;

    int n_docs() const { return static_cast<int>(documents.size()); }
    int n_terms() const { return vocabulary.size(); }
    bool fully_labeled() const;

    bool operator==(const Corpus& other) const {
        return vocabulary == other.vocabulary && documents == other.documents;
    }
};

// Checks type invariants (ids in range, counts positive, token totals); throws
// std::invalid_argument on violation.
void validate_corpus(const Corpus& corpus);

// Reads a corpus from the line-oriented text format (see README). The
// vocabulary file has one term per line; the documents file has one document
// per line: `<label>\t<id>:<count> <id>:<count> ...` with label in {0,1,?}.
// Malformed input raises io_error naming the offending line.
Corpus load_corpus(const std::string& docs_path, const std::string& vocab_path);

// Inverse of load_corpus; term ids are written in ascending order per line.
void write_corpus(const Corpus& corpus, const std::string& docs_path,
                  const std::string& vocab_path);

}  // namespace slda

#endif
