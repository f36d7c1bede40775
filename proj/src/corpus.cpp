#include "slda/corpus.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace slda {

namespace {

std::string strip_trailing_ws(const std::string& s) {
    size_t end = s.size();
    while (end > 0 && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r' ||
                       s[end - 1] == '\n'))
        --end;
    return s.substr(0, end);
}

[[noreturn]] void bad_line(const std::string& path, int lineno, const std::string& what) {
    throw io_error(path + ":" + std::to_string(lineno) + ": " + what);
}

// Parses a nonnegative decimal integer occupying the whole token.
bool parse_long(const std::string& tok, long& out) {
    if (tok.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size()) return false;
    out = v;
    return true;
}

}  // namespace

Vocabulary Vocabulary::from_terms(std::vector<std::string> terms) {
    if (terms.empty()) throw std::invalid_argument("vocabulary must contain at least one term");
    Vocabulary vocab;
    vocab.terms = std::move(terms);
    vocab.index.reserve(vocab.terms.size());
    for (size_t i = 0; i < vocab.terms.size(); ++i) {
        if (vocab.terms[i].empty())
            throw std::invalid_argument("vocabulary term " + std::to_string(i) + " is empty");
        auto [it, inserted] = vocab.index.emplace(vocab.terms[i], static_cast<int>(i));
        (void)it;
        if (!inserted)
            throw std::invalid_argument("duplicate vocabulary term: " + vocab.terms[i]);
    }
    return vocab;
}

bool Corpus::fully_labeled() const {
    for (const auto& d : documents)
        if (!d.label.has_value()) return false;
    return true;
}

void validate_corpus(const Corpus& corpus) {
    const int V = corpus.n_terms();
    if (V < 1) throw std::invalid_argument("corpus vocabulary is empty");
    for (size_t d = 0; d < corpus.documents.size(); ++d) {
        const Document& doc = corpus.documents[d];
        long total = 0;
        int prev_id = -1;
        for (const auto& [id, count] : doc.counts) {
            if (id <= prev_id)
                throw std::invalid_argument("document " + std::to_string(d) +
                                            ": term ids not strictly ascending");
            if (id >= V)
                throw std::invalid_argument("document " + std::to_string(d) + ": term id " +
                                            std::to_string(id) + " >= V=" + std::to_string(V));
            if (count < 1)
                throw std::invalid_argument("document " + std::to_string(d) +
                                            ": nonpositive count");
            prev_id = id;
            total += count;
        }
        if (total != doc.token_total)
            throw std::invalid_argument("document " + std::to_string(d) +
                                        ": token_total does not match counts");
        if (doc.label && *doc.label != 0 && *doc.label != 1)
            throw std::invalid_argument("document " + std::to_string(d) + ": label not in {0,1}");
    }
}

Corpus load_corpus(const std::string& docs_path, const std::string& vocab_path) {
    std::ifstream vf(vocab_path);
    if (!vf) throw io_error("cannot open vocabulary file: " + vocab_path);
    std::vector<std::string> terms;
    std::string line;
    int lineno = 0;
    while (std::getline(vf, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) bad_line(vocab_path, lineno, "empty term");
        terms.push_back(line);
    }
    if (terms.empty()) throw io_error(vocab_path + ": empty vocabulary");

    Corpus corpus;
    corpus.vocabulary = Vocabulary::from_terms(std::move(terms));
    const int V = corpus.n_terms();

    std::ifstream df(docs_path);
    if (!df) throw io_error("cannot open corpus file: " + docs_path);
    lineno = 0;
    while (std::getline(df, line)) {
        ++lineno;
        line = strip_trailing_ws(line);
        if (line.empty()) bad_line(docs_path, lineno, "blank document line");

        const size_t tab = line.find('\t');
        if (tab == std::string::npos) bad_line(docs_path, lineno, "missing label/counts separator");
        const std::string label_tok = line.substr(0, tab);

        Document doc;
        if (label_tok == "0")
            doc.label = 0;
        else if (label_tok == "1")
            doc.label = 1;
        else if (label_tok == "?")
            doc.label = std::nullopt;
        else
            bad_line(docs_path, lineno, "label must be 0, 1 or ?, got '" + label_tok + "'");

        const std::string rest = line.substr(tab + 1);
        if (rest.empty()) bad_line(docs_path, lineno, "document has no counts");
        size_t pos = 0;
        int prev_id = -1;
        while (pos < rest.size()) {
            size_t next = rest.find(' ', pos);
            if (next == std::string::npos) next = rest.size();
            const std::string entry = rest.substr(pos, next - pos);
            if (entry.empty()) bad_line(docs_path, lineno, "empty count entry");
            const size_t colon = entry.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == entry.size())
                bad_line(docs_path, lineno, "count entry not of form id:count: '" + entry + "'");
            long id = 0, count = 0;
            if (!parse_long(entry.substr(0, colon), id))
                bad_line(docs_path, lineno, "bad term id in '" + entry + "'");
            if (!parse_long(entry.substr(colon + 1), count))
                bad_line(docs_path, lineno, "bad count in '" + entry + "'");
            if (id >= V)
                bad_line(docs_path, lineno,
                         "term id " + std::to_string(id) + " >= V=" + std::to_string(V));
            if (id <= prev_id)
                bad_line(docs_path, lineno, "term ids must be strictly ascending");
            if (count <= 0) bad_line(docs_path, lineno, "count must be positive");
            doc.counts.emplace_back(static_cast<int>(id), count);
            doc.token_total += count;
            prev_id = static_cast<int>(id);
            pos = next + 1;
        }
        corpus.documents.push_back(std::move(doc));
    }
    if (corpus.documents.empty()) throw io_error(docs_path + ": no documents");
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& docs_path,
                  const std::string& vocab_path) {
    validate_corpus(corpus);

    std::ofstream vf(vocab_path);
    if (!vf) throw io_error("cannot write vocabulary file: " + vocab_path);
    for (const auto& term : corpus.vocabulary.terms) vf << term << '\n';
    if (!vf) throw io_error("write failed: " + vocab_path);

    std::ofstream df(docs_path);
    if (!df) throw io_error("cannot write corpus file: " + docs_path);
    for (const auto& doc : corpus.documents) {
        if (doc.label)
            df << *doc.label;
        else
            df << '?';
        df << '\t';
        for (size_t i = 0; i < doc.counts.size(); ++i) {
            if (i > 0) df << ' ';
            df << doc.counts[i].first << ':' << doc.counts[i].second;
        }
        df << '\n';
    }
    if (!df) throw io_error("write failed: " + docs_path);
}

}  // namespace slda
