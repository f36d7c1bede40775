#include "slda/toybars.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "slda/numeric.hpp"
#include "slda/rng.hpp"

namespace slda {

namespace {

void validate(const ToyBarsConfig& cfg) {
    if (cfg.grid_side < 3 || cfg.grid_side % 3 != 0)
        throw std::invalid_argument("toybars: grid_side must be >= 3 and divisible by 3");
    if (cfg.n_docs < 2) throw std::invalid_argument("toybars: n_docs must be >= 2");
    if (cfg.tokens_per_doc < 1)
        throw std::invalid_argument("toybars: tokens_per_doc must be >= 1");
    if (cfg.doc_alpha <= 0.0) throw std::invalid_argument("toybars: doc_alpha must be positive");
    if (cfg.label_coeffs.size() != 0 && cfg.label_coeffs.size() != 10)
        throw std::invalid_argument("toybars: label_coeffs must have 10 entries");
}

// cells of horizontal bar i (rows) or vertical bar j (columns)
void fill_bar(Matrix& phi, int row, int bar, bool horizontal, int side) {
    const int thick = side / 3;
    const double mass = 1.0 / (side * thick);
    for (int a = bar * thick; a < (bar + 1) * thick; ++a)
        for (int b = 0; b < side; ++b) {
            const int v = horizontal ? a * side + b : b * side + a;
            phi(row, v) = mass;
        }
}

void fill_combo(Matrix& phi, int row, int hbar, int vbar, int side) {
    const int thick = side / 3;
    const int union_cells = 2 * side * thick - thick * thick;
    const double mass = 1.0 / union_cells;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const bool in_h = r >= hbar * thick && r < (hbar + 1) * thick;
            const bool in_v = c >= vbar * thick && c < (vbar + 1) * thick;
            if (in_h || in_v) phi(row, r * side + c) = mass;
        }
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot write " + path);
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            f << (c ? "," : "") << buf;
        }
        f << '\n';
    }
    if (!f) throw io_error("write failed: " + path);
}

}  // namespace

Vector default_label_coeffs() {
    Vector eta(10);
    eta << 4.0, 4.0, 4.0, 4.0, -2.0, -2.0, -2.0, -2.0, -2.0, -2.0;
    return eta;
}

std::pair<Matrix, Matrix> make_true_topics(const ToyBarsConfig& cfg) {
    validate(cfg);
    const int side = cfg.grid_side;
    const int V = side * side;

    Matrix phi6 = Matrix::Zero(6, V);
    for (int i = 0; i < 3; ++i) fill_bar(phi6, i, i, /*horizontal=*/true, side);
    for (int j = 0; j < 3; ++j) fill_bar(phi6, 3 + j, j, /*horizontal=*/false, side);

    Matrix phi10 = Matrix::Zero(10, V);
    const int combos[4][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}};
    for (int i = 0; i < 4; ++i) fill_combo(phi10, i, combos[i][0], combos[i][1], side);
    phi10.bottomRows(6) = phi6;

    return {phi6, phi10};
}

ToyBarsData generate(const ToyBarsConfig& cfg) {
    validate(cfg);
    const auto [phi6, phi10] = make_true_topics(cfg);
    const int side = cfg.grid_side;
    const int V = side * side;
    const int n = cfg.n_docs;
    const Vector eta_true =
        cfg.label_coeffs.size() == 10 ? cfg.label_coeffs : default_label_coeffs();

    // vocabulary: one pixel per term, row-major
    std::vector<std::string> terms;
    terms.reserve(V);
    char name[32];
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            std::snprintf(name, sizeof(name), "px_%02d_%02d", r, c);
            terms.emplace_back(name);
        }
    const Vocabulary vocab = Vocabulary::from_terms(std::move(terms));

    // Phase 1 (sequential draws): mixtures, tokens, and the label uniforms.
    Rng rng(cfg.seed);
    Matrix pi6(n, 6);
    std::vector<Document> docs(n);
    std::vector<double> label_u(n);
    std::vector<double> cdf(V);
    for (int d = 0; d < n; ++d) {
        const Vector mix_weights = rng.dirichlet(cfg.doc_alpha, 6);
        pi6.row(d) = mix_weights.transpose();
        const Vector word_probs = phi6.transpose() * mix_weights;
        std::partial_sum(word_probs.data(), word_probs.data() + V, cdf.begin());
        std::map<int, long> counts;
        for (int t = 0; t < cfg.tokens_per_doc; ++t) ++counts[rng.categorical(cdf)];
        docs[d].counts.assign(counts.begin(), counts.end());
        docs[d].token_total = cfg.tokens_per_doc;
        label_u[d] = rng.uniform01();
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    // Phase 2 (draw-free): lift each true bar mixture into the 10 topics and
    // set labels. Mass shared by a designated bar pair is credited to that
    // pair's combination topic, so pure pair mixtures map to a combination
    // and pure single bars map to a single-bar topic.
    Matrix pi10(n, 10);
    const int pair_bars[4][2] = {{0, 3}, {1, 4}, {2, 5}, {0, 4}};  // (h, v) rows of phi6
    for (int d = 0; d < n; ++d) {
        Vector remaining = pi6.row(d).transpose();
        Vector lifted = Vector::Zero(10);
        for (int i = 0; i < 4; ++i) {
            const double shared = std::min(remaining[pair_bars[i][0]], remaining[pair_bars[i][1]]);
            lifted[i] = shared;
            remaining[pair_bars[i][0]] -= shared;
            remaining[pair_bars[i][1]] -= shared;
        }
        lifted.tail(6) = remaining;
        lifted /= lifted.sum();
        pi10.row(d) = lifted.transpose();
        const double p = sigmoid(eta_true.dot(lifted));
        docs[d].label = cfg.label_noise ? (label_u[d] < p ? 1 : 0) : (p >= 0.5 ? 1 : 0);
    }

    const int n_test = std::max(1, n / 10);
    const int n_train = n - n_test;

    ToyBarsData data;
    data.train.vocabulary = vocab;
    data.test.vocabulary = vocab;
    data.truth.phi6 = phi6;
    data.truth.phi10 = phi10;
    data.truth.eta_true = eta_true;
    data.truth.pi6.resize(n, 6);
    data.truth.pi10.resize(n, 10);
    for (int i = 0; i < n; ++i) {
        const int d = order[i];
        if (i < n_train)
            data.train.documents.push_back(docs[d]);
        else
            data.test.documents.push_back(docs[d]);
        data.truth.pi6.row(i) = pi6.row(d);
        data.truth.pi10.row(i) = pi10.row(d);
    }
    return data;
}

void write_truth(const ToyBarsData& data, const ToyBarsConfig& cfg, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create directory " + dir + ": " + ec.message());
    write_matrix_csv(data.truth.phi6, dir + "/phi6.csv");
    write_matrix_csv(data.truth.phi10, dir + "/phi10.csv");
    write_matrix_csv(data.truth.eta_true.transpose(), dir + "/eta_true.csv");

    std::ofstream f(dir + "/config.txt");
    if (!f) throw io_error("cannot write " + dir + "/config.txt");
    f << "grid_side=" << cfg.grid_side << '\n'
      << "n_docs=" << cfg.n_docs << '\n'
      << "tokens_per_doc=" << cfg.tokens_per_doc << '\n'
      << "doc_alpha=" << cfg.doc_alpha << '\n'
      << "label_noise=" << (cfg.label_noise ? 1 : 0) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "n_train=" << data.train.n_docs() << '\n'
      << "n_test=" << data.test.n_docs() << '\n';
    if (!f) throw io_error("write failed: " + dir + "/config.txt");
}

}  // namespace slda
