#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "slda/numeric.hpp"
#include "slda/objective.hpp"
#include "slda/rng.hpp"
#include "test_util.hpp"

using namespace slda;

namespace {

ModelParams random_params(Rng& rng, int K, int V) {
    ModelParams params;
    params.topic_logits = test::random_logits(rng, K, V, 1.0);
    params.eta.resize(K);
    for (int k = 0; k < K; ++k) params.eta[k] = rng.uniform(-1.0, 1.0);
    params.alpha = 1.01;
    params.beta = 1.2;
    return params;
}

Matrix random_pis(Rng& rng, int D, int K) {
    Matrix pis(D, K);
    for (int d = 0; d < D; ++d) pis.row(d) = rng.dirichlet(1.0, K).transpose();
    return pis;
}

// term-by-term recomputation, independent of ObjectiveBreakdown bookkeeping
double recompute_instantiated(const Corpus& corpus, const ModelParams& params, const Matrix& pis,
                              const PenaltyWeights& w) {
    const Matrix phi = phi_from_logits(params.topic_logits);
    double label = 0.0, word = 0.0, pi_prior = 0.0;
    for (int d = 0; d < corpus.n_docs(); ++d) {
        const Vector pi = pis.row(d).transpose();
        word += log_lik_words(corpus.documents[d], pi, phi);
        pi_prior += log_dirichlet_symmetric(pi, params.alpha);
        if (corpus.documents[d].label && w.w_y != 0.0)
            label += log_lik_label(*corpus.documents[d].label, pi, params.eta);
    }
    return w.w_y * label + w.w_x * (word + pi_prior + log_prior_phi(phi, params.beta));
}

}  // namespace

TEST_CASE("log_lik_words: single token, one-hot proportions") {
    Matrix phi(2, 4);
    phi << 0.25, 0.25, 0.25, 0.25,
           0.10, 0.20, 0.30, 0.40;
    Vector pi(2);
    pi << 1.0, 0.0;
    const Document doc = test::make_doc({{2, 1}}, std::nullopt);
    CHECK(log_lik_words(doc, pi, phi) == doctest::Approx(std::log(0.25)).epsilon(1e-12));
    CHECK(log_lik_words(doc, pi, phi) == doctest::Approx(-1.3863).epsilon(1e-4));
}

TEST_CASE("log_lik_words: uniform topics collapse to N log(1/V)") {
    const int V = 5;
    const Matrix phi = Matrix::Constant(3, V, 1.0 / V);
    Rng rng(30);
    const Document doc = test::random_doc(rng, V);
    const Vector pi = test::random_simplex(rng, 3);
    CHECK(log_lik_words(doc, pi, phi) ==
          doctest::Approx(doc.token_total * std::log(1.0 / V)).epsilon(1e-12));
}

TEST_CASE("log_lik_words: dense oracle agreement and nonpositivity") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(2));
        const int V = 4 + static_cast<int>(rng.below(3));
        const Matrix phi = test::random_phi(rng, K, V);
        const Vector pi = test::random_simplex(rng, K);
        const Document doc = test::random_doc(rng, V);
        double dense = 0.0;
        for (const auto& [v, count] : doc.counts) {
            double m = 0.0;
            for (int k = 0; k < K; ++k) m += pi[k] * phi(k, v);
            dense += count * std::log(m);
        }
        const double got = log_lik_words(doc, pi, phi);
        CHECK(std::abs(got - dense) < 1e-10);
        CHECK(got <= 0.0);
    }
}

TEST_CASE("log_lik_label: usual suspects") {
    Vector pi(2), eta(2);
    pi << 0.5, 0.5;

    eta.setZero();
    CHECK(log_lik_label(1, pi, eta) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(log_lik_label(0, pi, eta) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

    // saturated but finite at s = +40
    Vector eta_big(2);
    eta_big << 40.0, 40.0;
    const double ll = log_lik_label(1, pi, eta_big);
    CHECK(ll <= 0.0);
    CHECK(ll == doctest::Approx(-4.25e-18).epsilon(0.01));
    CHECK(std::isfinite(log_lik_label(0, pi, eta_big)));

    eta << 2.0, -2.0;
    CHECK(log_lik_label(0, pi, eta) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

    CHECK_THROWS_AS(log_lik_label(2, pi, eta), std::invalid_argument);
}

TEST_CASE("log_lik_label is never positive") {
    Rng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const int K = 1 + static_cast<int>(rng.below(4));
        const Vector pi = test::random_simplex(rng, K);
        Vector eta(K);
        for (int k = 0; k < K; ++k) eta[k] = rng.uniform(-30.0, 30.0);
        CHECK(log_lik_label(static_cast<int>(rng.below(2)), pi, eta) <= 0.0);
    }
}

TEST_CASE("objective_instantiated: weight settings and the recomputation oracle") {
    Rng rng(33);
    const int D = 4, K = 3, V = 6;
    const Corpus corpus = test::random_corpus(rng, D, V, /*labeled=*/true);
    const ModelParams params = random_params(rng, K, V);
    const Matrix pis = random_pis(rng, D, K);

    SUBCASE("w_x=1, w_y=0 ignores the label term") {
        const ObjectiveBreakdown bd = objective_instantiated(corpus, params, pis, {1.0, 0.0});
        CHECK(bd.label_term == 0.0);
        CHECK(bd.total == doctest::Approx(bd.word_term + bd.pi_prior_term + bd.phi_prior_term)
                              .epsilon(1e-12));
    }
    SUBCASE("w_x=0, w_y=0 annihilates the total") {
        const ObjectiveBreakdown bd = objective_instantiated(corpus, params, pis, {0.0, 0.0});
        CHECK(bd.total == 0.0);
    }
    SUBCASE("random weights match the term-by-term oracle") {
        for (int trial = 0; trial < 10; ++trial) {
            const PenaltyWeights w{rng.uniform01() * 2, rng.uniform01() * 2};
            const ObjectiveBreakdown bd = objective_instantiated(corpus, params, pis, w);
            const double oracle = recompute_instantiated(corpus, params, pis, w);
            CHECK(bd.total == doctest::Approx(oracle).epsilon(1e-9));
            CHECK(bd.total ==
                  doctest::Approx(w.w_y * bd.label_term +
                                  w.w_x * (bd.word_term + bd.pi_prior_term + bd.phi_prior_term))
                      .epsilon(1e-12));
        }
    }
    SUBCASE("missing labels with w_y > 0 is an error") {
        Corpus unlabeled = corpus;
        unlabeled.documents[1].label.reset();
        CHECK_THROWS_AS(objective_instantiated(unlabeled, params, pis, {1.0, 1.0}),
                        std::invalid_argument);
        CHECK_NOTHROW(objective_instantiated(unlabeled, params, pis, {1.0, 0.0}));
    }
}

TEST_CASE("objective_embedded: K=1 reduction") {
    Rng rng(34);
    const int D = 3, V = 5;
    const Corpus corpus = test::random_corpus(rng, D, V, /*labeled=*/true);
    ModelParams params = random_params(rng, 1, V);
    const Matrix phi = phi_from_logits(params.topic_logits);

    Embedder emb;
    emb.cfg = converge_config();
    const ObjectiveBreakdown bd = objective_embedded(corpus, params, {1.0, 1.0}, emb);

    double word = 0.0, label = 0.0;
    const Vector one = Vector::Ones(1);
    for (const Document& doc : corpus.documents) {
        word += log_lik_words(doc, one, phi);
        label += log_lik_label(*doc.label, one, params.eta);
    }
    CHECK(bd.word_term == doctest::Approx(word).epsilon(1e-12));
    CHECK(bd.label_term == doctest::Approx(label).epsilon(1e-12));
    CHECK(bd.pi_prior_term == 0.0);
}

TEST_CASE("objective_embedded: identical topic rows reduce to the instantiated objective at "
          "uniform proportions") {
    Rng rng(35);
    const int D = 4, K = 3, V = 6;
    const Corpus corpus = test::random_corpus(rng, D, V, /*labeled=*/true);
    ModelParams params = random_params(rng, K, V);
    params.topic_logits.setZero();  // identical rows

    Embedder emb;
    emb.cfg = converge_config();
    const PenaltyWeights w{0.7, 1.3};
    const ObjectiveBreakdown embedded = objective_embedded(corpus, params, w, emb);

    const Matrix uniform_pis = Matrix::Constant(D, K, 1.0 / K);
    const ObjectiveBreakdown inst = objective_instantiated(corpus, params, uniform_pis, w);
    CHECK(embedded.total ==
          doctest::Approx(inst.total - w.w_x * inst.pi_prior_term).epsilon(1e-9));
}

TEST_CASE("objective_embedded: compositional oracle via embed_map") {
    Rng rng(36);
    const int D = 3, K = 2, V = 5;
    const Corpus corpus = test::random_corpus(rng, D, V, /*labeled=*/true);
    const ModelParams params = random_params(rng, K, V);
    const Matrix phi = phi_from_logits(params.topic_logits);
    const PenaltyWeights w{1.1, 0.6};

    Embedder emb;
    emb.cfg = converge_config();
    const ObjectiveBreakdown bd = objective_embedded(corpus, params, w, emb);

    Matrix pis(D, K);
    for (int d = 0; d < D; ++d)
        pis.row(d) = embed_map(corpus.documents[d], phi, params.alpha, emb.cfg).pi.transpose();
    const ObjectiveBreakdown inst = objective_instantiated(corpus, params, pis, w);
    CHECK(bd.word_term == doctest::Approx(inst.word_term).epsilon(1e-9));
    CHECK(bd.label_term == doctest::Approx(inst.label_term).epsilon(1e-9));
    CHECK(bd.phi_prior_term == doctest::Approx(inst.phi_prior_term).epsilon(1e-9));
}

TEST_CASE("objective_embedded_grads: w_y=0, K=1 leaves eta untouched") {
    Rng rng(37);
    const Corpus corpus = test::random_corpus(rng, 3, 4, /*labeled=*/true);
    const ModelParams params = random_params(rng, 1, 4);
    Embedder emb;
    emb.cfg = unroll_config(20);
    const EmbeddedGrads g = objective_embedded_grads(corpus, params, {1.0, 0.0}, emb);
    CHECK(g.d_eta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("objective_embedded_grads: eta gradient at eta=0 is w_y (y - 1/2) pi") {
    Rng rng(38);
    const int K = 3, V = 5;
    Corpus corpus = test::random_corpus(rng, 1, V, /*labeled=*/true);
    corpus.documents[0].label = 1;
    ModelParams params = random_params(rng, K, V);
    params.eta.setZero();
    const Matrix phi = phi_from_logits(params.topic_logits);

    Embedder emb;
    emb.cfg = unroll_config(30);
    const double w_y = 1.7;
    const EmbeddedGrads g = objective_embedded_grads(corpus, params, {1.0, w_y}, emb);
    const Vector pi = embed_map(corpus.documents[0], phi, params.alpha, emb.cfg).pi;
    CHECK((g.d_eta - w_y * 0.5 * pi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("objective_embedded_grads matches finite differences (ideal and approx)") {
    Rng rng(39);
    const double h = 1e-5;
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(2));
        const int V = 4 + static_cast<int>(rng.below(3));
        const int D = 2 + static_cast<int>(rng.below(3));
        const Corpus corpus = test::random_corpus(rng, D, V, /*labeled=*/true);
        ModelParams params = random_params(rng, K, V);

        const bool use_approx = trial % 2 == 1;
        RecognitionParams lam = init_recognition(2, V, K, trial);
        // non-trivial output weights so the phi path through the net is active
        for (int hh = 0; hh < 2; ++hh)
            for (int k = 0; k < K; ++k) lam.output(hh, k) = rng.uniform(-0.5, 0.5);

        Embedder emb;
        if (use_approx) {
            emb.kind = Embedder::Kind::approx;
            emb.recog = &lam;
        } else {
            emb.cfg = unroll_config(25, 0.01);
        }
        PenaltyWeights w{rng.uniform01() + 0.1, rng.uniform01() + 0.1};
        if (trial % 5 == 0) w.w_x = 0.0;

        const EmbeddedGrads g = objective_embedded_grads(corpus, params, w, emb);
        const auto value = [&](const ModelParams& p) {
            return objective_embedded(corpus, p, w, emb).total;
        };
        for (int k = 0; k < K; ++k) {
            for (int v = 0; v < V; ++v) {
                ModelParams up = params, dn = params;
                up.topic_logits(k, v) += h;
                dn.topic_logits(k, v) -= h;
                const double fd = (value(up) - value(dn)) / (2 * h);
                REQUIRE(test::close_rel(g.d_logits(k, v), fd, 1e-4, 1e-6));
                ++checked;
            }
            ModelParams up = params, dn = params;
            up.eta[k] += h;
            dn.eta[k] -= h;
            const double fd = (value(up) - value(dn)) / (2 * h);
            REQUIRE(test::close_rel(g.d_eta[k], fd, 1e-4, 1e-6));
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("objective scaling: multiplying both weights by c scales totals and gradients") {
    Rng rng(40);
    const Corpus corpus = test::random_corpus(rng, 3, 5, /*labeled=*/true);
    const ModelParams params = random_params(rng, 2, 5);
    Embedder emb;
    emb.cfg = unroll_config(20);
    const double c = 3.7;
    const EmbeddedGrads g1 = objective_embedded_grads(corpus, params, {0.8, 1.4}, emb);
    const EmbeddedGrads gc =
        objective_embedded_grads(corpus, params, {0.8 * c, 1.4 * c}, emb);
    CHECK(gc.breakdown.total == doctest::Approx(c * g1.breakdown.total).epsilon(1e-12));
    CHECK((gc.d_logits - c * g1.d_logits).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, gc.d_logits.cwiseAbs().maxCoeff()));
    CHECK((gc.d_eta - c * g1.d_eta).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, gc.d_eta.cwiseAbs().maxCoeff()));
}

TEST_CASE("objective_embedded_grads requires fixed_unroll for the ideal embedder") {
    Rng rng(41);
    const Corpus corpus = test::random_corpus(rng, 2, 4, /*labeled=*/true);
    const ModelParams params = random_params(rng, 2, 4);
    Embedder emb;
    emb.cfg = converge_config();
    CHECK_THROWS_AS(objective_embedded_grads(corpus, params, {1.0, 1.0}, emb),
                    std::invalid_argument);
}
