// Checks that the OpenMP corpus kernels agree with the serial reference
// implementations and that fixed thread counts reproduce bitwise.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "slda/objective.hpp"
#include "slda/rng.hpp"
#include "test_util.hpp"

using namespace slda;

namespace {

struct Setup {
    Corpus corpus;
    ModelParams params;
    RecognitionParams lam;
};

Setup make_setup(uint64_t seed, int D = 40, int V = 18, int K = 3) {
    Rng rng(seed);
    Setup s;
    s.corpus = test::random_corpus(rng, D, V, /*labeled=*/true);
    s.params.topic_logits = test::random_logits(rng, K, V);
    s.params.eta.resize(K);
    for (int k = 0; k < K; ++k) s.params.eta[k] = rng.uniform(-1.0, 1.0);
    s.lam = init_recognition(4, V, K, seed);
    for (int h = 0; h < 4; ++h)
        for (int k = 0; k < K; ++k) s.lam.output(h, k) = rng.uniform(-0.4, 0.4);
    return s;
}

}  // namespace

TEST_CASE("objective_embedded: OpenMP kernel matches the serial reference") {
    const Setup s = make_setup(80);
    const PenaltyWeights w{0.9, 1.1};
    for (auto kind : {Embedder::Kind::ideal, Embedder::Kind::approx}) {
        Embedder emb;
        emb.kind = kind;
        emb.cfg = converge_config(500);
        emb.recog = &s.lam;
        const ObjectiveBreakdown serial = objective_embedded_serial(s.corpus, s.params, w, emb);
        for (int threads : {2, 4}) {
            const ObjectiveBreakdown par =
                objective_embedded_parallel(s.corpus, s.params, w, emb, threads);
            CHECK(test::close_rel(par.total, serial.total, 1e-12));
            CHECK(test::close_rel(par.word_term, serial.word_term, 1e-12));
            CHECK(test::close_rel(par.label_term, serial.label_term, 1e-12));
            CHECK(par.phi_prior_term == serial.phi_prior_term);
        }
    }
}

TEST_CASE("objective_embedded_grads: OpenMP kernel matches the serial reference") {
    const Setup s = make_setup(81);
    const PenaltyWeights w{1.0, 0.7};
    for (auto kind : {Embedder::Kind::ideal, Embedder::Kind::approx}) {
        Embedder emb;
        emb.kind = kind;
        emb.cfg = unroll_config(40);
        emb.recog = &s.lam;
        const EmbeddedGrads serial = objective_embedded_grads_serial(s.corpus, s.params, w, emb);
        for (int threads : {2, 4}) {
            const EmbeddedGrads par =
                objective_embedded_grads_parallel(s.corpus, s.params, w, emb, threads);
            const double scale = std::max(1.0, serial.d_logits.cwiseAbs().maxCoeff());
            CHECK((par.d_logits - serial.d_logits).cwiseAbs().maxCoeff() < 1e-10 * scale);
            CHECK((par.d_eta - serial.d_eta).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(test::close_rel(par.breakdown.total, serial.breakdown.total, 1e-12));
            CHECK(par.train_error == serial.train_error);
        }
    }
}

TEST_CASE("parallel kernels are bitwise deterministic at a fixed thread count") {
    const Setup s = make_setup(82);
    const PenaltyWeights w{0.5, 1.5};
    Embedder emb;
    emb.cfg = unroll_config(30);
    const EmbeddedGrads a = objective_embedded_grads_parallel(s.corpus, s.params, w, emb, 3);
    const EmbeddedGrads b = objective_embedded_grads_parallel(s.corpus, s.params, w, emb, 3);
    CHECK(a.d_logits == b.d_logits);
    CHECK(a.d_eta == b.d_eta);
    CHECK(a.breakdown.total == b.breakdown.total);
}

TEST_CASE("threads=1 dispatch takes the serial path exactly") {
    const Setup s = make_setup(83);
    const PenaltyWeights w{1.0, 1.0};
    Embedder emb;
    emb.cfg = unroll_config(30);
    const EmbeddedGrads dispatched = objective_embedded_grads(s.corpus, s.params, w, emb, 1);
    const EmbeddedGrads serial = objective_embedded_grads_serial(s.corpus, s.params, w, emb);
    CHECK(dispatched.d_logits == serial.d_logits);
    CHECK(dispatched.d_eta == serial.d_eta);
}

TEST_CASE("errors raised inside the parallel region propagate") {
    Setup s = make_setup(84);
    Embedder emb;
    emb.kind = Embedder::Kind::approx;
    emb.recog = nullptr;  // invalid
    CHECK_THROWS_AS(
        objective_embedded_parallel(s.corpus, s.params, {1.0, 1.0}, emb, 2),
        std::invalid_argument);

    // per-document failure: an empty document cannot be embedded
    Embedder ideal;
    ideal.cfg = converge_config();
    s.corpus.documents[s.corpus.n_docs() / 2].counts.clear();
    s.corpus.documents[s.corpus.n_docs() / 2].token_total = 0;
    CHECK_THROWS_AS(objective_embedded_parallel(s.corpus, s.params, {1.0, 1.0}, ideal, 2),
                    std::invalid_argument);
}
