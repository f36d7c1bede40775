#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "slda/embed_approx.hpp"
#include "slda/numeric.hpp"
#include "slda/rng.hpp"
#include "test_util.hpp"

using namespace slda;

namespace {

RecognitionParams random_recog(Rng& rng, int H, int V, int K, double scale = 0.5) {
    RecognitionParams lam;
    lam.hidden.resize(H, V);
    lam.output.resize(H, K);
    for (int h = 0; h < H; ++h) {
        for (int v = 0; v < V; ++v) lam.hidden(h, v) = rng.uniform(-scale, scale);
        for (int k = 0; k < K; ++k) lam.output(h, k) = rng.uniform(-scale, scale);
    }
    return lam;
}

}  // namespace

TEST_CASE("recog_forward: zero output weights give the uniform distribution") {
    Rng rng(20);
    const int H = 3, V = 5, K = 4;
    RecognitionParams lam = random_recog(rng, H, V, K);
    lam.output.setZero();
    const Matrix phi = test::random_phi(rng, K, V);
    const Document doc = test::random_doc(rng, V);
    const Vector pi = recog_forward(doc, phi, lam);
    CHECK((pi.array() - 1.0 / K).abs().maxCoeff() < 1e-15);
}

TEST_CASE("recog_forward: constant score shifts cancel when the sigmoids saturate") {
    Rng rng(21);
    const int H = 2, V = 4, K = 3;
    RecognitionParams lam = random_recog(rng, H, V, K);
    lam.hidden.setConstant(1e4);  // forces sigmoid(a_hk) == 1 for any document
    const Matrix phi = test::random_phi(rng, K, V);
    const Document doc = test::random_doc(rng, V);
    const Vector base = recog_forward(doc, phi, lam);
    lam.output.array() += 3.7;  // adds the same constant to every score
    const Vector shifted = recog_forward(doc, phi, lam);
    CHECK((base - shifted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("recog_forward: H=1 K=2 V=2 scalar arithmetic oracle") {
    RecognitionParams lam;
    lam.hidden.resize(1, 2);
    lam.hidden << 0.3, -0.7;
    lam.output.resize(1, 2);
    lam.output << 1.1, -0.4;
    Matrix phi(2, 2);
    phi << 0.8, 0.2,
           0.3, 0.7;
    const Document doc = test::make_doc({{0, 2}, {1, 3}}, std::nullopt);

    // independent scalar evaluation
    const double a0 = 0.3 * 2 * 0.8 + (-0.7) * 3 * 0.2;  // topic 0
    const double a1 = 0.3 * 2 * 0.3 + (-0.7) * 3 * 0.7;  // topic 1
    const double s0 = 1.1 * (1.0 / (1.0 + std::exp(-a0)));
    const double s1 = -0.4 * (1.0 / (1.0 + std::exp(-a1)));
    const double z0 = std::exp(s0) / (std::exp(s0) + std::exp(s1));

    const Vector pi = recog_forward(doc, phi, lam);
    CHECK(pi[0] == doctest::Approx(z0).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(1.0 - z0).epsilon(1e-12));
}

TEST_CASE("recog_forward saturates gracefully at extreme weights and counts") {
    Rng rng(22);
    const int H = 4, V = 6, K = 3;
    RecognitionParams lam = random_recog(rng, H, V, K, 1e3);
    const Matrix phi = test::random_phi(rng, K, V);
    const Document doc = test::make_doc({{0, 1000000}, {3, 999999}}, std::nullopt);
    const Vector pi = recog_forward(doc, phi, lam);
    REQUIRE(pi.allFinite());
    CHECK(pi.minCoeff() >= 0.0);
    CHECK(std::abs(pi.sum() - 1.0) < 1e-9);
}

TEST_CASE("recog_forward_grads: zero upstream gives zero gradients") {
    Rng rng(23);
    const int H = 3, V = 4, K = 2;
    const RecognitionParams lam = random_recog(rng, H, V, K);
    const Matrix phi = test::random_phi(rng, K, V);
    const Document doc = test::random_doc(rng, V);
    const RecogGrads g = recog_forward_grads(doc, phi, lam, Vector::Zero(K));
    CHECK(g.d_hidden.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_output.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_phi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("recog_forward_grads: zero output weights annihilate the phi path") {
    Rng rng(24);
    const int H = 3, V = 4, K = 2;
    RecognitionParams lam = random_recog(rng, H, V, K);
    lam.output.setZero();
    const Matrix phi = test::random_phi(rng, K, V);
    const Document doc = test::random_doc(rng, V);
    Vector upstream(K);
    upstream << 0.4, -1.2;
    const RecogGrads g = recog_forward_grads(doc, phi, lam, upstream);
    CHECK(g.d_phi.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_hidden.cwiseAbs().maxCoeff() == 0.0);  // sigmoid path also passes through output
    CHECK(g.d_output.cwiseAbs().maxCoeff() > 0.0);   // but the output layer still learns
}

TEST_CASE("recog_forward_grads matches finite differences in every parameter") {
    Rng rng(25);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const int H = 1 + static_cast<int>(rng.below(3));
        const int V = 3 + static_cast<int>(rng.below(3));
        const int K = 2 + static_cast<int>(rng.below(2));
        const RecognitionParams lam = random_recog(rng, H, V, K);
        const Matrix phi = test::random_phi(rng, K, V);
        const Document doc = test::random_doc(rng, V);
        Vector upstream(K);
        for (int k = 0; k < K; ++k) upstream[k] = rng.uniform(-1.0, 1.0);
        const RecogGrads g = recog_forward_grads(doc, phi, lam, upstream);

        const auto value = [&](const RecognitionParams& l, const Matrix& p) {
            return upstream.dot(recog_forward(doc, p, l));
        };
        for (int hh = 0; hh < H; ++hh) {
            for (int v = 0; v < V; ++v) {
                RecognitionParams up = lam, dn = lam;
                up.hidden(hh, v) += h;
                dn.hidden(hh, v) -= h;
                const double fd = (value(up, phi) - value(dn, phi)) / (2 * h);
                REQUIRE(test::close_rel(g.d_hidden(hh, v), fd, 1e-5, 1e-7));
            }
            for (int k = 0; k < K; ++k) {
                RecognitionParams up = lam, dn = lam;
                up.output(hh, k) += h;
                dn.output(hh, k) -= h;
                const double fd = (value(up, phi) - value(dn, phi)) / (2 * h);
                REQUIRE(test::close_rel(g.d_output(hh, k), fd, 1e-5, 1e-7));
            }
        }
        for (int k = 0; k < K; ++k) {
            for (int v = 0; v < V; ++v) {
                Matrix up = phi, dn = phi;
                up(k, v) += h;
                dn(k, v) -= h;
                const double fd = (value(lam, up) - value(lam, dn)) / (2 * h);
                REQUIRE(test::close_rel(g.d_phi(k, v), fd, 1e-5, 1e-7));
            }
        }
    }
}

TEST_CASE("kl_loss: zero iff equal, positive otherwise, matches direct sum") {
    Rng rng(26);
    const Vector p = test::random_simplex(rng, 4);
    CHECK(kl_loss(p, p) <= 1e-12);

    Vector target(2), approx(2);
    target << 1.0 - 1e-12, 1e-12;
    approx << 0.5, 0.5;
    CHECK(kl_loss(target, approx) == doctest::Approx(std::log(2.0)).epsilon(1e-4));

    for (int trial = 0; trial < 20; ++trial) {
        const Vector a = test::random_simplex(rng, 5);
        const Vector b = test::random_simplex(rng, 5);
        double direct = 0.0;
        for (int k = 0; k < 5; ++k) direct += a[k] * (std::log(a[k]) - std::log(b[k]));
        const double got = kl_loss(a, b);
        CHECK(got == doctest::Approx(direct).epsilon(1e-12));
        CHECK(got >= 0.0);
        if ((a - b).cwiseAbs().maxCoeff() > 1e-6) CHECK(got > 0.0);
    }

    Vector bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS(kl_loss(bad, approx), std::domain_error);
    CHECK_THROWS_AS(kl_loss(approx, bad), std::domain_error);
}

TEST_CASE("train_recognition: uniform targets are matched to below 1e-3") {
    Rng rng(27);
    const int K = 3, V = 9, H = 4;
    Matrix phi(K, V);
    const Vector row = rng.dirichlet(1.0, V);
    for (int k = 0; k < K; ++k) phi.row(k) = row.transpose();  // identical rows -> uniform targets

    std::vector<Document> docs;
    for (int d = 0; d < 12; ++d) docs.push_back(test::random_doc(rng, V));

    RecogOptConfig opt;
    opt.epochs = 40;
    opt.learn_rate = 0.1;
    opt.seed = 7;
    const RecognitionParams init = init_recognition(H, V, K, 3);
    const RecogTrainResult res = train_recognition(docs, phi, 1.01, init, converge_config(), opt);
    CHECK(res.final_mean_kl <= 1e-3);
    CHECK(res.final_mean_kl <= res.initial_mean_kl);
}

TEST_CASE("train_recognition: final KL never exceeds the initial KL") {
    Rng rng(28);
    const int K = 2, V = 6, H = 2;
    const Matrix phi = test::random_phi(rng, K, V);
    std::vector<Document> docs = {test::random_doc(rng, V)};
    RecogOptConfig opt;
    opt.epochs = 3;
    opt.learn_rate = 5.0;  // absurd step; best-seen selection must still hold the line
    const RecognitionParams init = init_recognition(H, V, K, 5);
    const RecogTrainResult res = train_recognition(docs, phi, 1.01, init, converge_config(), opt);
    CHECK(res.final_mean_kl <= res.initial_mean_kl);
}

TEST_CASE("train_recognition rejects an empty sample") {
    Rng rng(29);
    const Matrix phi = test::random_phi(rng, 2, 4);
    const RecognitionParams init = init_recognition(2, 4, 2, 0);
    CHECK_THROWS_AS(
        train_recognition({}, phi, 1.01, init, converge_config(), RecogOptConfig{}),
        std::invalid_argument);
}

TEST_CASE("init_recognition: uniform start and determinism") {
    const RecognitionParams a = init_recognition(3, 5, 4, 11);
    const RecognitionParams b = init_recognition(3, 5, 4, 11);
    CHECK(a.hidden == b.hidden);
    CHECK(a.output.cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.hidden.cwiseAbs().maxCoeff() <= 0.1);
}
