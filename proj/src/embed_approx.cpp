#include "slda/embed_approx.hpp"

#include <cmath>
#include <numeric>
#include <omp.h>

#include "slda/numeric.hpp"
#include "slda/rng.hpp"

namespace slda {

namespace {

void check_dims(const Document& doc, const Matrix& phi, const RecognitionParams& lam) {
    if (lam.hidden.cols() != phi.cols())
        throw std::invalid_argument("recognition hidden layer width does not match vocabulary");
    if (lam.output.rows() != lam.hidden.rows() || lam.output.cols() != phi.rows())
        throw std::invalid_argument("recognition output layer shape mismatch");
    if (!doc.counts.empty() && doc.counts.back().first >= phi.cols())
        throw std::invalid_argument("document term id out of range for phi");
    if (!lam.hidden.allFinite() || !lam.output.allFinite())
        throw std::invalid_argument("recognition parameters must be finite");
}

// Pre-activations a_hk accumulated over the document's sparse support.
Matrix preactivations(const Document& doc, const Matrix& phi, const RecognitionParams& lam) {
    Matrix a = Matrix::Zero(lam.hidden.rows(), phi.rows());
    for (const auto& [v, count] : doc.counts)
        a.noalias() += (static_cast<double>(count) * lam.hidden.col(v)) * phi.col(v).transpose();
    return a;
}

}  // namespace

RecognitionParams init_recognition(int H, int V, int K, uint64_t seed) {
    if (H < 1 || V < 1 || K < 1)
        throw std::invalid_argument("init_recognition: dimensions must be >= 1");
    Rng rng(seed);
    RecognitionParams lam;
    lam.hidden.resize(H, V);
    for (int h = 0; h < H; ++h)
        for (int v = 0; v < V; ++v) lam.hidden(h, v) = rng.uniform(-0.1, 0.1);
    lam.output = Matrix::Zero(H, K);
    return lam;
}

Vector recog_forward(const Document& doc, const Matrix& phi, const RecognitionParams& lam) {
    check_dims(doc, phi, lam);
    const Matrix a = preactivations(doc, phi, lam);
    const Matrix act = a.unaryExpr([](double x) { return sigmoid(x); });
    const Vector scores = (lam.output.array() * act.array()).colwise().sum();
    return softmax(scores);
}

RecogGrads recog_forward_grads(const Document& doc, const Matrix& phi,
                               const RecognitionParams& lam, const Vector& upstream) {
    check_dims(doc, phi, lam);
    if (upstream.size() != phi.rows())
        throw std::invalid_argument("recog_forward_grads: upstream dimension mismatch");
    const int K = static_cast<int>(phi.rows());

    const Matrix a = preactivations(doc, phi, lam);
    const Matrix act = a.unaryExpr([](double x) { return sigmoid(x); });
    const Vector scores = (lam.output.array() * act.array()).colwise().sum();
    const Vector pi = softmax(scores);

    // softmax backward
    const double rdot = upstream.dot(pi);
    Vector d_scores(K);
    for (int k = 0; k < K; ++k) d_scores[k] = pi[k] * (upstream[k] - rdot);

    RecogGrads grads;
    grads.d_output = act * d_scores.asDiagonal();  // d_output_hk = act_hk * d_scores_k
    // through the sigmoid
    const Matrix d_a =
        ((lam.output * d_scores.asDiagonal()).array() * act.array() * (1.0 - act.array()))
            .matrix();
    grads.d_hidden = Matrix::Zero(lam.hidden.rows(), lam.hidden.cols());
    grads.d_phi = Matrix::Zero(K, phi.cols());
    for (const auto& [v, count] : doc.counts) {
        const double x = static_cast<double>(count);
        grads.d_hidden.col(v) = x * (d_a * phi.col(v));
        grads.d_phi.col(v) = x * (d_a.transpose() * lam.hidden.col(v));
    }
    return grads;
}

double kl_loss(const Vector& target, const Vector& approx) {
    if (target.size() != approx.size()) throw std::invalid_argument("kl_loss: dimension mismatch");
    if (target.minCoeff() <= 0.0 || approx.minCoeff() <= 0.0)
        throw std::domain_error("kl_loss: inputs must be strictly positive");
    double val = 0.0;
    for (Eigen::Index k = 0; k < target.size(); ++k)
        val += target[k] * (std::log(target[k]) - std::log(approx[k]));
    return val;
}

RecogTrainResult train_recognition(std::span<const Document> docs, const Matrix& phi,
                                   double alpha, const RecognitionParams& init,
                                   const EmbedConfig& embed_cfg, const RecogOptConfig& opt) {
    if (docs.empty()) throw std::invalid_argument("train_recognition: empty document sample");
    if (opt.epochs < 0 || opt.learn_rate <= 0.0)
        throw std::invalid_argument("train_recognition: invalid optimizer config");
    const int n = static_cast<int>(docs.size());

    // Target embeddings are pure per-document computations; slot writes keep
    // the result independent of the thread count.
    std::vector<Vector> targets(n);
    const int threads = std::max(1, opt.threads);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < n; ++i) targets[i] = embed_map(docs[i], phi, alpha, embed_cfg).pi;

    const auto mean_kl = [&](const RecognitionParams& lam) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += kl_loss(targets[i], recog_forward(docs[i], phi, lam));
        return total / n;
    };

    RecogTrainResult result;
    result.lam = init;
    result.initial_mean_kl = mean_kl(init);
    result.final_mean_kl = result.initial_mean_kl;

    RecognitionParams lam = init;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(opt.seed);

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(order);
        for (const int i : order) {
            const Vector pi = recog_forward(docs[i], phi, lam);
            // d KL(t || pi) / d pi_k = -t_k / pi_k
            const Vector upstream = -targets[i].array() / pi.array();
            const RecogGrads grads = recog_forward_grads(docs[i], phi, lam, upstream);
            lam.hidden -= opt.learn_rate * grads.d_hidden;
            lam.output -= opt.learn_rate * grads.d_output;
        }
        const double kl = mean_kl(lam);
        if (kl < result.final_mean_kl) {
            result.final_mean_kl = kl;
            result.lam = lam;
        }
    }
    return result;
}

}  // namespace slda
