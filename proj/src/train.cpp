#include "slda/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <omp.h>

#include "slda/numeric.hpp"
#include "slda/rng.hpp"

namespace slda {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_finite(const ModelParams& params, double total) {
    if (!params.topic_logits.allFinite() || !params.eta.allFinite() || !std::isfinite(total))
        throw numerical_error("training diverged: non-finite parameters or objective");
}

// smaller-is-better with NaN treated as worst
bool better_error(double candidate, double best) {
    if (std::isnan(candidate)) return false;
    if (std::isnan(best)) return true;
    return candidate < best;
}

double instantiated_train_error(const Corpus& corpus, const Matrix& pis, const Vector& eta) {
    long labeled = 0, wrong = 0;
    for (int d = 0; d < corpus.n_docs(); ++d) {
        const auto& label = corpus.documents[d].label;
        if (!label) continue;
        ++labeled;
        const double p = sigmoid(eta.dot(pis.row(d).transpose()));
        if ((p >= 0.5 ? 1 : 0) != *label) ++wrong;
    }
    if (labeled == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(wrong) / static_cast<double>(labeled);
}

// One multiplicative ascent step on a proportion vector with gradient g. The
// floor keeps entries strictly positive when a large step would underflow.
Vector pi_multiplicative_step(const Vector& pi, const Vector& g, double step) {
    Vector expo = step * g;
    const double shift = expo.maxCoeff();
    Vector next = pi.array() * (expo.array() - shift).exp();
    next = next.cwiseMax(1e-290);
    next /= next.sum();
    return next;
}

struct RunOutcome {
    ModelParams params;
    std::optional<RecognitionParams> recog;
    Matrix pis;
    std::vector<SweepRecord> sweeps;
    double final_train_error = std::numeric_limits<double>::quiet_NaN();
};

RunOutcome run_instantiated(const Corpus& corpus, const TrainConfig& cfg, uint64_t run_seed) {
    const int D = corpus.n_docs();
    const int K = cfg.K;
    const double w_x = cfg.weights.w_x, w_y = cfg.weights.w_y;
    const int threads = std::max(1, cfg.threads);

    RunOutcome out;
    out.params = init_params(K, corpus.n_terms(), run_seed, cfg.init_scale);
    out.params.alpha = cfg.alpha;
    out.params.beta = cfg.beta;
    out.pis = Matrix::Constant(D, K, 1.0 / K);

    for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
        const auto t0 = Clock::now();
        const Matrix phi = phi_from_logits(out.params.topic_logits);

        // (1) per-document proportion updates; slot writes, any thread count
        std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(static) num_threads(threads)
        for (int d = 0; d < D; ++d) {
            try {
                const Document& doc = corpus.documents[d];
                Vector pi = out.pis.row(d).transpose();
                for (int it = 0; it < cfg.pi_inner; ++it) {
                    Vector g = w_x * doc_objective_grad(pi, doc, phi, cfg.alpha);
                    if (doc.label && w_y != 0.0) {
                        const double p = sigmoid(out.params.eta.dot(pi));
                        g += (w_y * (*doc.label - p)) * out.params.eta;
                    }
                    pi = pi_multiplicative_step(pi, g, cfg.pi_step);
                }
                out.pis.row(d) = pi.transpose();
            } catch (...) {
#pragma omp critical
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);

        // (2) one ascent step on the topic logits at fixed proportions
        std::vector<Matrix> d_phi_partial(threads, Matrix::Zero(K, corpus.n_terms()));
#pragma omp parallel num_threads(threads)
        {
            Matrix& d_phi = d_phi_partial[omp_get_thread_num()];
#pragma omp for schedule(static)
            for (int d = 0; d < D; ++d) {
                const Vector pi = out.pis.row(d).transpose();
                for (const auto& [v, count] : corpus.documents[d].counts) {
                    const double m = pi.dot(phi.col(v));
                    d_phi.col(v) += (w_x * count / m) * pi;
                }
            }
        }
        Matrix d_phi = std::move(d_phi_partial[0]);
        for (int t = 1; t < threads; ++t) d_phi += d_phi_partial[t];
        if (cfg.include_phi_prior && w_x != 0.0)
            d_phi.array() += w_x * (cfg.beta - 1.0) / phi.array();
        out.params.topic_logits += (cfg.learn_rate / D) * chain_softmax_rows(phi, d_phi);

        // (3) one ascent step on eta
        if (w_y != 0.0) {
            Vector d_eta = Vector::Zero(K);
            for (int d = 0; d < D; ++d) {
                const auto& label = corpus.documents[d].label;
                if (!label) continue;
                const Vector pi = out.pis.row(d).transpose();
                const double p = sigmoid(out.params.eta.dot(pi));
                d_eta += (w_y * (*label - p)) * pi;
            }
            out.params.eta += (cfg.eta_learn_rate / D) * d_eta;
        }

        SweepRecord rec;
        rec.sweep = sweep;
        rec.objective = objective_instantiated(corpus, out.params, out.pis, cfg.weights,
                                               cfg.include_phi_prior);
        rec.train_error = instantiated_train_error(corpus, out.pis, out.params.eta);
        rec.seconds = elapsed_seconds(t0);
        check_finite(out.params, rec.objective.total);
        out.sweeps.push_back(rec);
    }
    out.final_train_error = out.sweeps.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : out.sweeps.back().train_error;
    return out;
}

// Uniform sample without replacement of min(m, D) document copies.
std::vector<Document> sample_documents(const Corpus& corpus, int m, Rng& rng) {
    std::vector<int> order(corpus.n_docs());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const int take = std::min<int>(m, corpus.n_docs());
    std::vector<Document> sample;
    sample.reserve(take);
    for (int i = 0; i < take; ++i) sample.push_back(corpus.documents[order[i]]);
    return sample;
}

RunOutcome run_end_to_end(const Corpus& corpus, const TrainConfig& cfg, uint64_t run_seed) {
    const int D = corpus.n_docs();
    const double lr = cfg.learn_rate;
    const bool approx = cfg.regime == Regime::approx;
    if (cfg.alpha < 1.0)
        throw std::invalid_argument("end-to-end training requires alpha >= 1");

    RunOutcome out;
    out.params = init_params(cfg.K, corpus.n_terms(), run_seed, cfg.init_scale);
    out.params.alpha = cfg.alpha;
    out.params.beta = cfg.beta;

    RecognitionParams lam;
    if (approx) lam = init_recognition(cfg.recog_hidden, corpus.n_terms(), cfg.K, run_seed);

    Embedder emb;
    if (approx) {
        emb.kind = Embedder::Kind::approx;
        emb.recog = &lam;
    } else {
        emb.kind = Embedder::Kind::ideal;
        emb.cfg = unroll_config(cfg.embed_cfg.max_iters, cfg.embed_cfg.step_size);
    }

    const auto grads_pass = [&]() {
        return objective_embedded_grads(corpus, out.params, cfg.weights, emb, cfg.threads,
                                        cfg.include_phi_prior, cfg.recog_phi_path);
    };

    // Recognition-net targets use the converged MAP embedding.
    const EmbedConfig target_cfg =
        converge_config(std::max(1000, cfg.embed_cfg.max_iters), cfg.embed_cfg.step_size);
    Rng recog_rng(run_seed + 0x517cc1b727220a95ULL);

    const bool minibatch = cfg.batch_size > 0 && cfg.batch_size < D;
    Rng batch_rng(run_seed + 0x2545f4914f6cdd1dULL);

    EmbeddedGrads g;
    bool have_g = false;
    for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
        const auto t0 = Clock::now();
        SweepRecord rec;
        rec.sweep = sweep;

        if (approx && (sweep - 1) % cfg.recog_refresh == 0) {
            const std::vector<Document> sample =
                sample_documents(corpus, cfg.recog_sample, recog_rng);
            RecogOptConfig opt;
            opt.epochs = cfg.recog_epochs;
            opt.learn_rate = cfg.recog_learn_rate;
            opt.seed = recog_rng.next_u64();
            opt.threads = cfg.threads;
            const Matrix phi = phi_from_logits(out.params.topic_logits);
            RecogTrainResult fit =
                train_recognition(sample, phi, cfg.alpha, lam, target_cfg, opt);
            lam = std::move(fit.lam);
            rec.recog_kl_before = fit.initial_mean_kl;
            rec.recog_kl_after = fit.final_mean_kl;
            have_g = false;
        }

        if (minibatch) {
            std::vector<int> order(D);
            std::iota(order.begin(), order.end(), 0);
            batch_rng.shuffle(order);
            Corpus batch;
            batch.vocabulary = corpus.vocabulary;
            for (int start = 0; start < D; start += cfg.batch_size) {
                const int stop = std::min(D, start + cfg.batch_size);
                batch.documents.clear();
                for (int i = start; i < stop; ++i)
                    batch.documents.push_back(corpus.documents[order[i]]);
                const EmbeddedGrads bg =
                    objective_embedded_grads(batch, out.params, cfg.weights, emb, cfg.threads,
                                             cfg.include_phi_prior, cfg.recog_phi_path);
                const int n = stop - start;
                out.params.topic_logits += (lr / n) * bg.d_logits;
                out.params.eta += (cfg.eta_learn_rate / n) * bg.d_eta;
            }
            g = grads_pass();
        } else {
            if (!have_g) g = grads_pass();
            out.params.topic_logits += (lr / D) * g.d_logits;
            out.params.eta += (cfg.eta_learn_rate / D) * g.d_eta;
            g = grads_pass();
            have_g = true;
        }

        rec.objective = g.breakdown;
        rec.train_error = g.train_error;
        rec.seconds = elapsed_seconds(t0);
        check_finite(out.params, rec.objective.total);
        out.sweeps.push_back(rec);
    }

    if (approx) out.recog = std::move(lam);
    out.final_train_error = out.sweeps.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : out.sweeps.back().train_error;
    return out;
}

TrainResult select_best(const Corpus& corpus, const TrainConfig& cfg,
                        RunOutcome (*runner)(const Corpus&, const TrainConfig&, uint64_t)) {
    if (cfg.sweeps < 1 || cfg.restarts < 1 || cfg.learn_rate <= 0.0)
        throw std::invalid_argument("train: sweeps and restarts must be >= 1, learn_rate > 0");
    validate_weights(cfg.weights);
    if (cfg.weights.w_y > 0.0 && !corpus.fully_labeled())
        throw std::invalid_argument("training with w_y > 0 requires a fully labeled corpus");

    TrainResult best;
    double best_error = std::numeric_limits<double>::quiet_NaN();
    for (int r = 0; r < cfg.restarts; ++r) {
        RunOutcome run = runner(corpus, cfg, cfg.seed + static_cast<uint64_t>(r));
        if (r == 0 || better_error(run.final_train_error, best_error)) {
            best_error = run.final_train_error;
            best.params = std::move(run.params);
            best.recog = std::move(run.recog);
            best.pis = std::move(run.pis);
            best.trace.sweeps = std::move(run.sweeps);
            best.trace.selected_restart = r;
            best.trace.final_train_error = run.final_train_error;
        }
    }
    return best;
}

}  // namespace

std::string regime_name(Regime regime) {
    switch (regime) {
        case Regime::instantiated: return "instantiated";
        case Regime::ideal: return "ideal";
        case Regime::approx: return "approx";
    }
    return "unknown";
}

Regime regime_from_name(const std::string& name) {
    if (name == "instantiated") return Regime::instantiated;
    if (name == "ideal") return Regime::ideal;
    if (name == "approx") return Regime::approx;
    throw std::invalid_argument("unknown regime: " + name);
}

TrainResult train_instantiated(const Corpus& corpus, const TrainConfig& cfg) {
    if (cfg.weights.w_x <= 0.0)
        throw std::invalid_argument(
            "instantiated regime requires w_x > 0: without a word term there is nothing "
            "anchoring the proportions at test time");
    if (cfg.pi_step <= 0.0 || cfg.pi_inner < 1)
        throw std::invalid_argument("train_instantiated: invalid proportion-update config");
    return select_best(corpus, cfg, &run_instantiated);
}

TrainResult train_end_to_end(const Corpus& corpus, const TrainConfig& cfg) {
    if (cfg.regime == Regime::instantiated)
        throw std::invalid_argument("train_end_to_end: regime must be ideal or approx");
    return select_best(corpus, cfg, &run_end_to_end);
}

void write_trace(const TrainTrace& trace, const std::string& path, bool zero_timing) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot write trace file: " + path);
    char buf[256];
    for (const SweepRecord& rec : trace.sweeps) {
        std::snprintf(buf, sizeof(buf), "%d\t%.10g\t%.10g\t%.10g\t%.6f\t%.6f\n", rec.sweep,
                      rec.objective.total, rec.objective.label_term, rec.objective.word_term,
                      rec.train_error, zero_timing ? 0.0 : rec.seconds);
        f << buf;
    }
    if (!f) throw io_error("write failed: " + path);
}

}  // namespace slda
