// Command-line front end: synthetic data generation, training, evaluation,
// the bag-of-words baseline, and topic image export.
//
// Exit codes: 0 success, 1 I/O failure, 2 bad arguments, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "slda/corpus.hpp"
#include "slda/eval.hpp"
#include "slda/snapshot.hpp"
#include "slda/topic_export.hpp"
#include "slda/toybars.hpp"
#include "slda/train.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sibling_vocab(const std::string& corpus_path) {
    return (fs::path(corpus_path).parent_path() / "vocab.txt").string();
}

std::string default_task(const std::string& corpus_path) {
    return fs::path(corpus_path).stem().string();
}

slda::Corpus load(const std::string& corpus_path, const std::string& vocab_path) {
    return slda::load_corpus(corpus_path,
                             vocab_path.empty() ? sibling_vocab(corpus_path) : vocab_path);
}

struct ReportFields {
    std::string task;
    std::string regime;
    double w_x = std::numeric_limits<double>::quiet_NaN();
    double w_y = std::numeric_limits<double>::quiet_NaN();
    std::optional<int> K;
    std::optional<double> auc;
    double error_rate = 0.0;
    int n_test = 0;
};

void write_report(const ReportFields& r, const std::string& path, const std::string& json_path) {
    char buf[64];
    std::ofstream f(path);
    if (!f) throw slda::io_error("cannot write report: " + path);
    f << "task=" << r.task << '\n';
    f << "regime=" << r.regime << '\n';
    std::snprintf(buf, sizeof(buf), "%g", r.w_x);
    f << "w_x=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%g", r.w_y);
    f << "w_y=" << buf << '\n';
    if (r.K) f << "K=" << *r.K << '\n';
    if (r.auc) {
        std::snprintf(buf, sizeof(buf), "%.6f", *r.auc);
        f << "auc=" << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.6f", r.error_rate);
    f << "error_rate=" << buf << '\n';
    f << "n_test=" << r.n_test << '\n';
    if (!f) throw slda::io_error("write failed: " + path);

    if (!json_path.empty()) {
        json j;
        j["task"] = r.task;
        j["regime"] = r.regime;
        j["w_x"] = std::isnan(r.w_x) ? json(nullptr) : json(r.w_x);
        j["w_y"] = std::isnan(r.w_y) ? json(nullptr) : json(r.w_y);
        j["K"] = r.K ? json(*r.K) : json(nullptr);
        j["auc"] = r.auc ? json(*r.auc) : json(nullptr);
        j["error_rate"] = r.error_rate;
        j["n_test"] = r.n_test;
        std::ofstream jf(json_path);
        if (!jf) throw slda::io_error("cannot write report: " + json_path);
        jf << j.dump(2) << '\n';
        if (!jf) throw slda::io_error("write failed: " + json_path);
    }
}

// --model accepts either the output directory of `slda train` or a model file.
std::string resolve_model_file(const std::string& model_arg) {
    if (fs::is_directory(model_arg)) return (fs::path(model_arg) / "model.txt").string();
    return model_arg;
}

std::optional<slda::RunMeta> meta_for_model(const std::string& model_arg) {
    const fs::path file = resolve_model_file(model_arg);
    return slda::load_meta((file.parent_path() / "meta.txt").string());
}

int run_app(int argc, char** argv) {
    CLI::App app{"penalized supervised topic models trained through simplex embeddings"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; command-line flags take precedence");
    const int hw_threads = omp_get_max_threads();

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "write a synthetic toy-bars corpus");
    struct {
        std::string out;
        slda::ToyBarsConfig cfg;
    } g;
    gen->add_option("--out", g.out, "output directory")->required();
    gen->add_option("--seed", g.cfg.seed, "random seed");
    gen->add_option("--n-docs", g.cfg.n_docs, "number of documents")->check(CLI::PositiveNumber);
    gen->add_option("--tokens", g.cfg.tokens_per_doc, "tokens per document")
        ->check(CLI::PositiveNumber);
    gen->add_option("--grid", g.cfg.grid_side, "pixel grid side (V = side^2)");
    gen->add_option("--doc-alpha", g.cfg.doc_alpha, "Dirichlet concentration for bar mixtures");
    gen->add_flag("--label-noise,!--no-label-noise", g.cfg.label_noise,
                  "draw labels stochastically (default) or threshold at 0.5");
    g.cfg.threads = hw_threads;
    gen->add_option("--threads", g.cfg.threads, "worker threads")->envname("SLDA_THREADS");
    gen->callback([&] {
        std::error_code ec;
        fs::create_directories(g.out, ec);
        if (ec) throw slda::io_error("cannot create directory " + g.out + ": " + ec.message());
        const slda::ToyBarsData data = slda::generate(g.cfg);
        slda::write_corpus(data.train, g.out + "/train.txt", g.out + "/vocab.txt");
        slda::write_corpus(data.test, g.out + "/test.txt", g.out + "/vocab.txt");
        slda::write_truth(data, g.cfg, g.out + "/truth");
        std::printf("wrote %d train / %d test documents to %s\n", data.train.n_docs(),
                    data.test.n_docs(), g.out.c_str());
    });

    // ---- train ----
    auto* tr = app.add_subcommand("train", "fit a model to a corpus");
    struct {
        std::string corpus, vocab, out, regime = "ideal";
        slda::TrainConfig cfg;
        bool no_phi_prior = false, no_recog_phi_path = false, no_trace_timing = false;
    } t;
    tr->add_option("--corpus", t.corpus, "training corpus file")->required();
    tr->add_option("--vocab", t.vocab, "vocabulary file (default: vocab.txt beside the corpus)");
    tr->add_option("--out", t.out, "output directory")->required();
    tr->add_option("--K", t.cfg.K, "number of topics")->check(CLI::PositiveNumber);
    tr->add_option("--regime", t.regime, "training regime")
        ->check(CLI::IsMember({"instantiated", "ideal", "approx"}));
    tr->add_option("--wx", t.cfg.weights.w_x, "weight of the word likelihood")
        ->check(CLI::NonNegativeNumber);
    tr->add_option("--wy", t.cfg.weights.w_y, "weight of the label likelihood")
        ->check(CLI::NonNegativeNumber);
    tr->add_option("--sweeps", t.cfg.sweeps, "training sweeps")->check(CLI::PositiveNumber);
    tr->add_option("--restarts", t.cfg.restarts, "independent restarts; the run with the lowest "
                                                 "final train error is kept")
        ->check(CLI::PositiveNumber);
    tr->add_option("--seed", t.cfg.seed, "random seed (restart r uses seed+r)");
    tr->add_option("--lr", t.cfg.learn_rate, "ascent step on the mean per-document gradient");
    tr->add_option("--eta-lr", t.cfg.eta_learn_rate, "separate ascent step for eta");
    tr->add_option("--init-scale", t.cfg.init_scale, "logit initialization range");
    tr->add_option("--alpha", t.cfg.alpha, "Dirichlet concentration over proportions");
    tr->add_option("--beta", t.cfg.beta, "Dirichlet concentration over topic rows");
    tr->add_option("--pi-step", t.cfg.pi_step, "proportion update step (instantiated)");
    tr->add_option("--pi-inner", t.cfg.pi_inner, "proportion updates per document per sweep");
    tr->add_option("--embed-step", t.cfg.embed_cfg.step_size, "embedding update step");
    tr->add_option("--embed-iters", t.cfg.embed_cfg.max_iters, "unrolled embedding iterations");
    tr->add_option("--batch-size", t.cfg.batch_size, "minibatch size (0 = full batch)");
    tr->add_option("--recog-hidden", t.cfg.recog_hidden, "recognition hidden width");
    tr->add_option("--recog-refresh", t.cfg.recog_refresh, "sweeps between recognition refits");
    tr->add_option("--recog-sample", t.cfg.recog_sample, "documents sampled per refit");
    tr->add_option("--recog-epochs", t.cfg.recog_epochs, "epochs per refit");
    tr->add_option("--recog-lr", t.cfg.recog_learn_rate, "recognition learning rate");
    tr->add_flag("--no-recog-phi-path", t.no_recog_phi_path,
                 "ablate the gradient path through the approximate embedding");
    tr->add_flag("--no-phi-prior", t.no_phi_prior, "drop the topic-word prior term");
    tr->add_flag("--no-trace-timing", t.no_trace_timing,
                 "write 0 in the trace seconds column (byte-reproducible traces)");
    t.cfg.threads = hw_threads;
    tr->add_option("--threads", t.cfg.threads, "worker threads (1 = bitwise reproducible)")
        ->envname("SLDA_THREADS");
    tr->callback([&] {
        t.cfg.regime = slda::regime_from_name(t.regime);
        t.cfg.include_phi_prior = !t.no_phi_prior;
        t.cfg.recog_phi_path = !t.no_recog_phi_path;
        slda::validate_weights(t.cfg.weights);
        const slda::Corpus corpus = load(t.corpus, t.vocab);
        std::error_code ec;
        fs::create_directories(t.out, ec);
        if (ec) throw slda::io_error("cannot create directory " + t.out + ": " + ec.message());

        const slda::TrainResult result = t.cfg.regime == slda::Regime::instantiated
                                             ? slda::train_instantiated(corpus, t.cfg)
                                             : slda::train_end_to_end(corpus, t.cfg);
        slda::save_model({result.params, result.recog}, t.out + "/model.txt");
        slda::write_trace(result.trace, t.out + "/trace.tsv", t.no_trace_timing);
        slda::RunMeta meta;
        meta.regime = t.regime;
        meta.w_x = t.cfg.weights.w_x;
        meta.w_y = t.cfg.weights.w_y;
        meta.seed = t.cfg.seed;
        meta.selected_restart = result.trace.selected_restart;
        slda::save_meta(meta, t.out + "/meta.txt");
        std::printf("restart %d selected; final train error %.4f; model written to %s\n",
                    result.trace.selected_restart, result.trace.final_train_error, t.out.c_str());
    });

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "heldout error rate and AUC for a trained model");
    struct {
        std::string corpus, vocab, model, report, json_path, embedder, task;
        double threshold = 0.5;
        slda::EmbedConfig embed = slda::converge_config();
        int threads = 1;
    } e;
    ev->add_option("--corpus", e.corpus, "evaluation corpus file")->required();
    ev->add_option("--vocab", e.vocab, "vocabulary file (default: vocab.txt beside the corpus)");
    ev->add_option("--model", e.model, "model file or training output directory")->required();
    ev->add_option("--report", e.report, "report output path")->required();
    ev->add_option("--json", e.json_path, "also write a JSON report here");
    ev->add_option("--embedder", e.embedder, "override the embedding used for prediction")
        ->check(CLI::IsMember({"ideal", "approx"}));
    ev->add_option("--task", e.task, "task name recorded in the report");
    ev->add_option("--threshold", e.threshold, "decision threshold for the error rate");
    ev->add_option("--embed-step", e.embed.step_size, "embedding update step");
    ev->add_option("--embed-iters", e.embed.max_iters, "embedding iteration cap");
    ev->add_option("--embed-tol", e.embed.tol, "embedding convergence tolerance");
    e.threads = hw_threads;
    ev->add_option("--threads", e.threads, "worker threads")->envname("SLDA_THREADS");
    ev->callback([&] {
        const slda::Corpus corpus = load(e.corpus, e.vocab);
        const slda::ModelSnapshot snap = slda::load_model(resolve_model_file(e.model));
        const auto meta = meta_for_model(e.model);

        std::string embedder = e.embedder;
        if (embedder.empty()) embedder = snap.recog ? "approx" : "ideal";
        slda::Embedder emb;
        if (embedder == "approx") {
            if (!snap.recog)
                throw std::invalid_argument(
                    "model has no recognition section; cannot use the approx embedder");
            emb.kind = slda::Embedder::Kind::approx;
            emb.recog = &*snap.recog;
        } else {
            emb.kind = slda::Embedder::Kind::ideal;
            emb.cfg = e.embed;
        }

        const slda::PredictionSet preds =
            slda::predict_corpus(corpus, snap.params, emb, e.threads);
        ReportFields r;
        r.task = e.task.empty() ? default_task(e.corpus) : e.task;
        r.regime = meta ? meta->regime : (snap.recog ? "approx" : "ideal");
        if (meta) {
            r.w_x = meta->w_x;
            r.w_y = meta->w_y;
        }
        r.K = snap.params.K();
        r.error_rate = slda::error_rate(preds, e.threshold);
        r.n_test = static_cast<int>(preds.size());
        try {
            r.auc = slda::auc(preds);
        } catch (const std::invalid_argument&) {
            std::fprintf(stderr, "warning: single-class test set, AUC omitted\n");
        }
        write_report(r, e.report, e.json_path);
        std::printf("error_rate=%.6f%s n=%d\n", r.error_rate,
                    r.auc ? (" auc=" + std::to_string(*r.auc)).c_str() : "", r.n_test);
    });

    // ---- baseline ----
    auto* bl = app.add_subcommand("baseline", "bag-of-words logistic regression");
    struct {
        std::string train, test, train_vocab, test_vocab, report, json_path, task;
        double l2 = 0.0, lr = 0.1;
        int epochs = 500;
        uint64_t seed = 0;
        bool log1p = false;
    } b;
    bl->add_option("--train", b.train, "training corpus file")->required();
    bl->add_option("--test", b.test, "test corpus file")->required();
    bl->add_option("--train-vocab", b.train_vocab, "vocabulary for the training corpus");
    bl->add_option("--test-vocab", b.test_vocab, "vocabulary for the test corpus");
    bl->add_option("--l2", b.l2, "L2 penalty on the weights")->check(CLI::NonNegativeNumber);
    bl->add_option("--epochs", b.epochs, "gradient descent iterations")
        ->check(CLI::PositiveNumber);
    bl->add_option("--lr", b.lr, "learning rate");
    bl->add_option("--seed", b.seed, "random seed");
    bl->add_flag("--log1p", b.log1p, "use log(1+count) features instead of raw counts");
    bl->add_option("--report", b.report, "report output path")->required();
    bl->add_option("--json", b.json_path, "also write a JSON report here");
    bl->add_option("--task", b.task, "task name recorded in the report");
    bl->callback([&] {
        const slda::Corpus train = load(b.train, b.train_vocab);
        const slda::Corpus test = load(b.test, b.test_vocab);
        if (train.n_terms() != test.n_terms())
            throw std::invalid_argument("train and test vocabularies differ in size");
        if (!train.fully_labeled() || !test.fully_labeled())
            throw std::invalid_argument("baseline requires fully labeled corpora");
        const slda::BowModel model =
            slda::bow_logreg_train(train, b.l2, b.epochs, b.lr, b.seed, b.log1p);
        const slda::PredictionSet preds = slda::bow_predict_corpus(model, test);
        ReportFields r;
        r.task = b.task.empty() ? default_task(b.test) : b.task;
        r.regime = "bow";
        r.error_rate = slda::error_rate(preds);
        r.n_test = static_cast<int>(preds.size());
        try {
            r.auc = slda::auc(preds);
        } catch (const std::invalid_argument&) {
            std::fprintf(stderr, "warning: single-class test set, AUC omitted\n");
        }
        write_report(r, b.report, b.json_path);
        std::printf("error_rate=%.6f%s n=%d\n", r.error_rate,
                    r.auc ? (" auc=" + std::to_string(*r.auc)).c_str() : "", r.n_test);
    });

    // ---- export ----
    auto* ex = app.add_subcommand("export", "write topic images (PGM) and CSV");
    struct {
        std::string model, out;
        int grid = 0;
    } x;
    ex->add_option("--model", x.model, "model file or training output directory")->required();
    ex->add_option("--out", x.out, "output directory")->required();
    ex->add_option("--grid", x.grid, "pixel grid side (default: auto-detect square)");
    ex->callback([&] {
        const slda::ModelSnapshot snap = slda::load_model(resolve_model_file(x.model));
        const slda::Matrix phi = slda::phi_from_logits(snap.params.topic_logits);
        slda::export_topics(phi, x.grid > 0 ? std::optional<int>(x.grid) : std::nullopt, x.out);
        std::printf("wrote %d topics to %s\n", snap.params.K(), x.out.c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? 0 : 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const slda::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const slda::numerical_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
