#ifndef SLDA_TRAIN_HPP
#define SLDA_TRAIN_HPP

#include <optional>
#include <string>
#include <vector>

#include "slda/corpus.hpp"
#include "slda/embed_approx.hpp"
#include "slda/embed_ideal.hpp"
#include "slda/model.hpp"
#include "slda/objective.hpp"

namespace slda {

enum class Regime { instantiated, ideal, approx };

std::string regime_name(Regime regime);
Regime regime_from_name(const std::string& name);

struct TrainConfig {
    Regime regime = Regime::ideal;
    PenaltyWeights weights;
    int K = 6;
    int sweeps = 100;
    int restarts = 1;
    uint64_t seed = 0;
    double learn_rate = 0.05;      // constant step on the mean-per-document gradient
    double eta_learn_rate = 1.0;   // separate step for eta; label gradients are ~N_d
                                   // times smaller than word gradients
    double init_scale = 0.5;       // logit init range
    double alpha = 1.01;
    double beta = 1.0;
    // instantiated regime
    double pi_step = 0.05;  // multiplicative-update step for the proportion ascent
    int pi_inner = 10;      // proportion updates per document per sweep
    // end-to-end regimes
    EmbedConfig embed_cfg = unroll_config();  // unrolled embedding for gradients
    int batch_size = 0;                       // 0 = full batch
    // approx regime
    int recog_hidden = 50;
    int recog_refresh = 5;   // retrain the recognition net every R sweeps
    int recog_sample = 500;  // on min(D, M) uniformly sampled documents
    int recog_epochs = 20;
    double recog_learn_rate = 0.05;
    bool recog_phi_path = true;  // include the embedding's phi-gradient path
    // shared
    bool include_phi_prior = true;
    int threads = 1;
};

struct SweepRecord {
    int sweep = 0;
    ObjectiveBreakdown objective;
    double train_error = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
    // set on sweeps where the recognition net was refreshed
    double recog_kl_before = std::numeric_limits<double>::quiet_NaN();
    double recog_kl_after = std::numeric_limits<double>::quiet_NaN();
};

struct TrainTrace {
    std::vector<SweepRecord> sweeps;  // the selected restart's records
    int selected_restart = 0;
    double final_train_error = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    ModelParams params;
    std::optional<RecognitionParams> recog;  // approx regime only
    Matrix pis;                              // instantiated regime: final proportions, D x K
    TrainTrace trace;
};

// Coordinate ascent with explicitly instantiated proportions: per-document
// multiplicative updates on pi (word + label gradient), then one ascent step
// each on topic logits and eta. Runs cfg.restarts seeded runs and returns the
// one with the lowest final training error (ties to the lower index).
TrainResult train_instantiated(const Corpus& corpus, const TrainConfig& cfg);

// Full-batch gradient ascent through the embedding (ideal or approx regime).
// In the approx regime the recognition net is refit to the MAP embedding
// every cfg.recog_refresh sweeps. Restart selection as above.
TrainResult train_end_to_end(const Corpus& corpus, const TrainConfig& cfg);

// One line per sweep: sweep, total, label_term, word_term, train_err, seconds
// (tab-separated). zero_timing writes 0 in the seconds column so reruns are
// byte-identical.
void write_trace(const TrainTrace& trace, const std::string& path, bool zero_timing = false);

}  // namespace slda

#endif
