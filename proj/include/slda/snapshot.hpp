#ifndef SLDA_SNAPSHOT_HPP
#define SLDA_SNAPSHOT_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "slda/embed_approx.hpp"
#include "slda/model.hpp"

namespace slda {

struct ModelSnapshot {
    ModelParams params;
    std::optional<RecognitionParams> recog;
};

// Versioned text snapshot:
//   sldae2e-model v1 K=<K> V=<V> alpha=<a> beta=<b>
//   K lines of V logits, one line of K eta values
// and, when recognition parameters are present,
//   recog v1 H=<H>
//   H lines of V hidden weights, H lines of K output weights.
// All values use 17 significant digits so the round trip is bit-exact.
void save_model(const ModelSnapshot& snapshot, const std::string& path);
ModelSnapshot load_model(const std::string& path);

// Sidecar run description written next to the model (key=value lines).
struct RunMeta {
    std::string regime = "unknown";
    double w_x = std::numeric_limits<double>::quiet_NaN();
    double w_y = std::numeric_limits<double>::quiet_NaN();
    uint64_t seed = 0;
    int selected_restart = 0;
};

void save_meta(const RunMeta& meta, const std::string& path);
std::optional<RunMeta> load_meta(const std::string& path);

}  // namespace slda

#endif
