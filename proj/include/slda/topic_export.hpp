#ifndef SLDA_TOPIC_EXPORT_HPP
#define SLDA_TOPIC_EXPORT_HPP

#include <optional>
#include <string>

#include "slda/types.hpp"

namespace slda {

// Writes the raw topic matrix as topics.csv (one topic per row) and, when the
// vocabulary maps onto a square pixel grid, one plain PGM (P2) image per topic
// with per-topic max normalization. grid_side may be omitted to auto-detect a
// perfect square; an explicit grid_side that does not match V raises
// std::invalid_argument after the CSV is written.
void export_topics(const Matrix& phi, std::optional<int> grid_side, const std::string& out_dir);

}  // namespace slda

#endif
