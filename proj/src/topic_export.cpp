#include "slda/topic_export.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace slda {

void export_topics(const Matrix& phi, std::optional<int> grid_side, const std::string& out_dir) {
    const int K = static_cast<int>(phi.rows());
    const int V = static_cast<int>(phi.cols());
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create directory " + out_dir + ": " + ec.message());

    {
        std::ofstream f(out_dir + "/topics.csv");
        if (!f) throw io_error("cannot write " + out_dir + "/topics.csv");
        char buf[64];
        for (int k = 0; k < K; ++k) {
            for (int v = 0; v < V; ++v) {
                std::snprintf(buf, sizeof(buf), "%.17g", phi(k, v));
                f << (v ? "," : "") << buf;
            }
            f << '\n';
        }
        if (!f) throw io_error("write failed: " + out_dir + "/topics.csv");
    }

    int side = 0;
    if (grid_side) {
        if (*grid_side < 1 || *grid_side * *grid_side != V)
            throw std::invalid_argument("export_topics: grid_side^2 != V (CSV was written)");
        side = *grid_side;
    } else {
        const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(V))));
        if (r * r == V) side = r;  // otherwise CSV only
    }
    if (side == 0) return;

    for (int k = 0; k < K; ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s/topic_%03d.pgm", out_dir.c_str(), k);
        std::ofstream f(name);
        if (!f) throw io_error(std::string("cannot write ") + name);
        const double peak = phi.row(k).maxCoeff();
        f << "P2\n# topic " << k << ", pixel = round(255*phi/max phi) per-topic normalization\n"
          << side << ' ' << side << "\n255\n";
        for (int r = 0; r < side; ++r) {
            for (int c = 0; c < side; ++c) {
                const double value = peak > 0.0 ? phi(k, r * side + c) / peak : 0.0;
                f << (c ? " " : "") << static_cast<int>(std::lround(255.0 * value));
            }
            f << '\n';
        }
        if (!f) throw io_error(std::string("write failed: ") + name);
    }
}

}  // namespace slda
