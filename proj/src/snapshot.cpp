#include "slda/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace slda {

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_row(std::ofstream& f, const double* data, int n) {
    for (int i = 0; i < n; ++i) f << (i ? " " : "") << g17(data[i]);
    f << '\n';
}

std::vector<double> parse_row(const std::string& line, int expect, const std::string& path,
                              int lineno) {
    std::istringstream ss(line);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (errno != 0 || end != tok.c_str() + tok.size())
            throw io_error(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
        out.push_back(v);
    }
    if (static_cast<int>(out.size()) != expect)
        throw io_error(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(expect) + " values, got " + std::to_string(out.size()));
    return out;
}

std::string next_line(std::ifstream& f, const std::string& path, int& lineno) {
    std::string line;
    if (!std::getline(f, line)) throw io_error(path + ": truncated model file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// "key=<number>" fields on a header line
double header_field(const std::string& line, const std::string& key, const std::string& path) {
    const std::string want = key + "=";
    const size_t at = line.find(want);
    if (at == std::string::npos) throw io_error(path + ": missing header field " + key);
    return std::strtod(line.c_str() + at + want.size(), nullptr);
}

}  // namespace

void save_model(const ModelSnapshot& snapshot, const std::string& path) {
    const ModelParams& p = snapshot.params;
    std::ofstream f(path);
    if (!f) throw io_error("cannot write model file: " + path);
    f << "sldae2e-model v1 K=" << p.K() << " V=" << p.V() << " alpha=" << g17(p.alpha)
      << " beta=" << g17(p.beta) << '\n';
    for (int k = 0; k < p.K(); ++k) write_row(f, p.topic_logits.row(k).data(), p.V());
    write_row(f, p.eta.data(), p.K());
    if (snapshot.recog) {
        const RecognitionParams& r = *snapshot.recog;
        f << "recog v1 H=" << r.H() << '\n';
        for (int h = 0; h < r.H(); ++h) write_row(f, r.hidden.row(h).data(), p.V());
        for (int h = 0; h < r.H(); ++h) write_row(f, r.output.row(h).data(), p.K());
    }
    if (!f) throw io_error("write failed: " + path);
}

ModelSnapshot load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open model file: " + path);
    int lineno = 0;
    const std::string header = next_line(f, path, lineno);
    if (header.rfind("sldae2e-model v1 ", 0) != 0)
        throw io_error(path + ": not a sldae2e-model v1 file");
    const int K = static_cast<int>(header_field(header, "K", path));
    const int V = static_cast<int>(header_field(header, "V", path));
    if (K < 1 || V < 1) throw io_error(path + ": bad dimensions in header");

    ModelSnapshot snap;
    snap.params.alpha = header_field(header, "alpha", path);
    snap.params.beta = header_field(header, "beta", path);
    snap.params.topic_logits.resize(K, V);
    for (int k = 0; k < K; ++k) {
        const auto row = parse_row(next_line(f, path, lineno), V, path, lineno);
        for (int v = 0; v < V; ++v) snap.params.topic_logits(k, v) = row[v];
    }
    const auto eta = parse_row(next_line(f, path, lineno), K, path, lineno);
    snap.params.eta = Eigen::Map<const Vector>(eta.data(), K);

    std::string line;
    if (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("recog v1 ", 0) != 0)
            throw io_error(path + ":" + std::to_string(lineno) + ": expected recog section");
        const int H = static_cast<int>(header_field(line, "H", path));
        if (H < 1) throw io_error(path + ": bad H in recog header");
        RecognitionParams recog;
        recog.hidden.resize(H, V);
        recog.output.resize(H, K);
        for (int h = 0; h < H; ++h) {
            const auto row = parse_row(next_line(f, path, lineno), V, path, lineno);
            for (int v = 0; v < V; ++v) recog.hidden(h, v) = row[v];
        }
        for (int h = 0; h < H; ++h) {
            const auto row = parse_row(next_line(f, path, lineno), K, path, lineno);
            for (int k = 0; k < K; ++k) recog.output(h, k) = row[k];
        }
        snap.recog = std::move(recog);
    }
    return snap;
}

void save_meta(const RunMeta& meta, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot write meta file: " + path);
    f << "regime=" << meta.regime << '\n'
      << "w_x=" << g17(meta.w_x) << '\n'
      << "w_y=" << g17(meta.w_y) << '\n'
      << "seed=" << meta.seed << '\n'
      << "selected_restart=" << meta.selected_restart << '\n';
    if (!f) throw io_error("write failed: " + path);
}

std::optional<RunMeta> load_meta(const std::string& path) {
    std::ifstream f(path);
    if (!f) return std::nullopt;
    RunMeta meta;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "regime")
            meta.regime = value;
        else if (key == "w_x")
            meta.w_x = std::strtod(value.c_str(), nullptr);
        else if (key == "w_y")
            meta.w_y = std::strtod(value.c_str(), nullptr);
        else if (key == "seed")
            meta.seed = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "selected_restart")
            meta.selected_restart = std::atoi(value.c_str());
    }
    return meta;
}

}  // namespace slda
