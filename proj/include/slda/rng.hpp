#ifndef SLDA_RNG_HPP
#define SLDA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "slda/types.hpp"

namespace slda {

// Deterministic generator used everywhere a seed appears: xoshiro256++ with
// splitmix64 state expansion. The algorithm is fixed so that a given seed
// produces the same stream on every platform (see README).
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        // splitmix64 expansion of the seed into the 256-bit state
        uint64_t x = seed;
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) from the top 53 bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Integer in [0, n).
    uint64_t below(uint64_t n) {
        // modulo with rejection to avoid bias
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t u;
        do {
            u = next_u64();
        } while (u >= limit);
        return u % n;
    }

    // Standard normal via the Marsaglia polar method (second value cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by the boost
    // gamma(a) = gamma(a+1) * U^(1/a).
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Symmetric Dirichlet draw via normalized gamma variates.
    Vector dirichlet(double conc, int dim) {
        Vector out(dim);
        double total = 0.0;
        for (int i = 0; i < dim; ++i) {
            out[i] = gamma(conc);
            total += out[i];
        }
        out /= total;
        return out;
    }

    // Draw from the categorical distribution whose cumulative sums are `cdf`
    // (last entry must be the total mass).
    int categorical(const std::vector<double>& cdf) {
        const double u = uniform01() * cdf.back();
        int lo = 0, hi = static_cast<int>(cdf.size()) - 1;
        while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (u < cdf[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace slda

#endif
