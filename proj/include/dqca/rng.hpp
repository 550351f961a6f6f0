#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dqca {

// SplitMix64. Seeded, portable and fixed across platforms so that runs with
// the same seed produce byte-identical artifacts.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t state_;
};

// Multinomial draw by per-event CDF inversion.
inline std::vector<long> multinomial(Rng& rng, const std::vector<double>& probs, long total) {
    if (total < 1) throw std::invalid_argument("multinomial: total must be >= 1");
    double sum = 0;
    for (double p : probs) {
        if (p < 0) throw std::invalid_argument("multinomial: negative probability");
        sum += p;
    }
    if (sum <= 0) throw std::invalid_argument("multinomial: zero total probability");
    std::vector<long> counts(probs.size(), 0);
    for (long e = 0; e < total; ++e) {
        double u = rng.uniform() * sum;
        std::size_t i = 0;
        for (; i + 1 < probs.size(); ++i) {
            if (u < probs[i]) break;
            u -= probs[i];
        }
        ++counts[i];
    }
    return counts;
}

}  // namespace dqca
