#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace flt {

// Deterministic random source. Distribution mapping is implemented here
// instead of <random>'s distribution classes so the same seed yields the
// same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(static_cast<std::mt19937_64::result_type>(seed)) {}

  std::uint64_t next() { return gen_(); }

  // Unbiased draw in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % bound;
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  double uniform01() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    // Box-Muller; the sine mate is discarded to keep the stream stateless.
    double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Fisher-Yates shuffle of [0, n) indices.
  template <typename Int>
  void shuffle(std::vector<Int>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace flt
