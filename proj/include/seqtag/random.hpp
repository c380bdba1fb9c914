#ifndef SEQTAG_RANDOM_HPP_
#define SEQTAG_RANDOM_HPP_

#include <cstdint>
#include <string_view>

namespace seqtag {

// 64-bit FNV-1a. Stable across platforms, used to derive per-word seeds.
inline std::uint64_t HashBytes(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64 generator. The standard distributions are implementation
// defined, so uniform draws are computed here from the raw bits to keep
// results bitwise reproducible across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double Unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi].
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Unit(); }

  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n) {
    return static_cast<std::uint64_t>(Unit() * static_cast<double>(n));
  }

 private:
  std::uint64_t state_;
};

// Fisher-Yates with Rng, so shuffles do not depend on std::shuffle's
// unspecified algorithm.
template <typename Container>
void Shuffle(Container& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.Below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace seqtag

#endif  // SEQTAG_RANDOM_HPP_
