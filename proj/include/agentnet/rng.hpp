#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace agentnet {

/// Deterministic random source. All distribution code is written out by hand
/// on top of mt19937_64 so that streams are bit-identical across platforms
/// and standard libraries.
///
/// Every random decision in the project derives from a single root seed via
/// counter-based substreams: `Rng::substream(root, {tag, counter, ...})`
/// mixes the path into a fresh generator with splitmix64 rounds. Two
/// substreams with different paths are independent for all practical
/// purposes; the same path always yields the same stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(mix(seed)) {}

  static uint64_t mix(uint64_t x);

  /// Derive a child seed from a root seed and a path of tags/counters.
  static uint64_t derive(uint64_t root, std::initializer_list<uint64_t> path);
  static uint64_t derive(uint64_t root, const std::vector<uint64_t>& path);

  static Rng substream(uint64_t root, std::initializer_list<uint64_t> path) {
    return Rng(derive(root, path));
  }

  uint64_t u64() { return gen_(); }

  /// Uniform on [0, n).
  uint64_t uniform_int(uint64_t n);

  /// Uniform double in [0, 1).
  double uniform01();

  /// Uniform double in the open interval (0, 1).
  double uniform_open01();

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard Gumbel sample: -ln(-ln(U)), U in (0,1).
  double gumbel();

  /// True with probability p.
  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Pick an index from non-negative weights (sum must be positive).
  size_t weighted_index(const std::vector<double>& weights);

 private:
  std::mt19937_64 gen_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// Purpose tags for substream derivation, so independent uses of the same
/// root seed never collide.
namespace rng_tag {
constexpr uint64_t kDataset = 1;
constexpr uint64_t kParamInit = 2;
constexpr uint64_t kRollout = 3;
constexpr uint64_t kEval = 4;
constexpr uint64_t kTrial = 5;
constexpr uint64_t kBatch = 6;
constexpr uint64_t kSplit = 7;
}  // namespace rng_tag

}  // namespace agentnet
