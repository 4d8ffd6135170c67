#include "agentnet/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace agentnet {

uint64_t Rng::mix(uint64_t x) {
  // splitmix64 finalizer.
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Rng::derive(uint64_t root, std::initializer_list<uint64_t> path) {
  uint64_t s = mix(root);
  for (uint64_t t : path) s = mix(s ^ mix(t));
  return s;
}

uint64_t Rng::derive(uint64_t root, const std::vector<uint64_t>& path) {
  uint64_t s = mix(root);
  for (uint64_t t : path) s = mix(s ^ mix(t));
  return s;
}

uint64_t Rng::uniform_int(uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
  // Rejection sampling to avoid modulo bias.
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = u64();
  } while (x >= limit);
  return x % n;
}

double Rng::uniform01() {
  return static_cast<double>(u64() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::uniform_open01() {
  return (static_cast<double>(u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform_open01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  have_cached_normal_ = true;
  return r * std::cos(theta);
}

double Rng::gumbel() {
  double u = uniform_open01();
  return -std::log(-std::log(u));
}

size_t Rng::weighted_index(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) throw std::invalid_argument("weighted_index: nonpositive weight sum");
  double x = uniform01() * total;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (x < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace agentnet
