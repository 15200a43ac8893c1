#include "horo/rng.hpp"

#include "horo/errors.hpp"
#include "horo/normal.hpp"

namespace horo {

uint64_t hash_tag(std::string_view tag) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

static uint64_t splitmix64_step(uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t s = a;
  uint64_t x = splitmix64_step(s);
  s = x ^ b;
  return splitmix64_step(s);
}

uint64_t derive_seed(uint64_t master, std::string_view purpose, uint64_t index) {
  return mix_seed(mix_seed(master, hash_tag(purpose)), index);
}

double RngStream::normal() { return norm_ppf(uniform01_open()); }

uint64_t RngStream::uniform_index(uint64_t n) {
  if (n == 0) throw InputError("uniform_index: n must be positive");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    uint64_t x = eng_();
    if (x < limit) return x % n;
  }
}

Eigen::VectorXd RngStream::normal_vec(int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd RngStream::sphere(int d) {
  if (d < 1) throw InputError("sphere: dimension must be >= 1");
  for (;;) {
    Eigen::VectorXd v = normal_vec(d);
    double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

}  // namespace horo
