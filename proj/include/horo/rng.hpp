#pragma once
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace horo {

// All randomness in the library flows from one master seed through named
// substreams: stream(master, purpose, index). Substreams are derived by
// hashing, so estimator projection l, EM restart r, pair p, ... each get an
// independent deterministic stream regardless of evaluation order or thread
// placement.

uint64_t hash_tag(std::string_view tag);  // FNV-1a
uint64_t mix_seed(uint64_t a, uint64_t b);
uint64_t derive_seed(uint64_t master, std::string_view purpose, uint64_t index);

class RngStream {
 public:
  explicit RngStream(uint64_t seed) : eng_(seed) {}
  RngStream(uint64_t master, std::string_view purpose, uint64_t index)
      : eng_(derive_seed(master, purpose, index)) {}

  // in [0,1)
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // in (0,1), never exactly 0 or 1 (safe through norm_ppf)
  double uniform01_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  double normal();  // inverse-CDF draw; exact function of the stream state

  // unbiased integer in [0, n)
  uint64_t uniform_index(uint64_t n);

  Eigen::VectorXd normal_vec(int d);
  Eigen::VectorXd sphere(int d);  // uniform on the unit sphere S^{d-1}

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace horo
