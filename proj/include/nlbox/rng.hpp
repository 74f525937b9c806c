#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace nlbox {

// Derives an independent stream seed from a campaign seed and a case index,
// so per-case results do not depend on how many cases ran before them.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with fixed bit-level value derivations. The standard library's
// distribution objects are implementation-defined, so they are avoided here:
// identical seeds must give identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform in {0, ..., n-1}
  int below(int n) {
    return static_cast<int>(static_cast<std::uint64_t>(n) * (gen_() >> 11) >> 53);
  }

  double exponential() { return -std::log1p(-uniform01()); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    while (u <= 0.0) u = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double t = 2.0 * M_PI * uniform01();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // flat Dirichlet over k coordinates
  Eigen::VectorXd dirichlet(int k) {
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v(i) = exponential();
    return v / v.sum();
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace nlbox
