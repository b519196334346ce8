#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace spikes {

// Counter-based random stream: every output word is a pure function of
// (master_seed, stream_id, draw index).  Trajectories in a parallel ensemble
// each own a stream with a distinct stream_id, so results do not depend on
// scheduling or worker count.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed),
        stream_id_(stream_id),
        key_(derive_key(master_seed, stream_id)) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t draw_index() const { return ctr_; }

  // Uniform on (0,1); never returns 0 or 1 exactly.
  double uniform() {
    return (static_cast<double>(word(ctr_++) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached,
  // so one pair of counter words yields two normals.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t k = mix(seed ^ 0x6A09E667F3BCC909ull);
    k = mix(k ^ (stream * 0xBF58476D1CE4E5B9ull));
    return k;
  }

  std::uint64_t word(std::uint64_t i) const {
    return mix(key_ + i * 0x9E3779B97F4A7C15ull);
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Wiener increment over a step dt: mean 0, variance dt.
inline double gaussian_increment(RngStream& stream, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("gaussian_increment: dt must be > 0");
  return stream.normal() * std::sqrt(dt);
}

// +1 with probability p_plus, -1 otherwise.
inline int bernoulli_pm1(RngStream& stream, double p_plus) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0))
    throw std::invalid_argument("bernoulli_pm1: p_plus must lie in [0,1]");
  return stream.uniform() < p_plus ? +1 : -1;
}

}  // namespace spikes
