#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cvclone {

// Counter-free splittable generator. Every consumer of randomness takes a
// SeededRng explicitly; nothing in the library reads global state, so a run
// is reproducible from the top-level seed alone. Substreams derived from the
// same parent are statistically independent, which lets a Monte Carlo driver
// hand one stream to each shot and keep results identical under any thread
// schedule.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  // splitmix64
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; one spare cached per pair
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]: keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Independent child stream; derived from the construction seed, not the
  // current position, so substream(i) is stable no matter how much the
  // parent has been consumed.
  SeededRng substream(std::uint64_t index) const {
    std::uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return SeededRng(z);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cvclone
