#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "adq/dsp/audio.h"

namespace testing {

inline std::filesystem::path data_dir() { return ADQ_TEST_DATA; }

/// Small deterministic generator for property tests (splitmix64).
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    const double u1 = 1.0 - uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * uniform());
  }
  std::vector<double> normals(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal();
    return v;
  }

 private:
  std::uint64_t s_;
};

inline adq::dsp::AudioClip tone(const std::vector<double>& freqs, double seconds, double amplitude = 0.3,
                                int rate = adq::dsp::kAnalysisRate) {
  adq::dsp::AudioClip c;
  c.sample_rate = rate;
  c.samples.assign(static_cast<std::size_t>(seconds * rate), 0.0);
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    for (double f : freqs) c.samples[i] += amplitude * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / rate);
  }
  return c;
}

inline adq::dsp::AudioClip silence(double seconds, int rate = adq::dsp::kAnalysisRate) {
  adq::dsp::AudioClip c;
  c.sample_rate = rate;
  c.samples.assign(static_cast<std::size_t>(seconds * rate), 0.0);
  return c;
}

/// 5 ms decaying noise bursts at the given tempo, first burst at offset seconds.
inline adq::dsp::AudioClip clicks(double bpm, double seconds, double offset = 0.0, std::uint64_t seed = 1) {
  Gen g(seed);
  auto c = silence(seconds);
  const double period = 60.0 / bpm;
  const int len = static_cast<int>(0.005 * c.sample_rate);
  for (double t = offset; t < seconds; t += period) {
    const auto start = static_cast<std::size_t>(std::llround(t * c.sample_rate));
    for (int i = 0; i < len && start + static_cast<std::size_t>(i) < c.samples.size(); ++i) {
      c.samples[start + static_cast<std::size_t>(i)] = 0.8 * std::exp(-i / (0.001 * c.sample_rate)) * g.uniform(-1.0, 1.0);
    }
  }
  return c;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace testing
