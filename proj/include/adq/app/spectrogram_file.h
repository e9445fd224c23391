#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>

namespace adq::app {

inline constexpr std::uint32_t kSpectrogramFormatVersion = 1;
inline constexpr std::size_t kSpectrogramHeaderBytes = 64;
inline constexpr const char* kSpectrogramExtension = ".adqspec";

/// Fixed 64-byte little-endian header: "ADQSPEC1", u32 version, bins, frames, hop,
/// sample rate, bins per octave, f64 f_min, power, scale, u64 reserved.
struct SpectrogramHeader {
  std::uint32_t bins = 0;
  std::uint32_t frames = 0;
  std::uint32_t hop = 0;
  std::uint32_t sample_rate = 0;
  std::uint32_t bins_per_octave = 0;
  double f_min = 0.0;
  double power = 1.0;
  double scale = 1.0;
};

struct StoredSpectrogram {
  SpectrogramHeader header;
  Eigen::MatrixXd values;  ///< bins x frames
};

/// Payload is float32, row-major bins x frames.
void write_spectrogram(const std::filesystem::path& path, const StoredSpectrogram& spec);
StoredSpectrogram read_spectrogram(const std::filesystem::path& path);

}  // namespace adq::app
