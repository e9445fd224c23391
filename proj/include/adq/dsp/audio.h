#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace adq::dsp {

/// Analysis rate every extractor assumes.
inline constexpr int kAnalysisRate = 44100;

/// Decoded mono waveform.
struct AudioClip {
  std::vector<double> samples;  ///< in [-1, 1]
  int sample_rate = kAnalysisRate;
  std::string id;

  /// Throws ParameterError if empty, non-positive rate, or non-finite samples.
  void validate() const;
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Parses a RIFF/WAVE container holding PCM16 or float32, mono or stereo.
/// Stereo is averaged to mono. Throws DecodeError naming the bad field.
AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string id = {});

/// Reads and decodes a WAV file; the clip id is the file stem.
AudioClip read_wav(const std::filesystem::path& path);

/// Mono PCM16 encoding: round(32768 s) clamped to the int16 range, the inverse of decoding.
std::vector<std::uint8_t> encode_wav_pcm16(const AudioClip& clip);

void write_wav_pcm16(const std::filesystem::path& path, const AudioClip& clip);

/// Windowed-sinc resampling to target_rate. Returns a copy when rates match.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Validates and brings a clip to the analysis rate.
AudioClip prepare_for_analysis(const AudioClip& clip);

}  // namespace adq::dsp
