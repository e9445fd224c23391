#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "adq/dsp/audio.h"
#include "adq/dsp/spectral.h"

namespace adq::features {

enum class Band { full, bass, treble, high };

std::string_view band_name(Band band);

struct AccentSignal {
  std::vector<double> values;
  double frame_rate = 0.0;
  Band band = Band::full;
};

inline constexpr int kRhythmFrameLength = 2048;
inline constexpr double kRhythmOverlap = 0.875;
inline constexpr int kTempogramSize = 500;
inline constexpr double kTempoMinBpm = 40.0;
inline constexpr double kTempoMaxBpm = 250.0;
inline constexpr double kTempoSentinel = 120.0;
inline constexpr double kSecondaryTempoGap = 10.0;
inline constexpr double kBeatTightness = 100.0;
inline constexpr int kBeatProfileBins = 36;
inline constexpr int kMellinSize = 512;
inline constexpr int kTempogramRatioCount = 13;

/// Multipliers of the tempo at which the tempogram ratios are sampled.
inline constexpr std::array<double, kTempogramRatioCount> kTempogramRatios = {
    4.0, 8.0 / 3.0, 3.0, 2.0, 4.0 / 3.0, 3.0 / 2.0, 1.0,
    2.0 / 3.0, 3.0 / 4.0, 1.0 / 2.0, 1.0 / 3.0, 3.0 / 8.0, 1.0 / 4.0};

struct TempoEstimate {
  double primary = kTempoSentinel;
  double secondary = kTempoSentinel;
};

struct BeatGrid {
  std::vector<int> beat_frames;
  double tempo_used = 0.0;
};

/// Inclusive-exclusive Hz range of a band's STFT bins. Full band covers everything.
std::pair<double, double> band_range(Band band);

/// The 2048-sample, 87.5% overlap STFT shared by the rhythm features.
dsp::Spectrogram rhythm_stft(const dsp::AudioClip& clip);

/// Half-wave rectified log-magnitude flux summed over the band's bins, with a leading 0.
AccentSignal accent_signal(const dsp::AudioClip& clip, Band band);
AccentSignal accent_signal(const dsp::Spectrogram& rhythm_spec, Band band);

/// r[k] = sum_n a[n] a[n - k], k = 0..max_lag-1.
std::vector<double> autocorrelation(const std::vector<double>& a, std::size_t max_lag);

/// Weight at integer BPM b is r at lag frame_rate * 60 / b (linear interpolation),
/// divided by r[0]. Index 0 is 0.
std::vector<double> tempogram_linear(const AccentSignal& a);

/// Zero tempogram yields the 120 BPM sentinel for both.
TempoEstimate estimate_tempo(const std::vector<double>& tempogram);

/// Tempogram at kTempogramRatios * tempo, divided by the value at tempo and clipped to 1.
std::vector<double> tempogram_ratios(const std::vector<double>& tempogram, double tempo);

BeatGrid beat_track(const AccentSignal& a, double tempo, double tightness = kBeatTightness);

std::vector<double> beat_profile(const AccentSignal& a, const BeatGrid& beats,
                                 int bins = kBeatProfileBins);

/// Unit-norm magnitude of the scale transform of the biased autocorrelation.
std::vector<double> mellin(const AccentSignal& a);

/// TEMPO(2) | TG_LIN(500) | TGR B,T,H (39) | BPDIST B,T,H (108) | MELLIN(512).
std::vector<double> rhythm_vector(const dsp::AudioClip& clip);

}  // namespace adq::features
