#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "adq/dsp/audio.h"

namespace adq::app {

/// Two-class synthetic ad corpus. Each clip mixes a click track, a syllable-modulated
/// speech-band noise and broadband background noise. Good ads have a slower click tempo
/// and a higher speech-to-background ratio.
struct SynthOptions {
  int ads = 200;
  double seconds = 12.0;
  std::uint64_t seed = 0;
  int sample_rate = dsp::kAnalysisRate;
  double good_tempo_lo = 65.0, good_tempo_hi = 115.0;
  double bad_tempo_lo = 100.0, bad_tempo_hi = 165.0;
  double good_snr_lo = 0.0, good_snr_hi = 14.0;
  double bad_snr_lo = -8.0, bad_snr_hi = 6.0;
};

struct SynthAd {
  dsp::AudioClip clip;  ///< id "ad_0000", ...
  int label = 0;        ///< 1 good
  double tempo_bpm = 0.0;
  double snr_db = 0.0;
};

/// Labels alternate good, bad, good, ... so the corpus is balanced.
std::vector<SynthAd> synth_corpus(const SynthOptions& opt);

/// One ad, reproducible from (opt.seed, index).
SynthAd synth_ad(const SynthOptions& opt, int index);

/// Isochronous click track, unit-peak clicks.
dsp::AudioClip click_track(double bpm, double seconds, int sample_rate = dsp::kAnalysisRate);

/// Engagement log for the corpus: every ad gets 600 to 900 impressions; good ads are more
/// likely to receive clicks whose dwell time exceeds the long-click threshold.
void write_synth_event_log(std::ostream& out, const std::vector<SynthAd>& ads, std::uint64_t seed);

}  // namespace adq::app
