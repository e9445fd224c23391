#include "adq/app/synth.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "adq/engagement/csv.h"
#include "adq/error.h"
#include "adq/models/random.h"

namespace adq::app {

namespace {

using models::Rng;

double gaussian(Rng& rng) {
  const double u1 = 1.0 - models::uniform01(rng);
  const double u2 = models::uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// RBJ band-pass biquad, constant 0 dB peak gain.
void bandpass(std::vector<double>& x, double fc, double q, double fs) {
  const double w = 2.0 * std::numbers::pi * fc / fs;
  const double alpha = std::sin(w) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w) / a0, a2 = (1.0 - alpha) / a0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (double& v : x) {
    const double y = b0 * v + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

void add_clicks(std::vector<double>& out, double bpm, double fs, double phase_seconds) {
  const double period = 60.0 / bpm;
  const auto len = static_cast<std::size_t>(0.06 * fs);
  for (double t = phase_seconds; t * fs < static_cast<double>(out.size()); t += period) {
    const auto start = static_cast<std::size_t>(std::llround(t * fs));
    for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
      const double s = static_cast<double>(i) / fs;
      out[start + i] += 0.6 * std::exp(-s / 0.004) * std::sin(2.0 * std::numbers::pi * 2000.0 * s) +
                        0.4 * std::exp(-s / 0.03) * std::sin(2.0 * std::numbers::pi * 80.0 * s);
    }
  }
}

}  // namespace

dsp::AudioClip click_track(double bpm, double seconds, int sample_rate) {
  if (!(bpm > 0.0) || !(seconds > 0.0)) throw ParameterError("click_track: bpm and seconds must be positive");
  dsp::AudioClip c;
  c.sample_rate = sample_rate;
  c.samples.assign(static_cast<std::size_t>(seconds * sample_rate), 0.0);
  add_clicks(c.samples, bpm, sample_rate, 0.0);
  double peak = 0.0;
  for (double v : c.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : c.samples) v /= peak;
  }
  return c;
}

SynthAd synth_ad(const SynthOptions& opt, int index) {
  SynthAd ad;
  ad.label = index % 2 == 0 ? 1 : 0;
  Rng rng = models::make_rng(opt.seed, 1000 + static_cast<std::uint64_t>(index));
  const bool good = ad.label == 1;
  ad.tempo_bpm = good ? models::uniform(rng, opt.good_tempo_lo, opt.good_tempo_hi)
                      : models::uniform(rng, opt.bad_tempo_lo, opt.bad_tempo_hi);
  ad.snr_db = good ? models::uniform(rng, opt.good_snr_lo, opt.good_snr_hi)
                   : models::uniform(rng, opt.bad_snr_lo, opt.bad_snr_hi);
  const double fs = opt.sample_rate;
  const auto n = static_cast<std::size_t>(opt.seconds * fs);

  std::vector<double> noise(n), speech(n);
  for (auto& v : noise) v = gaussian(rng);
  for (auto& v : speech) v = gaussian(rng);
  bandpass(speech, 1000.0, 0.35, fs);
  bandpass(speech, 1000.0, 0.35, fs);
  const double syllable_rate = models::uniform(rng, 3.0, 5.0);
  const double phase = models::uniform(rng, 0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const double env = 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * syllable_rate * static_cast<double>(i) / fs + phase));
    speech[i] *= env * env;
  }
  const double noise_rms = 0.05;
  const double speech_gain = noise_rms * std::pow(10.0, ad.snr_db / 20.0) / std::max(rms(speech), 1e-12);
  const double noise_gain = noise_rms / std::max(rms(noise), 1e-12);

  ad.clip.sample_rate = opt.sample_rate;
  char id[32];
  std::snprintf(id, sizeof id, "ad_%04d", index);
  ad.clip.id = id;
  ad.clip.samples.assign(n, 0.0);
  add_clicks(ad.clip.samples, ad.tempo_bpm, fs, models::uniform(rng, 0.0, 60.0 / ad.tempo_bpm));
  for (std::size_t i = 0; i < n; ++i) ad.clip.samples[i] += speech_gain * speech[i] + noise_gain * noise[i];
  double peak = 0.0;
  for (double v : ad.clip.samples) peak = std::max(peak, std::abs(v));
  for (double& v : ad.clip.samples) v *= 0.9 / peak;
  return ad;
}

std::vector<SynthAd> synth_corpus(const SynthOptions& opt) {
  if (opt.ads < 2) throw ParameterError("synth: need at least two ads");
  if (!(opt.seconds > 0.0)) throw ParameterError("synth: duration must be positive");
  std::vector<SynthAd> out;
  out.reserve(static_cast<std::size_t>(opt.ads));
  for (int i = 0; i < opt.ads; ++i) out.push_back(synth_ad(opt, i));
  return out;
}

void write_synth_event_log(std::ostream& out, const std::vector<SynthAd>& ads, std::uint64_t seed) {
  csv::write_row(out, {"ad_id", "user_id", "event", "dwell_seconds", "timestamp"});
  constexpr int kUsers = 400;
  for (std::size_t a = 0; a < ads.size(); ++a) {
    Rng rng = models::make_rng(seed, 5000 + a);
    const int impressions = 600 + static_cast<int>(models::uniform_index(rng, 301));
    const double p_click = ads[a].label == 1 ? 0.04 : 0.03;
    const double p_long = ads[a].label == 1 ? 0.7 : 0.25;
    double t = 0.0;
    for (int i = 0; i < impressions; ++i) {
      const std::string user = "u" + std::to_string(models::uniform_index(rng, kUsers));
      t += models::uniform(rng, 1.0, 60.0);
      csv::write_row(out, {ads[a].clip.id, user, "impression", "", csv::format_double(std::round(t))});
      if (models::uniform01(rng) < p_click) {
        const double dwell = models::uniform01(rng) < p_long ? models::uniform(rng, 6.0, 90.0)
                                                             : models::uniform(rng, 0.5, 4.5);
        csv::write_row(out, {ads[a].clip.id, user, "click", csv::format_double(std::round(dwell * 10.0) / 10.0),
                             csv::format_double(std::round(t) + 1.0)});
      }
    }
  }
}

}  // namespace adq::app
