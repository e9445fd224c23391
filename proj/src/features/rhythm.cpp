#include "adq/features/rhythm.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include "adq/dsp/fft.h"
#include "adq/error.h"

namespace adq::features {

namespace {

constexpr double kFluxFloor = 1e-10;

// Exponential lag grid of the scale transform, from 1 ms over 16 octaves.
constexpr double kMellinMinLag = 1e-3;
constexpr int kMellinGrid = 2 * kMellinSize;
// 64 cells per octave, so doubling every lag is an exact shift of 64 cells.
constexpr int kMellinCellsPerOctave = 64;

double interpolate(const std::vector<double>& v, double x) {
  if (x < 0.0) return 0.0;
  const auto i = static_cast<std::size_t>(std::floor(x));
  if (i >= v.size()) return 0.0;
  const double frac = x - static_cast<double>(i);
  const double hi = i + 1 < v.size() ? v[i + 1] : 0.0;
  return v[i] + frac * (hi - v[i]);
}

}  // namespace

std::string_view band_name(Band band) {
  switch (band) {
    case Band::full: return "full";
    case Band::bass: return "B";
    case Band::treble: return "T";
    case Band::high: return "H";
  }
  return "?";
}

std::pair<double, double> band_range(Band band) {
  switch (band) {
    case Band::bass: return {27.5, 220.0};
    case Band::treble: return {220.0, 1760.0};
    case Band::high: return {1760.0, 14080.0};
    case Band::full: break;
  }
  return {0.0, std::numeric_limits<double>::infinity()};
}

dsp::Spectrogram rhythm_stft(const dsp::AudioClip& clip) {
  return dsp::stft(clip, kRhythmFrameLength, kRhythmOverlap);
}

AccentSignal accent_signal(const dsp::Spectrogram& spec, Band band) {
  const auto [lo, hi] = band_range(band);
  AccentSignal out;
  out.band = band;
  out.frame_rate = spec.frame_rate();
  out.values.assign(static_cast<std::size_t>(spec.frames()), 0.0);
  std::vector<Eigen::Index> bins;
  for (Eigen::Index k = 0; k < spec.bins(); ++k) {
    const double f = spec.bin_frequencies[static_cast<std::size_t>(k)];
    if (f >= lo && f < hi) bins.push_back(k);
  }
  for (Eigen::Index n = 1; n < spec.frames(); ++n) {
    double flux = 0.0;
    for (Eigen::Index k : bins) {
      const double now = std::log(std::max(spec.magnitudes(k, n), kFluxFloor));
      const double before = std::log(std::max(spec.magnitudes(k, n - 1), kFluxFloor));
      flux += std::max(0.0, now - before);
    }
    out.values[static_cast<std::size_t>(n)] = flux;
  }
  return out;
}

AccentSignal accent_signal(const dsp::AudioClip& clip, Band band) {
  return accent_signal(rhythm_stft(clip), band);
}

std::vector<double> autocorrelation(const std::vector<double>& a, std::size_t max_lag) {
  std::vector<double> r(max_lag, 0.0);
  if (a.empty() || max_lag == 0) return r;
  const std::size_t lags = std::min(max_lag, a.size());
  const std::size_t n = dsp::next_pow2(a.size() + lags);
  const dsp::RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::copy(a.begin(), a.end(), buf.begin());
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(buf, spec);
  for (auto& c : spec) c = std::norm(c);
  fft.inverse(spec, buf);
  for (std::size_t k = 0; k < lags; ++k) r[k] = buf[k] / static_cast<double>(n);
  return r;
}

std::vector<double> tempogram_linear(const AccentSignal& a) {
  std::vector<double> tg(kTempogramSize, 0.0);
  if (!(a.frame_rate > 0.0)) throw ParameterError("tempogram: frame_rate must be positive");
  const auto needed = static_cast<std::size_t>(std::ceil(a.frame_rate * 60.0)) + 2;
  const auto raw = autocorrelation(a.values, std::min(needed, a.values.size()));
  if (raw.empty() || !(raw[0] > 0.0)) return tg;
  // A 3-lag moving average keeps beat periods that straddle two integer lags at full weight.
  std::vector<double> r(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double left = k > 0 ? raw[k - 1] : raw[1 < raw.size() ? 1 : 0];
    const double right = k + 1 < raw.size() ? raw[k + 1] : 0.0;
    r[k] = (left + raw[k] + right) / 3.0;
  }
  for (int b = 1; b < kTempogramSize; ++b) {
    const double lag = a.frame_rate * 60.0 / b;
    tg[static_cast<std::size_t>(b)] = std::max(0.0, interpolate(r, lag) / raw[0]);
  }
  return tg;
}

TempoEstimate estimate_tempo(const std::vector<double>& tg) {
  if (tg.size() != kTempogramSize) throw ParameterError("estimate_tempo: tempogram must have 500 bins");
  const auto lo = static_cast<std::size_t>(kTempoMinBpm);
  const auto hi = static_cast<std::size_t>(kTempoMaxBpm);
  std::size_t best = lo;
  for (std::size_t b = lo; b <= hi; ++b) {
    if (tg[b] > tg[best]) best = b;
  }
  TempoEstimate est;
  if (!(tg[best] > 0.0)) return est;
  est.primary = est.secondary = static_cast<double>(best);
  double height = -1.0;
  for (std::size_t b = lo; b <= hi; ++b) {
    const bool peak = tg[b] > 0.0 && tg[b] > tg[b - 1] && tg[b] >= tg[b + 1];
    const double gap = std::abs(static_cast<double>(b) - static_cast<double>(best));
    if (peak && gap >= kSecondaryTempoGap && tg[b] > height) {
      height = tg[b];
      est.secondary = static_cast<double>(b);
    }
  }
  return est;
}

std::vector<double> tempogram_ratios(const std::vector<double>& tg, double tempo) {
  if (!(tempo > 0.0 && tempo <= kTempogramSize - 1)) {
    throw ParameterError("tempogram_ratios: tempo must be in (0, 499]");
  }
  std::vector<double> out(kTempogramRatioCount, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double bpm = kTempogramRatios[i] * tempo;
    if (bpm >= 1.0 && bpm <= kTempogramSize - 1) out[i] = interpolate(tg, bpm);
  }
  const double at_tempo = out[6];
  if (at_tempo > 0.0) {
    for (double& v : out) v = std::min(1.0, v / at_tempo);
  }
  return out;
}

BeatGrid beat_track(const AccentSignal& a, double tempo, double tightness) {
  if (!(tempo > 0.0)) throw ParameterError("beat_track: tempo must be positive");
  BeatGrid grid;
  grid.tempo_used = tempo;
  const auto n = static_cast<long>(a.values.size());
  if (n == 0) return grid;
  const double period = a.frame_rate * 60.0 / tempo;
  const auto peak = static_cast<int>(std::max_element(a.values.begin(), a.values.end()) -
                                     a.values.begin());
  const double peak_value = a.values[static_cast<std::size_t>(peak)];
  if (!(peak_value > 0.0) || static_cast<double>(n) <= period) {
    grid.beat_frames = {peak};
    return grid;
  }

  // Unit-variance accent. A flat accent carries no timing and leaves the penalty alone.
  const double mean = std::accumulate(a.values.begin(), a.values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : a.values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> x(a.values.size(), 0.0);
  if (sd > 1e-12 * peak_value) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = a.values[i] / sd;
  }

  const long far = std::lround(2.0 * period);
  const long near = std::max(1L, std::lround(period / 2.0));
  std::vector<double> score(static_cast<std::size_t>(n));
  std::vector<long> back(static_cast<std::size_t>(n), -1);
  for (long t = 0; t < n; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    long arg = -1;
    for (long p = std::max(0L, t - far); p <= t - near; ++p) {
      const double d = std::log(static_cast<double>(t - p) / period);
      const double s = score[static_cast<std::size_t>(p)] - tightness * d * d;
      if (s > best) {
        best = s;
        arg = p;
      }
    }
    const double local = x[static_cast<std::size_t>(t)];
    if (t <= far && (arg < 0 || best < 0.0)) {
      score[static_cast<std::size_t>(t)] = local;
    } else {
      score[static_cast<std::size_t>(t)] = local + best;
      back[static_cast<std::size_t>(t)] = arg;
    }
  }

  const long tail = std::max(0L, n - std::lround(period));
  long end = tail;
  for (long t = tail; t < n; ++t) {
    if (score[static_cast<std::size_t>(t)] > score[static_cast<std::size_t>(end)]) end = t;
  }
  for (long t = end; t >= 0; t = back[static_cast<std::size_t>(t)]) {
    grid.beat_frames.push_back(static_cast<int>(t));
  }
  std::reverse(grid.beat_frames.begin(), grid.beat_frames.end());
  return grid;
}

std::vector<double> beat_profile(const AccentSignal& a, const BeatGrid& beats, int bins) {
  if (bins < 1) throw ParameterError("beat_profile: bins must be positive");
  std::vector<double> profile(static_cast<std::size_t>(bins), 0.0);
  const auto& b = beats.beat_frames;
  if (b.size() < 2) return profile;
  std::vector<double> sum(profile.size()), count(profile.size());
  int spans = 0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const long start = b[i];
    const long len = b[i + 1] - b[i];
    if (len < 1 || b[i + 1] > static_cast<long>(a.values.size())) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0.0);
    for (long j = 0; j < len; ++j) {
      const auto bin = static_cast<std::size_t>(j * bins / len);
      sum[bin] += a.values[static_cast<std::size_t>(start + j)];
      count[bin] += 1.0;
    }
    for (std::size_t k = 0; k < profile.size(); ++k) {
      if (count[k] > 0.0) {
        profile[k] += sum[k] / count[k];
      } else {
        const auto j = static_cast<long>((static_cast<double>(k) + 0.5) * len / bins);
        profile[k] += a.values[static_cast<std::size_t>(start + std::min(j, len - 1))];
      }
    }
    ++spans;
  }
  if (spans == 0) return profile;
  const double top = *std::max_element(profile.begin(), profile.end());
  if (top > 0.0) {
    for (double& v : profile) v /= top;
  }
  return profile;
}

std::vector<double> mellin(const AccentSignal& a) {
  std::vector<double> out(kMellinSize, 0.0);
  const std::size_t n = a.values.size();
  if (n == 0 || !(a.frame_rate > 0.0)) return out;
  auto r = autocorrelation(a.values, n);
  if (!(r[0] > 0.0)) return out;
  for (double& v : r) v /= static_cast<double>(n);

  // Running integral of the piecewise-linear autocorrelation over lag in seconds.
  r.push_back(0.0);
  const std::size_t m = r.size();
  const double dt = 1.0 / a.frame_rate;
  std::vector<double> prefix(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) prefix[k] = prefix[k - 1] + 0.5 * (r[k - 1] + r[k]) * dt;
  const auto integral = [&](double t) {
    const double x = t / dt;
    const auto i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= m) return prefix[m - 1];
    const double frac = x - static_cast<double>(i);
    const double at = r[i] + frac * (r[i + 1] - r[i]);
    return prefix[i] + 0.5 * (r[i] + at) * frac * dt;
  };

  // Cells of equal width in log-lag; each carries the integral of r(t) t^(-1/2) over it.
  const double du = std::numbers::ln2 / kMellinCellsPerOctave;
  std::vector<double> g(kMellinGrid);
  double lo_t = kMellinMinLag;
  double lo_i = integral(lo_t);
  for (int i = 0; i < kMellinGrid; ++i) {
    const double hi_t = kMellinMinLag * std::exp(du * (i + 1));
    const double hi_i = integral(hi_t);
    g[static_cast<std::size_t>(i)] = (hi_i - lo_i) / std::sqrt(std::sqrt(lo_t * hi_t));
    lo_t = hi_t;
    lo_i = hi_i;
  }

  const dsp::RealFft fft(kMellinGrid);
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(g, spec);
  double norm = 0.0;
  for (int c = 0; c < kMellinSize; ++c) {
    out[static_cast<std::size_t>(c)] = std::abs(spec[static_cast<std::size_t>(c)]);
    norm += out[static_cast<std::size_t>(c)] * out[static_cast<std::size_t>(c)];
  }
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& v : out) v /= norm;
  }
  return out;
}

std::vector<double> rhythm_vector(const dsp::AudioClip& clip) {
  const dsp::Spectrogram spec = rhythm_stft(clip);
  const AccentSignal full = accent_signal(spec, Band::full);
  const auto tg = tempogram_linear(full);
  const TempoEstimate tempo = estimate_tempo(tg);
  const BeatGrid beats = beat_track(full, tempo.primary);

  std::vector<double> out;
  out.reserve(1161);
  out.push_back(tempo.primary);
  out.push_back(tempo.secondary);
  out.insert(out.end(), tg.begin(), tg.end());
  const Band bands[] = {Band::bass, Band::treble, Band::high};
  std::vector<AccentSignal> accents;
  for (Band b : bands) accents.push_back(accent_signal(spec, b));
  for (const auto& acc : accents) {
    const auto tgr = tempogram_ratios(tempogram_linear(acc), tempo.primary);
    out.insert(out.end(), tgr.begin(), tgr.end());
  }
  for (const auto& acc : accents) {
    const auto prof = beat_profile(acc, beats);
    out.insert(out.end(), prof.begin(), prof.end());
  }
  const auto m = mellin(full);
  out.insert(out.end(), m.begin(), m.end());
  return out;
}

}  // namespace adq::features
