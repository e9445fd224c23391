#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>

#include "adq/dsp/audio.h"
#include "adq/dsp/cqt.h"
#include "adq/dsp/fft.h"
#include "adq/dsp/spectral.h"
#include "adq/error.h"
#include "helpers.h"

using namespace adq;
using namespace adq::dsp;
using testing::Gen;

namespace {

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> dct2_oracle(const std::vector<double>& x, int keep) {
  const auto m = static_cast<double>(x.size());
  std::vector<double> out(static_cast<std::size_t>(keep));
  for (int k = 0; k < keep; ++k) {
    double s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      s += x[n] * std::cos(std::numbers::pi * (2.0 * static_cast<double>(n) + 1.0) * k / (2.0 * m));
    }
    out[static_cast<std::size_t>(k)] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / m);
  }
  return out;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("decode silence fixture") {
  const auto clip = read_wav(testing::data_dir() / "silence_pcm16.wav");
  CHECK(clip.sample_rate == 44100);
  CHECK(clip.samples.size() == 44100);
  CHECK(std::all_of(clip.samples.begin(), clip.samples.end(), [](double v) { return v == 0.0; }));
  CHECK(clip.id == "silence_pcm16");
}

TEST_CASE("decode full-scale sine matches the independently written samples") {
  const auto clip = read_wav(testing::data_dir() / "sine440_pcm16.wav");
  std::ifstream ref(testing::data_dir() / "sine440_pcm16.txt");
  std::vector<double> expected;
  for (long v; ref >> v;) expected.push_back(static_cast<double>(v) / 32768.0);
  REQUIRE(expected.size() == clip.samples.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(clip.samples[i] == expected[i]);
    peak = std::max(peak, std::abs(clip.samples[i]));
  }
  CHECK(std::abs(peak - 1.0) <= 1.0 / 32768.0);
}

TEST_CASE("stereo is averaged to mono") {
  const auto clip = read_wav(testing::data_dir() / "stereo_left220_pcm16.wav");
  REQUIRE(clip.samples.size() == 44100);
  for (std::size_t i = 0; i < clip.samples.size(); i += 97) {
    const double left = std::round(16000.0 * std::sin(2.0 * std::numbers::pi * 220.0 * static_cast<double>(i) / 44100.0));
    CHECK(clip.samples[i] == doctest::Approx(left / 32768.0 / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("float32 payload decodes exactly") {
  const auto clip = read_wav(testing::data_dir() / "ramp_float32.wav");
  REQUIRE(clip.samples.size() == 1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(clip.samples[i] == static_cast<double>(static_cast<float>(-0.5 + static_cast<double>(i) / 999.0)));
  }
}

TEST_CASE("malformed containers name the bad field") {
  auto bytes = file_bytes(testing::data_dir() / "sine440_pcm16.wav");
  SUBCASE("truncated header") {
    const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 8);
    CHECK_THROWS_AS(decode_wav(head), DecodeError);
  }
  SUBCASE("unsupported codec") {
    bytes[20] = 2;
    try {
      decode_wav(bytes);
      FAIL("expected a decode error");
    } catch (const DecodeError& e) {
      CHECK(e.field().find("format") != std::string::npos);
    }
  }
  SUBCASE("empty payload") {
    auto clip = testing::silence(0.01);
    auto enc = encode_wav_pcm16(clip);
    enc.resize(44);
    enc[40] = enc[41] = enc[42] = enc[43] = 0;
    CHECK_THROWS_AS(decode_wav(enc), DecodeError);
  }
  SUBCASE("not RIFF") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_wav(bytes), DecodeError);
  }
}

TEST_CASE("pcm16 encode and decode round trip") {
  const auto clip = read_wav(testing::data_dir() / "sine440_pcm16.wav");
  const auto again = decode_wav(encode_wav_pcm16(clip));
  CHECK(again.samples == clip.samples);
  CHECK(again.sample_rate == clip.sample_rate);
}

TEST_CASE("clip validation") {
  AudioClip c;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.samples = {0.0, std::nan("")};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.samples = {0.0};
  c.sample_rate = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("resampling keeps the frequency of a tone") {
  const auto low = testing::tone({1000.0}, 0.5, 0.5, 22050);
  const auto up = resample(low, 44100);
  CHECK(up.sample_rate == 44100);
  CHECK(std::abs(static_cast<long>(up.samples.size()) - 44100 / 2) <= 1);
  double worst = 0.0;
  for (std::size_t i = 2000; i < up.samples.size() - 2000; ++i) {
    const double ref = 0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) / 44100.0);
    worst = std::max(worst, std::abs(up.samples[i] - ref));
  }
  CHECK(worst < 1e-3);
  CHECK(prepare_for_analysis(low).sample_rate == kAnalysisRate);
}

TEST_CASE("stft frame count") {
  CHECK(stft_frame_count(44100, 2048, 1024) == 42);
  const auto s = stft(testing::silence(1.0), 2048, 0.5);
  CHECK(s.frames() == 42);
  CHECK(s.bins() == 1025);
  CHECK(s.frame_hop == 1024);
  const auto short_clip = stft(testing::silence(0.01), 2048, 0.5);
  CHECK(short_clip.frames() == 1);
}

TEST_CASE("stft of a constant concentrates in bin 0") {
  AudioClip c = testing::silence(0.2);
  std::fill(c.samples.begin(), c.samples.end(), 0.25);
  const auto w = hann_window(2048);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const auto s = stft(c, 2048, 0.5);
  for (Eigen::Index f = 0; f < s.frames(); ++f) {
    CHECK(testing::relative_error(s.magnitudes(0, f), 0.25 * wsum) < 1e-9);
    CHECK(s.magnitudes.col(f).tail(s.bins() - 2).maxCoeff() < 1e-9 * 0.25 * wsum);
  }
}

TEST_CASE("stft satisfies Parseval per frame") {
  Gen g(3);
  AudioClip c = testing::silence(0.3);
  for (auto& v : c.samples) v = g.uniform(-1.0, 1.0);
  const int n = 1024;
  const auto s = stft(c, n, 0.25);
  const auto w = hann_window(n);
  for (Eigen::Index f = 0; f < s.frames(); ++f) {
    double time_energy = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = w[static_cast<std::size_t>(i)] * c.samples[static_cast<std::size_t>(f * s.frame_hop + i)];
      time_energy += x * x;
    }
    double spec_energy = s.magnitudes(0, f) * s.magnitudes(0, f) + s.magnitudes(n / 2, f) * s.magnitudes(n / 2, f);
    for (int k = 1; k < n / 2; ++k) spec_energy += 2.0 * s.magnitudes(k, f) * s.magnitudes(k, f);
    CHECK(testing::relative_error(spec_energy / n, time_energy) < 1e-6);
  }
}

TEST_CASE("bin-centred sinusoid keeps its energy near its bin") {
  const int n = 2048;
  const int bin = 40;
  const auto c = testing::tone({bin * 44100.0 / n}, 0.5);
  const auto s = stft(c, n, 0.5);
  for (Eigen::Index f = 0; f < s.frames(); ++f) {
    const double total = s.magnitudes.col(f).squaredNorm();
    const double near = s.magnitudes.col(f).segment(bin - 1, 3).squaredNorm();
    CHECK(near >= 0.9 * total);
  }
}

TEST_CASE("stft is bit-identical across calls") {
  Gen g(4);
  AudioClip c = testing::silence(0.2);
  for (auto& v : c.samples) v = g.uniform(-1.0, 1.0);
  CHECK(stft(c, 2048, 0.875).magnitudes == stft(c, 2048, 0.875).magnitudes);
}

TEST_CASE("mel filterbank shape and coverage") {
  const auto fb = mel_filterbank(1025, 44100, 128);
  CHECK(fb.rows() == 128);
  CHECK(fb.cols() == 1025);
  CHECK(fb.minCoeff() >= 0.0);
  for (Eigen::Index m = 0; m < fb.rows(); ++m) CHECK(fb.row(m).sum() > 0.0);
  for (Eigen::Index m = 0; m + 1 < fb.rows(); ++m) {
    CHECK((fb.row(m).array() * fb.row(m + 1).array()).sum() > 0.0);
  }
  const auto centers = mel_center_frequencies(44100, 128);
  CHECK(std::is_sorted(centers.begin(), centers.end()));
  CHECK(centers.front() < 1000.0);
  CHECK(mel_to_hz(hz_to_mel(3000.0)) == doctest::Approx(3000.0).epsilon(1e-12));
  CHECK(hz_to_mel(500.0) * 2.0 == doctest::Approx(hz_to_mel(1000.0)).epsilon(1e-12));
}

TEST_CASE("mel spectrogram is linear in the stft") {
  Spectrogram s;
  s.magnitudes = Eigen::MatrixXd::Zero(1025, 3);
  s.frame_hop = 1024;
  s.frame_length = 2048;
  for (int k = 0; k < 1025; ++k) s.bin_frequencies.push_back(k * 44100.0 / 2048);
  CHECK(mel_spectrogram(s, 128).bands.isZero(0.0));
  s.magnitudes(100, 1) = 2.5;
  const auto mel = mel_spectrogram(s, 128);
  const auto fb = mel_filterbank(1025, 44100, 128);
  for (Eigen::Index m = 0; m < 128; ++m) CHECK(mel.bands(m, 1) == doctest::Approx(2.5 * fb(m, 100)));
}

TEST_CASE("440 Hz peaks in the mel band around 440 Hz") {
  const auto mel = mel_spectrogram(stft(testing::tone({440.0}, 1.0), 2048, 0.5), 128);
  const Eigen::VectorXd mean = mel.bands.rowwise().mean();
  Eigen::Index best = 0;
  mean.maxCoeff(&best);
  const auto centers = mel_center_frequencies(44100, 128);
  Eigen::Index nearest = 0;
  for (std::size_t m = 0; m < centers.size(); ++m) {
    if (std::abs(centers[m] - 440.0) < std::abs(centers[static_cast<std::size_t>(nearest)] - 440.0)) {
      nearest = static_cast<Eigen::Index>(m);
    }
  }
  CHECK(std::abs(best - nearest) <= 1);
}

TEST_CASE("dct2 closed forms") {
  const std::vector<double> c(128, 0.7);
  const auto y = dct2(c, 128);
  CHECK(y[0] == doctest::Approx(0.7 * std::sqrt(128.0)).epsilon(1e-12));
  for (std::size_t k = 1; k < y.size(); ++k) CHECK(std::abs(y[k]) < 1e-12);

  const int k0 = 5;
  std::vector<double> basis(64);
  for (int n = 0; n < 64; ++n) basis[static_cast<std::size_t>(n)] = std::cos(std::numbers::pi * (2 * n + 1) * k0 / 128.0);
  const auto b = dct2(basis, 64);
  double rest = 0.0;
  for (int k = 0; k < 64; ++k) {
    if (k != k0) rest += b[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)];
  }
  CHECK(b[k0] * b[k0] > 1e9 * rest);
  CHECK_THROWS_AS(dct2(c, 129), ParameterError);
}

TEST_CASE("dct2 matches the direct sum") {
  Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = g.integer(1, 200);
    const int keep = g.integer(1, m);
    const auto x = g.normals(static_cast<std::size_t>(m));
    const auto fast = dct2(x, keep);
    const auto slow = dct2_oracle(x, keep);
    const double scale = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (int k = 0; k < keep; ++k) {
      CHECK(std::abs(fast[static_cast<std::size_t>(k)] - slow[static_cast<std::size_t>(k)]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("real fft round trip") {
  Gen g(6);
  RealFft fft(256);
  const auto x = g.normals(256);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<double> back(256);
  fft.forward(x, spec);
  fft.inverse(spec, back);
  for (std::size_t i = 0; i < 256; ++i) CHECK(back[i] / 256.0 == doctest::Approx(x[i]).epsilon(1e-12));
  CHECK(next_pow2(1000) == 1024);
  CHECK(next_pow2(1024) == 1024);
}

TEST_CASE("cqt geometry") {
  CqtParams p;
  const auto f = cqt_frequencies(p);
  REQUIRE(f.size() == 100);
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    CHECK(f[k + 1] / f[k] == doctest::Approx(std::pow(2.0, 1.0 / 12.0)).epsilon(1e-12));
  }
  CHECK(cqt_q_factor(12) == doctest::Approx(1.0 / (std::pow(2.0, 1.0 / 12.0) - 1.0)));
  CHECK(cqt_frame_count(441000, 1024) == 431);
  const auto s = cqt(testing::silence(10.0), p);
  CHECK(s.bins() == 100);
  CHECK(s.frames() == 431);
  CHECK(s.magnitudes.isZero(0.0));
  CqtParams too_high = p;
  too_high.bins = 130;
  CHECK_THROWS_AS(cqt(testing::silence(1.0), too_high), ParameterError);
}

TEST_CASE("cqt peak of a 440 Hz tone") {
  const auto s = cqt(testing::tone({440.0}, 2.0), CqtParams{});
  const Eigen::VectorXd mean = s.magnitudes.rowwise().mean();
  Eigen::Index best = 0;
  mean.maxCoeff(&best);
  CHECK(best == std::lround(12.0 * std::log2(440.0 / 32.70)));
  CHECK(best == 45);
}

TEST_CASE("log compression") {
  Spectrogram s;
  s.magnitudes = Eigen::MatrixXd(1, 3);
  s.magnitudes << 0.0, 1.0, 2.0;
  s.bin_frequencies = {1.0};
  s.frame_hop = 1;
  s.frame_length = 1;
  const auto l = log_compress(s, 2.0, 0.1);
  CHECK(l.magnitudes(0, 0) == 0.0);
  CHECK(l.magnitudes(0, 1) == doctest::Approx(0.0953101798043249).epsilon(1e-12));
  CHECK(l.magnitudes(0, 2) > l.magnitudes(0, 1));
  Gen g(7);
  for (int i = 0; i < 200; ++i) {
    const double a = g.uniform(0.0, 10.0), b = a + g.uniform(1e-6, 1.0);
    s.magnitudes << a, b, 0.0;
    const auto o = log_compress(s, g.uniform(0.5, 3.0), g.uniform(0.01, 100.0));
    CHECK(o.magnitudes(0, 0) < o.magnitudes(0, 1));
  }
  CHECK_THROWS_AS(log_compress(s, 0.0, 1.0), ParameterError);
}

}  // TEST_SUITE
