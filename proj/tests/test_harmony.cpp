#include <doctest.h>

#include <algorithm>
#include <complex>
#include <numbers>

#include "adq/error.h"
#include "adq/features/harmony.h"
#include "helpers.h"

using namespace adq;
using namespace adq::features;
using testing::Gen;

namespace {

constexpr int kA = 0, kC = 3, kE = 7, kG = 10;

double note(int semitones_from_a4) { return 440.0 * std::pow(2.0, semitones_from_a4 / 12.0); }

Eigen::VectorXd class_mass(const Eigen::MatrixXd& p) {
  Eigen::VectorXd m = p.rowwise().sum();
  return m / m.sum();
}

std::vector<int> top_classes(const Eigen::VectorXd& m, std::size_t k) {
  std::vector<int> idx(12);
  for (int i = 0; i < 12; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return m(a) > m(b); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Eigen::VectorXd rotate(const Eigen::VectorXd& x, int k) {
  Eigen::VectorXd r(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) r((i + k) % x.size()) = x(i);
  return r;
}

/// Rotates the major and minor halves of a 24-vector independently by the same amount.
Eigen::VectorXd rotate24(const Eigen::VectorXd& x, int k) {
  Eigen::VectorXd r(24);
  r.head(12) = rotate(x.head(12), k);
  r.tail(12) = rotate(x.tail(12), k);
  return r;
}

Eigen::VectorXd random_vector(Gen& g, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g.uniform(-1.0, 1.0);
  return v;
}

dsp::AudioClip note_sequence(const std::vector<int>& notes, double each, const std::vector<double>& gains) {
  dsp::AudioClip c = testing::silence(each * static_cast<double>(notes.size()));
  const auto per = static_cast<std::size_t>(each * c.sample_rate);
  for (std::size_t n = 0; n < notes.size(); ++n) {
    const double f = note(notes[n]);
    for (std::size_t i = 0; i < per; ++i) {
      c.samples[n * per + i] = 0.3 * gains[n] * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / c.sample_rate);
    }
  }
  return c;
}

}  // namespace

TEST_SUITE("harmony") {

TEST_CASE("template names and bank") {
  CHECK(template_name(3) == "C:maj");
  CHECK(template_name(12) == "A:min");
  const auto& bank = TemplateBank::standard();
  for (int t = 0; t < kTemplateCount; ++t) {
    CHECK(bank.chords.row(t).norm() == doctest::Approx(1.0));
    CHECK(bank.keys.row(t).norm() == doctest::Approx(1.0));
  }
  CHECK(bank.chords(kC, kC) > 0.0);
  CHECK(bank.chords(kC, kE) > 0.0);
  CHECK(bank.chords(kC, kG) > 0.0);
  CHECK(bank.chords(kC, kA) == 0.0);
}

TEST_CASE("silence gives a zero HPCP") {
  const auto p = hpcp(testing::silence(2.0));
  CHECK(p.rows() == 12);
  CHECK(p.maxCoeff() == 0.0);
  CHECK(p.minCoeff() == 0.0);
}

TEST_CASE("a 440 Hz tone lands on A") {
  const auto m = class_mass(hpcp(testing::tone({440.0}, 3.0)));
  CHECK(m(kA) >= 0.8);
}

TEST_CASE("a C major triad peaks on C, E and G") {
  const auto m = class_mass(hpcp(testing::tone({note(3 - 12), note(7 - 12), note(10 - 12)}, 3.0)));
  CHECK(top_classes(m, 3) == std::vector<int>{kC, kE, kG});
}

TEST_CASE("octave folding conserves mass") {
  Gen g(21);
  for (int trial = 0; trial < 20; ++trial) {
    dsp::Spectrogram q;
    q.magnitudes = Eigen::MatrixXd::NullaryExpr(84, g.integer(1, 30), [&] { return g.uniform(0.0, 3.0); });
    const auto p = hpcp_from_cqt(q);
    for (Eigen::Index i = 0; i < q.frames(); ++i) {
      const double a = q.magnitudes.col(i).sum();
      CHECK(std::abs(p.col(i).sum() - a) <= 1e-9 * std::max(1.0, a));
    }
  }
  dsp::Spectrogram bad;
  bad.magnitudes = Eigen::MatrixXd::Zero(13, 2);
  CHECK_THROWS_AS(hpcp_from_cqt(bad), ParameterError);
}

TEST_CASE("shift-invariant summaries ignore rotation") {
  Gen g(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = random_vector(g, 12);
    const auto base = shift_invariant_12(x);
    const Eigen::VectorXd y = random_vector(g, 24);
    const auto base24 = shift_invariant_24(y);
    Eigen::MatrixXd frames = Eigen::MatrixXd::NullaryExpr(12, 5, [&] { return g.uniform(0.0, 1.0); });
    const auto base_hp = sihpcp(frames);
    for (int k = 1; k < 12; ++k) {
      const auto r = shift_invariant_12(rotate(x, k));
      for (std::size_t b = 0; b < r.size(); ++b) CHECK(std::abs(r[b] - base[b]) <= 1e-9);
      const auto r24 = shift_invariant_24(rotate24(y, k));
      for (std::size_t b = 0; b < r24.size(); ++b) CHECK(std::abs(r24[b] - base24[b]) <= 1e-9);
      Eigen::MatrixXd rf(12, frames.cols());
      for (Eigen::Index c = 0; c < frames.cols(); ++c) rf.col(c) = rotate(frames.col(c), k);
      const auto rh = sihpcp(rf);
      for (std::size_t b = 0; b < rh.size(); ++b) CHECK(std::abs(rh[b] - base_hp[b]) <= 1e-9);
    }
  }
}

TEST_CASE("uniform HPCP against a direct transform") {
  const auto s = sihpcp(Eigen::MatrixXd::Constant(12, 4, 2.0));
  for (int b = 0; b < kShiftInvariantBins; ++b) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < 12; ++i) acc += (12.0 / 144.0) * std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * b * i / 16.0));
    CHECK(std::abs(s[static_cast<std::size_t>(b)] - std::abs(acc)) < 1e-12);
  }
  CHECK(std::max_element(s.begin(), s.end()) - s.begin() == 0);
  CHECK(s[0] == doctest::Approx(1.0));
}

TEST_CASE("shift_invariant_24 difference half vanishes for equal halves") {
  Gen g(23);
  Eigen::VectorXd x(24);
  x.head(12) = random_vector(g, 12);
  x.tail(12) = x.head(12);
  const auto s = shift_invariant_24(x);
  for (int b = 0; b < kShiftInvariantBins; ++b) CHECK(s[static_cast<std::size_t>(kShiftInvariantBins + b)] == 0.0);
  CHECK_THROWS_AS(shift_invariant_24(Eigen::VectorXd::Zero(12)), ParameterError);
}

TEST_CASE("chordogram") {
  const auto& bank = TemplateBank::standard();
  Eigen::MatrixXd frames(12, 2);
  frames.col(0) = bank.chords.row(kC).transpose();
  frames.col(1).setZero();
  const auto cg = chordogram(frames);
  REQUIRE(cg.rows() == 24);
  CHECK(cg(kC, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cg.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cg.col(0).maxCoeff() <= 1.0);
  CHECK(cg.col(0).minCoeff() >= -1.0);
}

TEST_CASE("a sustained C major triad is recognised frame by frame") {
  const auto p = hpcp(testing::tone({note(3 - 12), note(7 - 12), note(10 - 12)}, 6.0));
  const auto cg = chordogram(p);
  int voiced = 0, hits = 0;
  for (Eigen::Index n = 0; n < cg.cols(); ++n) {
    if ((cg.col(n).array() == 0.0).all()) continue;
    ++voiced;
    Eigen::Index best = 0;
    cg.col(n).maxCoeff(&best);
    hits += best == kC;
  }
  REQUIRE(voiced > 0);
  CHECK(hits >= 0.8 * voiced);
}

TEST_CASE("chord histogram and mean correlation") {
  Gen g(24);
  const Eigen::MatrixXd cg = Eigen::MatrixXd::NullaryExpr(24, 17, [&] { return g.uniform(-1.0, 1.0); });
  const auto f = chord_features(cg);
  CHECK(f.ch.sum() == doctest::Approx(1.0));
  CHECK(f.ch.minCoeff() >= 0.0);
  Eigen::VectorXd col = random_vector(g, 24);
  const auto c = chord_features(col.replicate(1, 9));
  CHECK((c.chc - col).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::Index best = 0;
  col.maxCoeff(&best);
  CHECK(c.ch(best) == 1.0);
  const auto z = chord_features(Eigen::MatrixXd::Zero(24, 3));
  CHECK(z.ch.sum() == 0.0);
}

TEST_CASE("key correlations") {
  const auto& bank = TemplateBank::standard();
  auto kc = key_correlations(bank.keys.row(kC).transpose().replicate(1, 3));
  Eigen::Index best = 0;
  kc.maxCoeff(&best);
  CHECK(best == kC);
  CHECK(kc(kC) == doctest::Approx(1.0));
  CHECK(mode_estimate(kc) == 1);
  CHECK(key_correlations(Eigen::MatrixXd::Zero(12, 2)).cwiseAbs().maxCoeff() == 0.0);

  const std::vector<int> c_major = {3, 5, 7, 8, 10, 12, 14, 15};
  kc = key_correlations(hpcp(note_sequence(c_major, 0.5, {2, 1, 1.5, 1, 1.5, 1, 1, 2})));
  kc.maxCoeff(&best);
  CHECK(best == kC);
  CHECK(mode_estimate(kc) == 1);

  const std::vector<int> a_minor = {0, 2, 3, 5, 7, 8, 11, 12};  // harmonic minor
  kc = key_correlations(hpcp(note_sequence(a_minor, 0.5, {2, 1, 1.5, 1, 1.5, 1, 1, 2})));
  CHECK(mode_estimate(kc) == 0);
  kc.maxCoeff(&best);
  CHECK(best == 12 + kA);
}

TEST_CASE("mode ties go to major") {
  CHECK(mode_estimate(Eigen::VectorXd::Zero(24)) == 1);
  Eigen::VectorXd kc = Eigen::VectorXd::Zero(24);
  kc(15) = 0.5;
  CHECK(mode_estimate(kc) == 0);
}

TEST_CASE("harmony vector") {
  const auto v = harmony_vector(testing::tone({note(3 - 12), note(7 - 12), note(10 - 12)}, 4.0));
  REQUIRE(v.size() == 64);
  CHECK(v[9] == 1.0);
  const auto s = harmony_vector(testing::silence(3.0));
  REQUIRE(s.size() == 64);
  CHECK(s[9] == 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != 9) CHECK(s[i] == 0.0);
  }
}

TEST_CASE("transposing by two semitones barely moves the harmony vector") {
  const auto a = harmony_vector(testing::tone({note(3 - 12), note(7 - 12), note(10 - 12)}, 4.0));
  const auto b = harmony_vector(testing::tone({note(5 - 12), note(9 - 12), note(12 - 12)}, 4.0));
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += a[i] * a[i];
  }
  CHECK(std::sqrt(diff / norm) < 0.05);
}

}  // TEST_SUITE
