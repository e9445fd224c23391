#include "adq/app/spectrogram_file.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "adq/error.h"

namespace adq::app {

namespace {

constexpr char kMagic[8] = {'A', 'D', 'Q', 'S', 'P', 'E', 'C', '1'};

void put(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get(const std::vector<std::uint8_t>& in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(in[at + static_cast<std::size_t>(b)]) << (8 * b);
  return v;
}

}  // namespace

void write_spectrogram(const std::filesystem::path& path, const StoredSpectrogram& spec) {
  const auto& h = spec.header;
  if (spec.values.rows() != h.bins || spec.values.cols() != h.frames) {
    throw DataError("spectrogram header does not match its values");
  }
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put(out, kSpectrogramFormatVersion, 4);
  put(out, h.bins, 4);
  put(out, h.frames, 4);
  put(out, h.hop, 4);
  put(out, h.sample_rate, 4);
  put(out, h.bins_per_octave, 4);
  put(out, std::bit_cast<std::uint64_t>(h.f_min), 8);
  put(out, std::bit_cast<std::uint64_t>(h.power), 8);
  put(out, std::bit_cast<std::uint64_t>(h.scale), 8);
  put(out, 0, 8);
  for (Eigen::Index r = 0; r < spec.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < spec.values.cols(); ++c) {
      put(out, std::bit_cast<std::uint32_t>(static_cast<float>(spec.values(r, c))), 4);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("write failed for " + path.string());
}

StoredSpectrogram read_spectrogram(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  const std::vector<std::uint8_t> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < kSpectrogramHeaderBytes || std::memcmp(in.data(), kMagic, 8) != 0) {
    throw DecodeError("magic", path.string() + " is not a spectrogram file");
  }
  if (get(in, 8, 4) != kSpectrogramFormatVersion) throw DecodeError("version", "unsupported version");
  StoredSpectrogram s;
  auto& h = s.header;
  h.bins = static_cast<std::uint32_t>(get(in, 12, 4));
  h.frames = static_cast<std::uint32_t>(get(in, 16, 4));
  h.hop = static_cast<std::uint32_t>(get(in, 20, 4));
  h.sample_rate = static_cast<std::uint32_t>(get(in, 24, 4));
  h.bins_per_octave = static_cast<std::uint32_t>(get(in, 28, 4));
  h.f_min = std::bit_cast<double>(get(in, 32, 8));
  h.power = std::bit_cast<double>(get(in, 40, 8));
  h.scale = std::bit_cast<double>(get(in, 48, 8));
  const std::uint64_t count = static_cast<std::uint64_t>(h.bins) * h.frames;
  if (in.size() != kSpectrogramHeaderBytes + 4 * count) {
    throw DecodeError("payload", "expected " + std::to_string(count) + " float32 values");
  }
  s.values.resize(h.bins, h.frames);
  std::size_t at = kSpectrogramHeaderBytes;
  for (Eigen::Index r = 0; r < s.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.values.cols(); ++c, at += 4) {
      s.values(r, c) = std::bit_cast<float>(static_cast<std::uint32_t>(get(in, at, 4)));
    }
  }
  return s;
}

}  // namespace adq::app
