#include "adq/dsp/audio.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include "adq/error.h"

namespace adq::dsp {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

FormatChunk parse_format(std::span<const std::uint8_t> chunk) {
  if (chunk.size() < 16) throw DecodeError("fmt", "chunk shorter than 16 bytes");
  FormatChunk fmt;
  fmt.format = read_u16(chunk, 0);
  fmt.channels = read_u16(chunk, 2);
  fmt.sample_rate = read_u32(chunk, 4);
  fmt.bits = read_u16(chunk, 14);
  if (fmt.format == kFormatExtensible) {
    if (chunk.size() < 26) throw DecodeError("fmt.extensible", "missing sub-format GUID");
    fmt.format = read_u16(chunk, 24);
  }
  if (fmt.format != kFormatPcm && fmt.format != kFormatFloat) {
    throw DecodeError("fmt.audio_format",
                      "unsupported codec " + std::to_string(fmt.format));
  }
  if (fmt.format == kFormatPcm && fmt.bits != 16) {
    throw DecodeError("fmt.bits_per_sample",
                      "PCM must be 16-bit, got " + std::to_string(fmt.bits));
  }
  if (fmt.format == kFormatFloat && fmt.bits != 32) {
    throw DecodeError("fmt.bits_per_sample",
                      "float must be 32-bit, got " + std::to_string(fmt.bits));
  }
  if (fmt.channels != 1 && fmt.channels != 2) {
    throw DecodeError("fmt.channels", "expected 1 or 2, got " + std::to_string(fmt.channels));
  }
  if (fmt.sample_rate == 0) throw DecodeError("fmt.sample_rate", "zero sample rate");
  return fmt;
}

}  // namespace

void AudioClip::validate() const {
  if (samples.empty()) throw ParameterError("audio clip '" + id + "' has no samples");
  if (sample_rate <= 0) throw ParameterError("audio clip '" + id + "' has non-positive rate");
  for (double s : samples) {
    if (!std::isfinite(s)) throw ParameterError("audio clip '" + id + "' has non-finite samples");
  }
}

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string id) {
  if (bytes.size() < 12) throw DecodeError("riff", "header truncated");
  if (!tag_is(bytes, 0, "RIFF")) throw DecodeError("riff", "missing RIFF tag");
  if (!tag_is(bytes, 8, "WAVE")) throw DecodeError("riff.form", "not a WAVE form");

  std::optional<FormatChunk> fmt;
  std::optional<std::span<const std::uint8_t>> data;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    // Writers that stream audio sometimes leave the data size unpatched; clamp to what exists.
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (tag_is(bytes, pos, "fmt ")) {
      if (avail < size) throw DecodeError("fmt", "chunk truncated");
      fmt = parse_format(bytes.subspan(body, size));
    } else if (tag_is(bytes, pos, "data")) {
      data = bytes.subspan(body, avail);
    }
    pos = body + avail + (avail % 2);
  }
  if (!fmt) throw DecodeError("fmt", "no fmt chunk");
  if (!data) throw DecodeError("data", "no data chunk");

  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  const std::size_t frames = data->size() / frame_bytes;
  if (frames == 0) throw DecodeError("data", "zero-length payload");

  AudioClip clip;
  clip.id = std::move(id);
  clip.sample_rate = static_cast<int>(fmt->sample_rate);
  clip.samples.resize(frames);
  const auto& payload = *data;
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt->channels; ++c) {
      const std::size_t at = f * frame_bytes + c * bytes_per_sample;
      if (fmt->format == kFormatPcm) {
        acc += static_cast<std::int16_t>(read_u16(payload, at)) / 32768.0;
      } else {
        float v = std::bit_cast<float>(read_u32(payload, at));
        if (!std::isfinite(v)) throw DecodeError("data", "non-finite float sample");
        acc += std::clamp(static_cast<double>(v), -1.0, 1.0);
      }
    }
    clip.samples[f] = acc / fmt->channels;
  }
  return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("file", "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.stem().string());
}

std::vector<std::uint8_t> encode_wav_pcm16(const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, 2 * n);
  for (double s : clip.samples) {
    const auto q = static_cast<std::int16_t>(std::clamp<long>(std::lround(s * 32768.0), -32768, 32767));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path, const AudioClip& clip) {
  const auto bytes = encode_wav_pcm16(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

AudioClip prepare_for_analysis(const AudioClip& clip) {
  clip.validate();
  if (clip.sample_rate == kAnalysisRate) return clip;
  return resample(clip, kAnalysisRate);
}

}  // namespace adq::dsp
