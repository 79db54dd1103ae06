// Copyright 2026 The srccount Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "srccount/wav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "srccount/error.hpp"

namespace srccount {
namespace {

std::uint32_t U32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t U16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFFu));
  out.push_back(static_cast<char>((v >> 8) & 0xFFu));
}

}  // namespace

Waveform ParseWav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    throw Error(ErrorKind::kParse, "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  Waveform wave;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    const std::uint32_t size = U32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size() && id != "data") {
      throw Error(ErrorKind::kParse, "truncated WAV chunk '" + std::string(id) + "'");
    }
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorKind::kParse, "WAV fmt chunk too short");
      const std::uint16_t format = U16(bytes, body);
      const std::uint16_t channels = U16(bytes, body + 2);
      const std::uint32_t rate = U32(bytes, body + 4);
      const std::uint16_t bits = U16(bytes, body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error(ErrorKind::kValidation,
                    "unsupported WAV encoding (format " + std::to_string(format) + ", " +
                        std::to_string(channels) + " channels, " + std::to_string(bits) +
                        " bits); only 16-bit PCM mono is supported");
      }
      wave.sample_rate_hz = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorKind::kParse, "WAV data chunk precedes fmt chunk");
      if (body + size > bytes.size()) throw Error(ErrorKind::kParse, "truncated WAV data chunk");
      const std::size_t count = size / 2;
      wave.samples.resize(count);
      for (std::size_t n = 0; n < count; ++n) {
        const auto raw = static_cast<std::int16_t>(U16(bytes, body + 2 * n));
        wave.samples[n] = static_cast<double>(raw) / 32768.0;
      }
      return wave;
    }
    pos = body + size + (size & 1u);
  }
  throw Error(ErrorKind::kParse, "WAV file has no data chunk");
}

Waveform ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kNotFound, "cannot open WAV " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return ParseWav(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::int16_t> QuantizePcm16(std::span<const double> samples) {
  std::vector<std::int16_t> out(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const double v = std::round(samples[n] * 32768.0);
    out[n] = static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
  }
  return out;
}

void WriteWav(const std::filesystem::path& path, const Waveform& wave) {
  const auto pcm = QuantizePcm16(wave.samples);
  const auto data_bytes = static_cast<std::uint32_t>(pcm.size() * 2);
  const auto rate = static_cast<std::uint32_t>(wave.sample_rate_hz);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);         // PCM
  PutU16(out, 1);         // mono
  PutU32(out, rate);
  PutU32(out, rate * 2);  // byte rate
  PutU16(out, 2);         // block align
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (std::int16_t s : pcm) PutU16(out, static_cast<std::uint16_t>(s));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write WAV " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorKind::kIo, "failed writing WAV " + path.string());
}

}  // namespace srccount
