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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "srccount/checkpoint.hpp"
#include "srccount/error.hpp"
#include "srccount/wav.hpp"
#include "support.hpp"

using namespace srccount;
namespace fs = std::filesystem;

namespace {

ModelConfig SmallModelConfig() {
  ModelConfig c;
  c.n_filters = 8;
  c.kernel_width = 101;
  c.classifier.conv_blocks = {{4, 3, 3, 1}, {6, 3, 3, 2}};
  c.classifier.hidden_dim = 10;
  c.classifier.n_classes = 5;
  return c;
}

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path TempDir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("srccount_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::uint32_t HeaderLength(const std::string& bytes) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[7 + i]);
  return v;
}

// Splits a checkpoint, lets `edit` rewrite the header, reassembles it.
template <typename Fn>
std::string EditHeader(const std::string& bytes, Fn&& edit) {
  const std::uint32_t len = HeaderLength(bytes);
  auto header = nlohmann::json::parse(bytes.substr(11, len));
  edit(header);
  const std::string h = header.dump();
  std::string out = bytes.substr(0, 7);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((h.size() >> (8 * i)) & 0xFFu));
  return out + h + bytes.substr(11 + len);
}

ErrorKind KindOf(const std::string& bytes) {
  try {
    ParseCheckpoint(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a checkpoint error");
  return ErrorKind::kConfiguration;
}

std::string WavBytes(std::uint16_t format, std::uint16_t channels, std::uint16_t bits,
                     std::uint32_t rate, const std::string& data) {
  auto u32 = [](std::uint32_t v) {
    std::string s(4, '\0');
    for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    return s;
  };
  auto u16 = [](std::uint16_t v) {
    return std::string{static_cast<char>(v & 0xFFu), static_cast<char>(v >> 8)};
  };
  std::string fmt = u16(format) + u16(channels) + u32(rate) +
                    u32(rate * channels * bits / 8) + u16(static_cast<std::uint16_t>(channels * bits / 8)) +
                    u16(bits);
  std::string body = "WAVE" + std::string("fmt ") + u32(16) + fmt + "data" +
                     u32(static_cast<std::uint32_t>(data.size())) + data;
  return "RIFF" + u32(static_cast<std::uint32_t>(body.size())) + body;
}

}  // namespace

TEST_CASE("checkpoint round trip is bitwise exact") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto m = BuildModel<float>(SmallModelConfig(), seed);
    m.frontend.pcen.alpha[2] = 0.123456789f;
    m.classifier.out_bias.data[1] = -0.0f;
    const std::string bytes = SerializeCheckpoint(m);
    CHECK(bytes.substr(0, 7) == "TACNET1");
    const auto back = ParseCheckpoint(bytes);
    const auto a = ParameterViews(m);
    const auto b = ParameterViews(back);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].name == b[k].name);
      CHECK(a[k].shape == b[k].shape);
      REQUIRE(a[k].values.size() == b[k].values.size());
      for (std::size_t j = 0; j < a[k].values.size(); ++j) {
        CHECK(std::bit_cast<std::uint32_t>(a[k].values[j]) ==
              std::bit_cast<std::uint32_t>(b[k].values[j]));
      }
    }
    CHECK(back.window.window_ms == m.window.window_ms);
    CHECK(back.frontend.kernel_width == m.frontend.kernel_width);
    CHECK(back.n_classes() == 5);
    CHECK(SerializeCheckpoint(back) == bytes);
  }
}

TEST_CASE("checkpoint file round trip and missing file") {
  const auto dir = TempDir("ckpt");
  const auto m = BuildModel<float>(SmallModelConfig(), 4);
  SaveCheckpoint(m, dir / "m.ckpt");
  CHECK(SerializeCheckpoint(LoadCheckpoint(dir / "m.ckpt")) == SerializeCheckpoint(m));
  try {
    LoadCheckpoint(dir / "absent.ckpt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotFound);
  }
  fs::remove_all(dir);
}

TEST_CASE("checkpoint corruption yields distinct error kinds") {
  const std::string good = SerializeCheckpoint(BuildModel<float>(SmallModelConfig(), 5));

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(KindOf(bad_magic) == ErrorKind::kBadMagic);
  CHECK(KindOf("") == ErrorKind::kBadMagic);

  CHECK(KindOf(good.substr(0, good.size() - 4)) == ErrorKind::kTruncatedPayload);
  CHECK(KindOf(good.substr(0, 9)) == ErrorKind::kTruncatedPayload);
  CHECK(KindOf(good.substr(0, 11 + HeaderLength(good) / 2)) == ErrorKind::kTruncatedPayload);

  CHECK(KindOf(EditHeader(good, [](auto& h) { h["format_version"] = 2; })) ==
        ErrorKind::kVersionMismatch);
  CHECK(KindOf(EditHeader(good, [](auto& h) { h["tensors"][7]["shape"] = {3, 3}; })) ==
        ErrorKind::kShapeMismatch);
  CHECK(KindOf(EditHeader(good, [](auto& h) { h["classifier"]["hidden_dim"] = 11; })) ==
        ErrorKind::kShapeMismatch);
  CHECK(KindOf(good + "pad!") == ErrorKind::kShapeMismatch);
}

TEST_CASE("checkpoint error messages describe the problem") {
  const std::string good = SerializeCheckpoint(BuildModel<float>(SmallModelConfig(), 6));
  try {
    ParseCheckpoint(EditHeader(good, [](auto& h) { h["format_version"] = 9; }));
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("9") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}

TEST_CASE("wav round trip within quantization") {
  const auto dir = TempDir("wav");
  Waveform w;
  w.sample_rate_hz = 16000;
  w.samples = testing::RandomSignal(1234, 9, 0.9);
  w.samples.push_back(1.5);
  w.samples.push_back(-1.5);
  WriteWav(dir / "a.wav", w);
  const auto back = ReadWav(dir / "a.wav");
  CHECK(back.sample_rate_hz == 16000);
  REQUIRE(back.size() == w.size());
  for (std::size_t i = 0; i + 2 < w.size(); ++i) {
    CHECK(std::abs(back.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
  }
  CHECK(back.samples[w.size() - 2] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.samples[w.size() - 1] == -1.0);
  // Requantizing is exact.
  WriteWav(dir / "b.wav", back);
  CHECK(ReadBytes(dir / "a.wav") == ReadBytes(dir / "b.wav"));
  fs::remove_all(dir);
}

TEST_CASE("quantization saturates and rounds") {
  const std::vector<double> x = {0.0, 1.0, -1.0, 2.0, -2.0, 0.5 / 32768.0, 1.4 / 32768.0};
  const auto q = QuantizePcm16(x);
  CHECK(q[0] == 0);
  CHECK(q[1] == 32767);
  CHECK(q[2] == -32768);
  CHECK(q[3] == 32767);
  CHECK(q[4] == -32768);
  CHECK(q[6] == 1);
}

TEST_CASE("wav encodings other than 16-bit mono PCM are rejected") {
  const std::string data(8, '\0');
  CHECK_NOTHROW(ParseWav(WavBytes(1, 1, 16, 16000, data)));
  for (const auto& bytes : {WavBytes(3, 1, 32, 16000, data), WavBytes(1, 2, 16, 16000, data),
                            WavBytes(1, 1, 8, 16000, data), WavBytes(1, 1, 24, 16000, data)}) {
    try {
      ParseWav(bytes);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kValidation);
    }
  }
}

TEST_CASE("malformed wav files are parse errors") {
  const std::string good = WavBytes(1, 1, 16, 8000, std::string(20, '\x01'));
  const auto w = ParseWav(good);
  CHECK(w.sample_rate_hz == 8000);
  CHECK(w.size() == 10);
  for (const auto& bytes : {good.substr(0, good.size() - 2), good.substr(0, 30), std::string("RIFX"),
                            std::string("")}) {
    try {
      ParseWav(bytes);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kParse);
    }
  }
  try {
    ReadWav("/nonexistent/x.wav");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotFound);
  }
}
