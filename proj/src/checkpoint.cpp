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

#include "srccount/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "srccount/error.hpp"

namespace srccount {
namespace {

using nlohmann::json;

void AppendU32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t ReadU32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
  }
  return v;
}

void AppendF32(std::string& out, float f) { AppendU32(out, std::bit_cast<std::uint32_t>(f)); }

json WindowJson(const WindowConfig& w) {
  return {{"window_ms", w.window_ms}, {"sample_rate_hz", w.sample_rate_hz}};
}

std::size_t Product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Error Malformed(const std::string& what) {
  return Error(ErrorKind::kShapeMismatch, "malformed checkpoint header: " + what);
}

}  // namespace

std::string SerializeCheckpoint(const Model<float>& model) {
  json tensors = json::array();
  std::size_t offset = 0;
  const auto views = ParameterViews(model);
  for (const auto& v : views) {
    tensors.push_back({{"name", v.name}, {"shape", v.shape}, {"dtype", "f32"}, {"offset", offset}});
    offset += v.values.size() * 4;
  }
  json blocks = json::array();
  for (const auto& b : model.classifier.config.conv_blocks) {
    blocks.push_back({{"out_channels", b.out_channels},
                      {"kernel_h", b.kernel_h},
                      {"kernel_w", b.kernel_w},
                      {"stride", b.stride}});
  }
  const auto& f = model.frontend;
  json header = {
      {"format_version", kCheckpointVersion},
      {"window", WindowJson(model.window)},
      {"frontend",
       {{"n_filters", f.n_filters()},
        {"kernel_width", f.kernel_width},
        {"pool_stride", f.pooling.stride},
        {"pool_kernel_width", f.pooling.kernel_width},
        {"pcen_s", f.pcen.s},
        {"pcen_eps", f.pcen.eps}}},
      {"classifier",
       {{"conv_blocks", blocks},
        {"hidden_dim", model.classifier.config.hidden_dim},
        {"n_classes", model.classifier.config.n_classes},
        {"input_h", model.classifier.input_h},
        {"input_w", model.classifier.input_w}}},
      {"tensors", tensors},
      {"payload_bytes", offset},
  };
  const std::string text = header.dump();

  std::string out(kCheckpointMagic);
  AppendU32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& v : views) {
    for (float x : v.values) AppendF32(out, x);
  }
  return out;
}

Model<float> ParseCheckpoint(std::string_view bytes) {
  const std::size_t magic_len = kCheckpointMagic.size();
  if (bytes.size() < magic_len || bytes.substr(0, magic_len) != kCheckpointMagic) {
    throw Error(ErrorKind::kBadMagic, "bad magic: not a checkpoint file");
  }
  if (bytes.size() < magic_len + 4) {
    throw Error(ErrorKind::kTruncatedPayload, "truncated payload: header length missing");
  }
  const std::uint32_t header_len = ReadU32(bytes, magic_len);
  const std::size_t header_at = magic_len + 4;
  if (bytes.size() < header_at + header_len) {
    throw Error(ErrorKind::kTruncatedPayload, "truncated payload: header cut short");
  }
  json header;
  try {
    header = json::parse(bytes.substr(header_at, header_len));
  } catch (const json::exception& e) {
    throw Malformed(e.what());
  }

  try {
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw Error(ErrorKind::kVersionMismatch,
                  "version mismatch: checkpoint format " + std::to_string(version) +
                      ", this build reads " + std::to_string(kCheckpointVersion));
    }

    Model<float> m;
    m.window.window_ms = header.at("window").at("window_ms").get<double>();
    m.window.sample_rate_hz = header.at("window").at("sample_rate_hz").get<int>();
    const auto& fh = header.at("frontend");
    const auto n = fh.at("n_filters").get<std::size_t>();
    m.frontend.kernel_width = fh.at("kernel_width").get<std::size_t>();
    m.frontend.pooling.stride = fh.at("pool_stride").get<std::size_t>();
    m.frontend.pooling.kernel_width = fh.at("pool_kernel_width").get<std::size_t>();
    m.frontend.pcen.s = fh.at("pcen_s").get<float>();
    m.frontend.pcen.eps = fh.at("pcen_eps").get<float>();
    for (auto* v : {&m.frontend.gabor.mu, &m.frontend.gabor.sigma_t, &m.frontend.pooling.sigma_p,
                    &m.frontend.pcen.alpha, &m.frontend.pcen.delta, &m.frontend.pcen.r}) {
      v->assign(n, 0.0f);
    }

    const auto& ch = header.at("classifier");
    CompactCnnConfig cfg;
    cfg.conv_blocks.clear();
    for (const auto& b : ch.at("conv_blocks")) {
      cfg.conv_blocks.push_back({b.at("out_channels").get<std::size_t>(),
                                 b.at("kernel_h").get<std::size_t>(),
                                 b.at("kernel_w").get<std::size_t>(), b.at("stride").get<std::size_t>()});
    }
    cfg.hidden_dim = ch.at("hidden_dim").get<std::size_t>();
    cfg.n_classes = ch.at("n_classes").get<std::size_t>();
    m.classifier = ZerosLike(InitClassifier<float>(cfg, ch.at("input_h").get<std::size_t>(),
                                                   ch.at("input_w").get<std::size_t>(), 0));

    auto views = ParameterViews(m);
    const auto& dir = header.at("tensors");
    if (dir.size() != views.size()) {
      throw Error(ErrorKind::kShapeMismatch, "checkpoint lists " + std::to_string(dir.size()) +
                                                 " tensors, model has " +
                                                 std::to_string(views.size()));
    }
    const std::size_t payload_at = header_at + header_len;
    const std::size_t payload_len = bytes.size() - payload_at;
    std::size_t expected_offset = 0;
    for (std::size_t k = 0; k < views.size(); ++k) {
      const auto& entry = dir[k];
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (name != views[k].name || shape != views[k].shape ||
          Product(shape) != views[k].values.size() || entry.at("dtype") != "f32") {
        throw Error(ErrorKind::kShapeMismatch, "tensor " + std::to_string(k) + " (" + name +
                                                   ") does not match the configured model");
      }
      if (offset != expected_offset) {
        throw Error(ErrorKind::kShapeMismatch, "tensor " + name + " has inconsistent offset");
      }
      const std::size_t extent = views[k].values.size() * 4;
      if (offset + extent > payload_len) {
        throw Error(ErrorKind::kTruncatedPayload,
                    "truncated payload: tensor " + name + " needs bytes [" + std::to_string(offset) +
                        ", " + std::to_string(offset + extent) + ") but payload has " +
                        std::to_string(payload_len));
      }
      for (std::size_t j = 0; j < views[k].values.size(); ++j) {
        views[k].values[j] = std::bit_cast<float>(ReadU32(bytes, payload_at + offset + 4 * j));
      }
      expected_offset += extent;
    }
    if (expected_offset != payload_len) {
      throw Error(ErrorKind::kShapeMismatch, "payload has " + std::to_string(payload_len) +
                                                 " bytes, directory describes " +
                                                 std::to_string(expected_offset));
    }
    m.frontend.validate();
    return m;
  } catch (const json::exception& e) {
    throw Malformed(e.what());
  }
}

void SaveCheckpoint(const Model<float>& model, const std::filesystem::path& path) {
  const std::string bytes = SerializeCheckpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "failed writing checkpoint " + path.string());
}

Model<float> LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kNotFound, "cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParseCheckpoint(bytes);
}

}  // namespace srccount
