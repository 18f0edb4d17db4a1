// Copyright 2026 The fctsbn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fctsbn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fctsbn {

namespace {

using nlohmann::json;

void put_f64(std::string& out, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  char b[8];
  std::memcpy(b, &u, 8);
  out.append(b, 8);
}

double get_f64(const char* p) {
  std::uint64_t u;
  std::memcpy(&u, p, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double x;
  std::memcpy(&x, &u, 8);
  return x;
}

struct NormTensors {
  Matrix mean, stddev, constant;
};

struct StatsTensors {
  std::vector<Matrix> rows;
};

[[noreturn]] void bad(const std::string& origin, const std::string& msg) {
  throw IoError(origin + ": " + msg);
}

Index product(const std::vector<Index>& shape) {
  Index n = 1;
  for (Index s : shape) n *= s;
  return n;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const ModelSpec& spec = ckpt.model.spec;
  if (!(spec == ckpt.recognition.spec)) throw ShapeError("checkpoint: model and recognition specs differ");
  std::vector<ConstTensorRef> refs = ckpt.model.tensors();
  for (auto& t : ckpt.recognition.tensors()) refs.push_back(t);
  for (const auto& b : ckpt.baselines)
    for (auto& t : b.tensors()) refs.push_back(t);
  std::vector<Matrix> extra;  // keeps derived tensors alive
  extra.reserve(ckpt.stats.size() + 3);
  for (std::size_t k = 0; k < ckpt.stats.size(); ++k) {
    Matrix m(3, 1);
    m << ckpt.stats[k].mean, ckpt.stats[k].var, ckpt.stats[k].rate;
    extra.push_back(m);
    refs.push_back({"signal_stats/" + layer_prefix(static_cast<int>(k)), &extra.back(), {3}});
  }
  if (ckpt.classifier)
    for (auto& t : ckpt.classifier->tensors()) refs.push_back(t);
  if (ckpt.norm) {
    const NormStats& n = *ckpt.norm;
    const Index m = n.mean.size();
    extra.push_back(n.mean);
    refs.push_back({"norm/mean", &extra.back(), {m}});
    extra.push_back(n.stddev);
    refs.push_back({"norm/std", &extra.back(), {m}});
    Matrix c(m, 1);
    for (Index i = 0; i < m; ++i) c(i, 0) = n.constant[i] ? 1.0 : 0.0;
    extra.push_back(c);
    refs.push_back({"norm/constant", &extra.back(), {m}});
  }

  json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["dims"] = {{"M", spec.dims.visible},
                      {"S", spec.dims.styles},
                      {"F", spec.dims.factors},
                      {"n", spec.dims.order},
                      {"layer_sizes", spec.dims.layer_sizes}};
  manifest["obs_kind"] = std::string(to_string(spec.obs));
  manifest["factored"] = spec.factored;
  manifest["hidden_markov"] = spec.hidden_markov;
  if (ckpt.classifier) manifest["classifier_window"] = ckpt.classifier->window;
  json tensors = json::array();
  std::string blob;
  for (const auto& r : refs) {
    tensors.push_back({{"name", r.name}, {"shape", r.shape}, {"dtype", "f64"}, {"offset", blob.size()}});
    for (Index i = 0; i < r.data->size(); ++i) put_f64(blob, r.data->data()[i]);
  }
  manifest["tensors"] = tensors;
  manifest["blob_bytes"] = blob.size();
  return manifest.dump() + "\n" + blob;
}

Checkpoint decode_checkpoint(const std::string& bytes, const std::string& origin) {
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string::npos) bad(origin, "missing manifest terminator");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(0, nl));
  } catch (const json::exception& e) {
    bad(origin, std::string("malformed manifest: ") + e.what());
  }
  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      bad(origin, "incompatible checkpoint format_version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
    }
    ModelSpec spec;
    const json& d = manifest.at("dims");
    spec.dims.visible = d.at("M").get<int>();
    spec.dims.styles = d.at("S").get<int>();
    spec.dims.factors = d.at("F").get<int>();
    spec.dims.order = d.at("n").get<int>();
    spec.dims.layer_sizes = d.at("layer_sizes").get<std::vector<int>>();
    spec.obs = obs_kind_from_string(manifest.at("obs_kind").get<std::string>());
    spec.factored = manifest.at("factored").get<bool>();
    spec.hidden_markov = manifest.at("hidden_markov").get<bool>();
    spec.validate();

    const std::size_t blob_bytes = manifest.at("blob_bytes").get<std::size_t>();
    const std::size_t have = bytes.size() - nl - 1;
    if (have < blob_bytes) {
      bad(origin, "truncated blob: " + std::to_string(have) + " of " + std::to_string(blob_bytes) +
                      " bytes present");
    }
    if (have > blob_bytes) bad(origin, "trailing bytes after blob");
    const char* blob = bytes.data() + nl + 1;

    Checkpoint ckpt;
    ckpt.model = make_generative(spec);
    ckpt.recognition = make_recognition(spec);
    const json& tensors = manifest.at("tensors");

    // Optional components are sized from the manifest before reading.
    std::map<std::string, std::vector<Index>> shapes;
    for (const json& t : tensors) shapes[t.at("name").get<std::string>()] = t.at("shape").get<std::vector<Index>>();
    for (int k = 0;; ++k) {
      const std::string name = "baseline/" + layer_prefix(k);
      const auto it = shapes.find(name + "/W");
      if (it == shapes.end()) break;
      if (it->second.size() != 2) bad(origin, "tensor " + name + "/W: expected 2 axes");
      ckpt.baselines.push_back(
          make_baseline(it->second[1], static_cast<int>(it->second[0]), name));
    }
    NormTensors norm;
    Index stats_layers = 0;
    while (shapes.count("signal_stats/" + layer_prefix(static_cast<int>(stats_layers)))) ++stats_layers;
    std::vector<Matrix> stats(stats_layers, Matrix::Zero(3, 1));
    if (shapes.count("classifier/W")) {
      const auto& s = shapes["classifier/W"];
      if (s.size() != 2) bad(origin, "tensor classifier/W: expected 2 axes");
      const Index w = manifest.value("classifier_window", Index{1});
      if (w < 1 || s[1] % w != 0) bad(origin, "classifier_window does not divide classifier/W");
      ckpt.classifier = make_classifier(s[0], s[1] / w, w);
    }
    if (shapes.count("norm/mean")) {
      const Index m = product(shapes["norm/mean"]);
      norm.mean = norm.stddev = norm.constant = Matrix::Zero(m, 1);
    }

    std::map<std::string, TensorRef> known;
    auto add = [&](std::vector<TensorRef> v) {
      for (auto& r : v) known.emplace(r.name, r);
    };
    add(ckpt.model.tensors());
    add(ckpt.recognition.tensors());
    for (auto& b : ckpt.baselines) add(b.tensors());
    if (ckpt.classifier) add(ckpt.classifier->tensors());
    for (Index k = 0; k < stats_layers; ++k)
      known.emplace("signal_stats/" + layer_prefix(static_cast<int>(k)),
                    TensorRef{"signal_stats/" + layer_prefix(static_cast<int>(k)), &stats[k], {3}});
    if (norm.mean.size()) {
      const Index m = norm.mean.rows();
      known.emplace("norm/mean", TensorRef{"norm/mean", &norm.mean, {m}});
      known.emplace("norm/std", TensorRef{"norm/std", &norm.stddev, {m}});
      known.emplace("norm/constant", TensorRef{"norm/constant", &norm.constant, {m}});
    }

    std::map<std::string, bool> seen;
    for (const json& t : tensors) {
      const std::string name = t.at("name").get<std::string>();
      const auto it = known.find(name);
      if (it == known.end()) bad(origin, "unknown tensor name '" + name + "'");
      if (t.at("dtype").get<std::string>() != "f64") bad(origin, "tensor " + name + ": dtype must be f64");
      const auto shape = t.at("shape").get<std::vector<Index>>();
      if (shape != it->second.shape) {
        std::string want, got;
        for (Index s : it->second.shape) want += (want.empty() ? "" : ",") + std::to_string(s);
        for (Index s : shape) got += (got.empty() ? "" : ",") + std::to_string(s);
        bad(origin, "tensor " + name + ": manifest shape [" + got + "] does not match expected [" +
                        want + "]");
      }
      const std::size_t offset = t.at("offset").get<std::size_t>();
      const std::size_t need = 8 * static_cast<std::size_t>(it->second.data->size());
      if (offset + need > blob_bytes) bad(origin, "tensor " + name + ": data runs past the blob");
      for (Index i = 0; i < it->second.data->size(); ++i)
        it->second.data->data()[i] = get_f64(blob + offset + 8 * static_cast<std::size_t>(i));
      seen[name] = true;
    }
    for (auto& r : ckpt.model.tensors())
      if (!seen.count(r.name)) bad(origin, "missing tensor '" + r.name + "'");
    for (auto& r : ckpt.recognition.tensors())
      if (!seen.count(r.name)) bad(origin, "missing tensor '" + r.name + "'");
    for (const auto& s : stats) ckpt.stats.push_back({s(0, 0), s(1, 0), s(2, 0)});
    if (norm.mean.size()) {
      NormStats n;
      n.mean = norm.mean.col(0);
      n.stddev = norm.stddev.col(0);
      for (Index i = 0; i < norm.constant.rows(); ++i) n.constant.push_back(norm.constant(i, 0) != 0.0);
      ckpt.norm = std::move(n);
    }
    return ckpt;
  } catch (const json::exception& e) {
    bad(origin, std::string("malformed manifest: ") + e.what());
  } catch (const ShapeError& e) {
    bad(origin, e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str(), path.string());
}

}  // namespace fctsbn
