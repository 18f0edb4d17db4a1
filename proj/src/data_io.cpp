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

#include "fctsbn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <string_view>

#include "fctsbn/model.hpp"
#include "fctsbn/schedule.hpp"

namespace fctsbn {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& msg) {
  throw IoError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(',', pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_double(std::string_view field, const fs::path& path, std::size_t line) {
  double x = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (field.empty() || ec != std::errc() || ptr != last)
    fail(path, line, "cannot parse '" + std::string(field) + "' as a number");
  if (!std::isfinite(x)) fail(path, line, "non-finite value '" + std::string(field) + "'");
  return x;
}

long parse_int(std::string_view field, const fs::path& path, std::size_t line) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    fail(path, line, "cannot parse '" + std::string(field) + "' as an integer");
  return x;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void check_values(const SequenceRecord& r, ObsKind obs) {
  for (Index t = 0; t < r.V.cols(); ++t) {
    for (Index m = 0; m < r.V.rows(); ++m) {
      const double x = r.V(m, t);
      const bool ok = obs == ObsKind::Real     ? std::isfinite(x)
                      : obs == ObsKind::Binary ? (x == 0.0 || x == 1.0)
                                               : (x >= 0.0 && x == std::floor(x) && std::isfinite(x));
      if (!ok) {
        throw ValueError("sequence " + r.id + ": frame " + std::to_string(t) + " dimension " +
                         std::to_string(m) + " holds " + format_double(x) + ", invalid for " +
                         std::string(to_string(obs)) + " observations");
      }
    }
  }
}

void plant_map(CondWeight& w, double scale, Rng& rng) {
  if (scale == 0.0) return;
  const double in_sd = scale / std::sqrt(static_cast<double>(w.in_dim()));
  if (w.is_factored()) {
    const double f = static_cast<double>(w.factors());
    for (Index j = 0; j < w.a().cols(); ++j)
      for (Index i = 0; i < w.a().rows(); ++i) w.a()(i, j) = rng.normal(0.0, 1.0 / std::sqrt(f));
    w.b().setOnes();
    for (Index j = 0; j < w.c().cols(); ++j)
      for (Index i = 0; i < w.c().rows(); ++i) w.c()(i, j) = rng.normal(0.0, in_sd);
  } else {
    Matrix slice(w.out_dim(), w.in_dim());
    for (Index j = 0; j < slice.cols(); ++j)
      for (Index i = 0; i < slice.rows(); ++i) slice(i, j) = rng.normal(0.0, in_sd);
    for (Index s = 0; s < w.styles(); ++s) w.slice(s) = slice;
  }
}

}  // namespace

Index SequenceDataset::styles() const {
  for (const auto& r : records)
    if (r.Y) return r.Y->rows();
  return 0;
}

Index SequenceDataset::total_frames() const {
  Index n = 0;
  for (const auto& r : records) n += r.frames();
  return n;
}

Matrix read_csv(const fs::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (options.header && lineno == 1) continue;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (rows.empty()) {
      width = fields.size();
    } else if (fields.size() != width) {
      fail(path, lineno, "row has " + std::to_string(fields.size()) + " columns, expected " +
                             std::to_string(width));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f, path, lineno));
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = rows[i][j];
  return out;
}

void write_csv(const fs::path& path, const Matrix& rows, const CsvOptions& options,
               const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  if (options.header) {
    for (Index j = 0; j < rows.cols(); ++j) {
      if (j) out << ',';
      out << (static_cast<std::size_t>(j) < header.size() ? header[j] : "d" + std::to_string(j));
    }
    out << '\n';
  }
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) {
      if (j) out << ',';
      out << format_double(rows(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

void validate_dataset(const SequenceDataset& data) {
  Index m = -1;
  Index s = -1;
  for (const auto& r : data.records) {
    if (r.V.cols() < 1) throw ValueError("sequence " + r.id + ": no frames");
    if (m < 0) m = r.V.rows();
    if (r.V.rows() != m) {
      throw ShapeError("sequence " + r.id + ": " + std::to_string(r.V.rows()) +
                       " dimensions, expected " + std::to_string(m));
    }
    check_values(r, data.obs);
    if (r.Y) {
      if (s < 0) s = r.Y->rows();
      if (r.Y->rows() != s) throw ShapeError("sequence " + r.id + ": side-information width differs");
      if (r.Y->cols() != r.V.cols()) throw ShapeError("sequence " + r.id + ": side-information frames differ");
      if (!r.Y->allFinite()) throw ValueError("sequence " + r.id + ": non-finite side information");
    }
    for (const auto& l : r.labels) {
      if (l.start < 0 || l.start >= r.frames())
        throw ValueError("sequence " + r.id + ": label window starts outside the sequence");
      if (l.style < 0) throw ValueError("sequence " + r.id + ": negative style label");
    }
  }
}

SequenceDataset load_dataset(const fs::path& dir, ObsKind obs, const CsvOptions& options) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + ": not a directory");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!ends_with(name, ".csv") || ends_with(name, ".y.csv") || name == "labels.csv") continue;
    ids.push_back(name.substr(0, name.size() - 4));
  }
  std::sort(ids.begin(), ids.end());

  SequenceDataset data;
  data.obs = obs;
  std::map<std::string, std::size_t> index;
  for (const auto& id : ids) {
    const fs::path vpath = dir / (id + ".csv");
    SequenceRecord r;
    r.id = id;
    r.V = read_csv(vpath, options).transpose();
    if (r.V.cols() == 0) fail(vpath, 1, "no frames");
    if (!data.records.empty() && r.V.rows() != data.records.front().V.rows()) {
      fail(vpath, options.header ? 2 : 1,
           "sequence has " + std::to_string(r.V.rows()) + " dimensions, expected " +
               std::to_string(data.records.front().V.rows()));
    }
    try {
      check_values(r, obs);
    } catch (const ValueError& e) {
      throw IoError(vpath.string() + ": " + e.what());
    }
    const fs::path ypath = dir / (id + ".y.csv");
    if (fs::exists(ypath)) {
      r.Y = read_csv(ypath, options).transpose();
      if (r.Y->cols() != r.V.cols()) {
        fail(ypath, 1, "side information has " + std::to_string(r.Y->cols()) + " frames, expected " +
                           std::to_string(r.V.cols()));
      }
    }
    index[id] = data.records.size();
    data.records.push_back(std::move(r));
  }

  const fs::path lpath = dir / "labels.csv";
  if (fs::exists(lpath)) {
    std::ifstream in(lpath);
    if (!in) throw IoError(lpath.string() + ": cannot open for reading");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 1 || trim(line).empty()) continue;
      const auto f = split(line);
      if (f.size() != 3) fail(lpath, lineno, "expected sequence_id,start_frame,style_index");
      const auto it = index.find(std::string(f[0]));
      if (it == index.end()) fail(lpath, lineno, "unknown sequence '" + std::string(f[0]) + "'");
      SequenceRecord& r = data.records[it->second];
      LabelWindow l{parse_int(f[1], lpath, lineno), static_cast<int>(parse_int(f[2], lpath, lineno))};
      if (l.start < 0 || l.start >= r.frames()) fail(lpath, lineno, "start_frame outside the sequence");
      if (l.style < 0 || (r.Y && l.style >= r.Y->rows()))
        fail(lpath, lineno, "style_index out of range");
      r.labels.push_back(l);
    }
  }
  return data;
}

void save_dataset(const SequenceDataset& data, const fs::path& dir, const CsvOptions& options) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
  bool any_labels = false;
  for (const auto& r : data.records) {
    write_csv(dir / (r.id + ".csv"), r.V.transpose(), options);
    if (r.Y) write_csv(dir / (r.id + ".y.csv"), r.Y->transpose(), options);
    any_labels = any_labels || !r.labels.empty();
  }
  if (!any_labels) return;
  std::ofstream out(dir / "labels.csv", std::ios::binary);
  if (!out) throw IoError((dir / "labels.csv").string() + ": cannot open for writing");
  out << "sequence_id,start_frame,style_index\n";
  for (const auto& r : data.records)
    for (const auto& l : r.labels) out << r.id << ',' << l.start << ',' << l.style << '\n';
}

NormStats compute_norm_stats(const SequenceDataset& data) {
  if (data.obs != ObsKind::Real)
    throw ValueError("normalize: only real-valued observations can be normalized");
  const Index m = data.visible();
  const Index frames = data.total_frames();
  NormStats s;
  s.mean = Vector::Zero(m);
  s.stddev = Vector::Ones(m);
  s.constant.assign(static_cast<std::size_t>(m), false);
  if (frames == 0) return s;
  for (const auto& r : data.records) s.mean += r.V.rowwise().sum();
  s.mean /= static_cast<double>(frames);
  Vector ss = Vector::Zero(m);
  for (const auto& r : data.records) ss += (r.V.colwise() - s.mean).array().square().rowwise().sum().matrix();
  for (Index i = 0; i < m; ++i) {
    const double sd = std::sqrt(ss[i] / static_cast<double>(frames));
    if (sd > 0.0) {
      s.stddev[i] = sd;
    } else {
      s.constant[i] = true;
    }
  }
  return s;
}

void apply_normalization(SequenceDataset& data, const NormStats& stats) {
  for (auto& r : data.records) {
    check_size(r.V.rows(), stats.mean.size(), "normalize: dimensions");
    for (Index i = 0; i < r.V.rows(); ++i) {
      if (stats.constant[i]) continue;
      r.V.row(i) = (r.V.row(i).array() - stats.mean[i]) / stats.stddev[i];
    }
  }
}

Matrix denormalize(const Matrix& V, const NormStats& stats) {
  check_size(V.rows(), stats.mean.size(), "denormalize: dimensions");
  Matrix out = V;
  for (Index i = 0; i < V.rows(); ++i) {
    if (stats.constant[i]) continue;
    out.row(i) = V.row(i).array() * stats.stddev[i] + stats.mean[i];
  }
  return out;
}

void apply_denormalization(SequenceDataset& data, const NormStats& stats) {
  for (auto& r : data.records) r.V = denormalize(r.V, stats);
}

std::pair<SequenceDataset, NormStats> normalize(const SequenceDataset& data) {
  NormStats stats = compute_norm_stats(data);
  SequenceDataset out = data;
  apply_normalization(out, stats);
  return {std::move(out), std::move(stats)};
}

PlantedModel plant_model(const PlantConfig& config, Rng& rng) {
  const ModelSpec& spec = config.spec;
  spec.validate();
  const Dims& d = spec.dims;
  PlantedModel out;
  GenerativeParams& p = out.truth;
  p = make_generative(spec);
  Rng wr = rng.fork(1);
  for (auto& layer : p.layers) {
    plant_map(layer.self_lag, config.hidden_scale, wr);
    if (layer.lower_lag)
      plant_map(*layer.lower_lag, &layer == &p.layers.front() ? config.visible_to_hidden_scale
                                                             : config.hidden_scale, wr);
    if (layer.top_down) plant_map(*layer.top_down, config.hidden_scale, wr);
  }
  plant_map(p.emission.w2, config.loading_scale, wr);
  if (p.emission.w4) plant_map(*p.emission.w4, config.ar_scale, wr);
  for (Index s = 0; s < d.styles; ++s) {
    const double offset =
        d.styles == 1 ? 0.0
                      : config.style_separation * (static_cast<double>(s) / (d.styles - 1) - 0.5);
    p.emission.c.col(s).setConstant(offset);
  }
  if (p.emission.c_var) p.emission.c_var->setConstant(2.0 * std::log(config.noise_std));
  Rng dr = rng.fork(2);
  out.data = sample_dataset(p, config, dr);
  return out;
}

SequenceDataset sample_dataset(const GenerativeParams& truth, const PlantConfig& config, Rng& rng) {
  const Dims& d = truth.spec.dims;
  if (config.sequences < 0) throw ValueError("plant: negative sequence count");
  if (config.frames < 1) throw ValueError("plant: frames must be >= 1");
  if (config.burn_in < 0) throw ValueError("plant: negative burn-in");
  const Index window = config.label_window > 0 ? config.label_window : d.order + 1;
  SequenceDataset data;
  data.obs = truth.spec.obs;
  GenerateOptions opts;
  opts.count_total = config.count_total;
  for (int i = 0; i < config.sequences; ++i) {
    const int style = i % d.styles;
    const Index total = config.frames + config.burn_in;
    const StyleSchedule sched = constant_schedule(d.styles, style, total);
    Rng r = rng.fork(static_cast<std::uint64_t>(i));
    const GeneratedSequence g = generate(truth, Matrix(), sched, total, r, opts);
    SequenceRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "seq%05d", i);
    rec.id = id;
    rec.V = g.V.rightCols(config.frames);
    rec.Y = sched.Y.rightCols(config.frames);
    for (Index start = 0; start + window <= config.frames; start += window)
      rec.labels.push_back({start, style});
    data.records.push_back(std::move(rec));
  }
  return data;
}

}  // namespace fctsbn
