/* Copyright 2026 The diva engine authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "diva/dataio.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "diva/config.hpp"
#include "diva/errors.hpp"

namespace diva {
namespace {

using nlohmann::json;

constexpr char kDatasetMagic[4] = {'D', 'I', 'V', 'A'};
constexpr char kCheckpointMagic[4] = {'D', 'V', 'C', 'K'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;

// Byte-order-explicit primitives. Integers are emitted least significant
// byte first; floats go through their bit patterns.
template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  put_le(out, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::string& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
 public:
  ByteReader(std::string data, std::string what)
      : data_(std::move(data)), what_(std::move(what)) {}

  std::size_t offset() const { return pos_; }

  void need(std::size_t n, const char* field) {
    if (pos_ + n > data_.size()) {
      std::ostringstream msg;
      msg << what_ << ": truncated at byte " << data_.size() << " (need " << n
          << " bytes for " << field << " at byte " << pos_ << ")";
      throw IoError(msg.str());
    }
  }

  template <typename T>
  T take(const char* field) {
    need(sizeof(T), field);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  float take_f32(const char* field) {
    return std::bit_cast<float>(take<std::uint32_t>(field));
  }

  double take_f64(const char* field) {
    return std::bit_cast<double>(take<std::uint64_t>(field));
  }

  std::string take_bytes(std::size_t n, const char* field) {
    need(n, field);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void expect_magic(const char (&magic)[4]) {
    need(4, "magic");
    if (std::memcmp(data_.data() + pos_, magic, 4) != 0) {
      std::ostringstream msg;
      msg << what_ << ": bad magic at byte 0 (not a "
          << std::string(magic, 4) << " file)";
      throw IoError(msg.str());
    }
    pos_ += 4;
  }

  void expect_version(std::uint32_t want) {
    const std::size_t at = pos_;
    const std::uint32_t got = take<std::uint32_t>("version");
    if (got != want) {
      std::ostringstream msg;
      msg << what_ << ": unsupported format version " << got << " at byte "
          << at << " (this build reads version " << want << ")";
      throw IoError(msg.str());
    }
  }

  void expect_consumed() {
    if (pos_ != data_.size()) {
      std::ostringstream msg;
      msg << what_ << ": " << (data_.size() - pos_)
          << " unexpected trailing bytes at byte " << pos_;
      throw IoError(msg.str());
    }
  }

 private:
  std::string data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string(what) + ": cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad())
    throw IoError(std::string(what) + ": failed reading \"" + path + "\"");
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes,
                const char* what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(what) + ": cannot open \"" + path +
                          "\" for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out)
    throw IoError(std::string(what) + ": failed writing \"" + path + "\"");
}

std::uint32_t checked_u32(std::size_t v, const char* field) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw IoError(std::string("dataset: ") + field + " exceeds the format's "
                  "32-bit limit");
  return static_cast<std::uint32_t>(v);
}

// Persisted tensor registry: every checkpoint blob in file order.
struct BlobRef {
  std::string name;
  Tensor* tensor;
};

std::vector<BlobRef> checkpoint_blobs(TrainerState& st) {
  std::vector<BlobRef> out;
  for (const ParamRef& p : st.model.live_state())
    out.push_back({"live." + p.name, p.tensor});
  for (const ParamRef& p : st.model.shadow_state())
    out.push_back({"shadow." + p.name, p.tensor});
  const std::vector<ParamRef> trainable = st.model.trainable();
  for (std::size_t i = 0; i < trainable.size(); ++i)
    out.push_back({"adam.m." + trainable[i].name, &st.opt.m[i]});
  for (std::size_t i = 0; i < trainable.size(); ++i)
    out.push_back({"adam.v." + trainable[i].name, &st.opt.v[i]});
  return out;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
  validate_dataset(ds);
  const std::uint32_t n = checked_u32(ds.n_samples(), "row count");
  const std::uint32_t f = checked_u32(ds.feature_dim(), "feature width");
  const std::uint32_t c = checked_u32(ds.n_classes(), "class count");

  std::string bytes;
  bytes.reserve(16 + std::size_t{4} * n * f + std::size_t{4} * n + c);
  bytes.append(kDatasetMagic, 4);
  put_le(bytes, kDatasetVersion);
  put_le(bytes, n);
  put_le(bytes, f);
  put_le(bytes, c);
  for (const double v : ds.features.data)
    put_f32(bytes, static_cast<float>(v));
  for (const int label : ds.labels)
    put_le(bytes, static_cast<std::uint32_t>(label));
  for (const std::uint8_t flag : ds.split)
    bytes.push_back(static_cast<char>(flag));
  write_file(path, bytes, "dataset");
}

Dataset load_dataset(const std::string& path) {
  ByteReader r(read_file(path, "dataset"), "dataset \"" + path + "\"");
  r.expect_magic(kDatasetMagic);
  r.expect_version(kDatasetVersion);
  const std::uint32_t n = r.take<std::uint32_t>("row count");
  const std::uint32_t f = r.take<std::uint32_t>("feature width");
  const std::uint32_t c = r.take<std::uint32_t>("class count");

  Dataset ds;
  ds.features = Tensor::zeros({n, f});
  for (std::size_t i = 0; i < std::size_t{n} * f; ++i)
    ds.features.data[i] = static_cast<double>(r.take_f32("features"));
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    ds.labels[i] = static_cast<int>(r.take<std::uint32_t>("labels"));
  ds.split.resize(c);
  for (std::size_t i = 0; i < c; ++i)
    ds.split[i] = r.take<std::uint8_t>("split flags");
  r.expect_consumed();
  validate_dataset(ds);
  return ds;
}

void export_csv(const std::string& path, const Dataset& ds) {
  validate_dataset(ds);
  std::string bytes;
  char num[64];
  for (std::size_t row = 0; row < ds.n_samples(); ++row) {
    for (std::size_t j = 0; j < ds.feature_dim(); ++j) {
      std::snprintf(num, sizeof(num), "%.17g", ds.features.at(row, j));
      bytes.append(num);
      bytes.push_back(',');
    }
    std::snprintf(num, sizeof(num), "%d,%u\n", ds.labels[row],
                  static_cast<unsigned>(ds.split[static_cast<std::size_t>(
                      ds.labels[row])]));
    bytes.append(num);
  }
  write_file(path, bytes, "csv");
}

Dataset import_csv(const std::string& path) {
  const std::string text = read_file(path, "csv");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::map<int, std::uint8_t> class_split;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;  // fields per row, fixed by the first row
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = fields.size();
      if (width < 3)
        throw IoError("csv: row 1 has " + std::to_string(width) +
                      " fields; need at least one feature, a label, and a "
                      "split flag");
    }
    if (fields.size() != width)
      throw IoError("csv: row " + std::to_string(line_no) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(width));

    std::vector<double> feats(width - 2);
    for (std::size_t j = 0; j + 2 < width; ++j) {
      std::size_t used = 0;
      try {
        feats[j] = std::stod(fields[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[j].size() || fields[j].empty())
        throw IoError("csv: row " + std::to_string(line_no) + ", field " +
                      std::to_string(j + 1) + ": \"" + fields[j] +
                      "\" is not a number");
    }
    int label = 0;
    unsigned long flag = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(fields[width - 2], &used);
      if (used != fields[width - 2].size()) throw std::invalid_argument("");
      flag = std::stoul(fields[width - 1], &used);
      if (used != fields[width - 1].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw IoError("csv: row " + std::to_string(line_no) +
                    ": malformed label or split flag");
    }
    if (label < 0)
      throw ConfigError("csv: row " + std::to_string(line_no) +
                        ": negative class id");
    if (flag > 1)
      throw ConfigError("csv: row " + std::to_string(line_no) +
                        ": split flag must be 0 or 1");
    const auto [it, inserted] =
        class_split.emplace(label, static_cast<std::uint8_t>(flag));
    if (!inserted && it->second != flag)
      throw ConfigError("csv: class " + std::to_string(label) +
                        " appears in both splits (row " +
                        std::to_string(line_no) + ")");
    rows.push_back(std::move(feats));
    labels.push_back(label);
  }
  if (rows.empty()) throw IoError("csv: no data rows");

  const int max_label = class_split.rbegin()->first;
  for (int c = 0; c <= max_label; ++c)
    if (!class_split.count(c))
      throw ConfigError("csv: class " + std::to_string(c) +
                        " has no rows, so its split is undefined");

  Dataset ds;
  ds.features = Tensor::zeros({rows.size(), width - 2});
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j + 2 < width; ++j)
      ds.features.at(r, j) = rows[r][j];
  ds.labels = std::move(labels);
  ds.split.resize(static_cast<std::size_t>(max_label) + 1);
  for (const auto& [c, flag] : class_split)
    ds.split[static_cast<std::size_t>(c)] = flag;
  validate_dataset(ds);
  return ds;
}

void save_checkpoint(const std::string& path, TrainerState& st,
                     const TrainConfig& cfg) {
  const std::vector<BlobRef> blobs = checkpoint_blobs(st);

  json manifest = json::array();
  for (const BlobRef& b : blobs)
    manifest.push_back(json{{"name", b.name}, {"shape", b.tensor->shape}});
  if (st.queue) {
    manifest.push_back(json{
        {"name", "queue.buffer"},
        {"shape", std::vector<std::size_t>{st.queue->capacity(),
                                           st.queue->dim()}}});
  }

  json header{{"config", to_json(cfg)},
              {"epochs_done", st.epochs_done},
              {"lr", st.lr},
              {"rng", st.rng.serialize()},
              {"adam_t", st.opt.t},
              {"queue", st.queue ? json{{"cursor", st.queue->cursor()},
                                        {"fill", st.queue->fill()}}
                                 : json(nullptr)},
              {"blobs", manifest}};
  const std::string header_text = header.dump();

  std::string bytes;
  bytes.append(kCheckpointMagic, 4);
  put_le(bytes, kCheckpointVersion);
  put_le(bytes, static_cast<std::uint64_t>(header_text.size()));
  bytes.append(header_text);
  for (const BlobRef& b : blobs)
    for (const double v : b.tensor->data) put_f64(bytes, v);
  if (st.queue)
    for (const double v : st.queue->storage().data) put_f64(bytes, v);
  write_file(path, bytes, "checkpoint");
}

Checkpoint load_checkpoint(const std::string& path) {
  ByteReader r(read_file(path, "checkpoint"), "checkpoint \"" + path + "\"");
  r.expect_magic(kCheckpointMagic);
  r.expect_version(kCheckpointVersion);
  const std::uint64_t header_len = r.take<std::uint64_t>("header length");
  const std::string header_text =
      r.take_bytes(static_cast<std::size_t>(header_len), "header");

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("checkpoint: header is not valid JSON: ") +
                  e.what());
  }
  for (const char* key :
       {"config", "epochs_done", "lr", "rng", "adam_t", "queue", "blobs"}) {
    if (!header.contains(key))
      throw CompatError(std::string("checkpoint: header lacks \"") + key +
                        "\"");
  }

  TrainConfig cfg = train_config_from_json(header.at("config"));
  Checkpoint out{cfg, TrainerState::init(cfg)};
  TrainerState& st = out.state;

  // The rebuilt trainer dictates what the file must contain.
  std::vector<BlobRef> blobs = checkpoint_blobs(st);
  std::vector<std::size_t> queue_shape;
  if (st.queue) queue_shape = {st.queue->capacity(), st.queue->dim()};

  const json& manifest = header.at("blobs");
  const std::size_t expected = blobs.size() + (st.queue ? 1 : 0);
  if (!manifest.is_array() || manifest.size() != expected)
    throw CompatError("checkpoint: manifest lists " +
                      std::to_string(manifest.size()) + " blobs, this model "
                      "needs " + std::to_string(expected));
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const json& m = manifest.at(i);
    const std::string name = m.at("name").get<std::string>();
    const auto shape = m.at("shape").get<std::vector<std::size_t>>();
    if (name != blobs[i].name || shape != blobs[i].tensor->shape) {
      std::ostringstream msg;
      msg << "checkpoint: blob " << i << " is \"" << name
          << "\", the rebuilt model expects \"" << blobs[i].name << "\"";
      if (name == blobs[i].name) msg << " with a different shape";
      throw CompatError(msg.str());
    }
  }
  if (st.queue) {
    const json& m = manifest.at(blobs.size());
    if (m.at("name").get<std::string>() != "queue.buffer" ||
        m.at("shape").get<std::vector<std::size_t>>() != queue_shape)
      throw CompatError("checkpoint: queue buffer does not match the "
                        "rebuilt queue's capacity or width");
  }

  for (BlobRef& b : blobs)
    for (double& v : b.tensor->data) v = r.take_f64(b.name.c_str());
  if (st.queue) {
    const json& q = header.at("queue");
    if (!q.is_object())
      throw CompatError("checkpoint: the config engages the negative queue "
                        "but the header stored none");
    Tensor buf = Tensor::zeros(queue_shape);
    for (double& v : buf.data) v = r.take_f64("queue.buffer");
    st.queue->restore(std::move(buf), q.at("cursor").get<std::size_t>(),
                      q.at("fill").get<std::size_t>());
  }
  r.expect_consumed();

  st.epochs_done = header.at("epochs_done").get<std::size_t>();
  st.lr = header.at("lr").get<double>();
  st.rng = Rng::deserialize(header.at("rng").get<std::string>());
  st.opt.t = header.at("adam_t").get<std::int64_t>();
  return out;
}

}  // namespace diva
