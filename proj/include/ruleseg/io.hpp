// Copyright 2026 The ruleseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON codecs for instances, corpora, rule files and association models.
// Files name labels; ids are assigned once at load from the label list.
//
// Canonical instance form (what instance_to_json emits, two-space indent,
// trailing newline):
//   {"name", "labels", "scene_categories"?, "regions", "raw_scores",
//    "scene_scores"?, "ground_truth"?}

#ifndef RULESEG_IO_HPP_
#define RULESEG_IO_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruleseg/context.hpp"
#include "ruleseg/model.hpp"
#include "ruleseg/rules.hpp"

namespace ruleseg {

using Json = nlohmann::ordered_json;

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

namespace detail {

template <typename T>
T get_field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + ": field '" + key + "' has the wrong type");
  }
}

inline Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError(where + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InputError(where + ": non-numeric matrix entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

inline Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline LabelId label_ref(const Json& v, const LabelSet& labels, const std::string& where) {
  if (v.is_string()) {
    auto id = labels.find(v.get<std::string>());
    if (!id) throw InputError(where + ": unknown label '" + v.get<std::string>() + "'");
    return *id;
  }
  if (v.is_number_integer()) {
    const auto id = v.get<std::int64_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= labels.size()) throw InputError(where + ": label id out of range");
    return static_cast<LabelId>(id);
  }
  throw InputError(where + ": label must be a name or an id");
}

}  // namespace detail

/// One parsed instance file together with its label set.
struct ParsedInstance {
  LabelSet labels;
  std::vector<std::string> scene_categories;
  Sample sample;
};

/// Parses one instance object. `fallback_labels` applies when the object has
/// no "labels" field (instances inside a corpus file may share one list).
inline ParsedInstance instance_from_json(const Json& j, const std::string& where,
                                         const std::optional<LabelSet>& fallback_labels = std::nullopt,
                                         const std::vector<std::string>& fallback_scenes = {}) {
  if (!j.is_object()) throw InputError(where + ": instance must be a JSON object");
  ParsedInstance out;
  if (j.contains("labels")) {
    try {
      out.labels = LabelSet(detail::get_field<std::vector<std::string>>(j, "labels", where));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  } else if (fallback_labels) {
    out.labels = *fallback_labels;
  } else {
    throw InputError(where + ": missing field 'labels'");
  }
  out.scene_categories = j.contains("scene_categories")
                             ? detail::get_field<std::vector<std::string>>(j, "scene_categories", where)
                             : fallback_scenes;

  Instance& inst = out.sample.instance;
  inst.name = j.contains("name") ? detail::get_field<std::string>(j, "name", where) : std::string();
  const Json regions = j.contains("regions") ? j.at("regions") : Json();
  if (!regions.is_array()) throw InputError(where + ": 'regions' must be an array");
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto& r = regions[k];
    const std::string rw = where + ": region " + std::to_string(k);
    Region reg;
    reg.id = detail::get_field<RegionId>(r, "id", rw);
    const auto bbox = detail::get_field<std::vector<std::int64_t>>(r, "bbox", rw);
    if (bbox.size() != 4) throw InputError(rw + ": bbox must have 4 entries");
    reg.bbox = {bbox[0], bbox[1], bbox[2], bbox[3]};
    reg.area = detail::get_field<std::int64_t>(r, "area", rw);
    reg.neighbors = r.contains("neighbors") ? detail::get_field<std::vector<RegionId>>(r, "neighbors", rw)
                                            : std::vector<RegionId>{};
    inst.regions.push_back(std::move(reg));
  }
  if (!j.contains("raw_scores")) throw InputError(where + ": missing field 'raw_scores'");
  inst.raw_scores = detail::matrix_from_json(j.at("raw_scores"), where + ": raw_scores");
  if (inst.regions.empty()) inst.raw_scores.resize(0, static_cast<Eigen::Index>(out.labels.size()));
  if (j.contains("scene_scores") && !j.at("scene_scores").is_null())
    inst.scene_scores = detail::get_field<std::vector<double>>(j, "scene_scores", where);
  if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
    const auto& gt = j.at("ground_truth");
    if (!gt.is_array()) throw InputError(where + ": 'ground_truth' must be an array");
    GroundTruth truth;
    for (const auto& v : gt) truth.labels.push_back(detail::label_ref(v, out.labels, where + ": ground_truth"));
    out.sample.truth = std::move(truth);
  }

  const auto report = validate_instance(inst, out.labels, out.sample.truth ? &*out.sample.truth : nullptr);
  if (!report.ok()) throw InputError(where + ": " + report.issues.front());
  if (inst.scene_scores && !out.scene_categories.empty() && inst.scene_scores->size() != out.scene_categories.size())
    throw InputError(where + ": scene_scores length does not match scene_categories");
  return out;
}

inline Json instance_to_json(const Sample& sample, const LabelSet& labels,
                             const std::vector<std::string>& scene_categories = {}) {
  const Instance& inst = sample.instance;
  Json j = Json::object();
  j["name"] = inst.name;
  j["labels"] = labels.names();
  if (!scene_categories.empty()) j["scene_categories"] = scene_categories;
  Json regions = Json::array();
  for (const auto& r : inst.regions) {
    Json rj = Json::object();
    rj["id"] = r.id;
    rj["bbox"] = {r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h};
    rj["area"] = r.area;
    rj["neighbors"] = r.neighbors;
    regions.push_back(std::move(rj));
  }
  j["regions"] = std::move(regions);
  j["raw_scores"] = detail::matrix_to_json(inst.raw_scores);
  if (inst.scene_scores) j["scene_scores"] = *inst.scene_scores;
  if (sample.truth) {
    Json gt = Json::array();
    for (LabelId id : sample.truth->labels) gt.push_back(labels.name(id));
    j["ground_truth"] = std::move(gt);
  }
  return j;
}

/// Canonical text of one instance file.
inline std::string serialize_instance(const Sample& sample, const LabelSet& labels,
                                      const std::vector<std::string>& scene_categories = {}) {
  return dump_json(instance_to_json(sample, labels, scene_categories));
}

inline ParsedInstance parse_instance(const std::string& text, const std::string& where = "instance") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(where + ": malformed JSON: " + e.what());
  }
  return instance_from_json(j, where);
}

namespace detail {

inline void add_to_corpus(Corpus& corpus, ParsedInstance parsed, const std::string& where, bool first) {
  if (first) {
    corpus.labels = parsed.labels;
    corpus.scene_categories = parsed.scene_categories;
  } else {
    if (!(parsed.labels == corpus.labels)) throw InputError(where + ": label list differs from the rest of the corpus");
    if (parsed.scene_categories != corpus.scene_categories)
      throw InputError(where + ": scene categories differ from the rest of the corpus");
  }
  corpus.samples.push_back(std::move(parsed.sample));
}

}  // namespace detail

/// Loads a corpus from a directory of instance files (sorted by file name;
/// an instance without a name takes its file stem) or from one file that is
/// either a single instance or an object with an "instances" array.
inline Corpus load_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  Corpus corpus;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto parsed = instance_from_json(read_json_file(f), f.string());
      if (parsed.sample.instance.name.empty()) parsed.sample.instance.name = f.stem().string();
      detail::add_to_corpus(corpus, std::move(parsed), f.string(), corpus.empty());
    }
  } else if (fs::is_regular_file(path)) {
    const Json j = read_json_file(path);
    if (j.is_object() && j.contains("instances")) {
      std::optional<LabelSet> shared;
      if (j.contains("labels")) shared = LabelSet(detail::get_field<std::vector<std::string>>(j, "labels", path.string()));
      const auto scenes = j.contains("scene_categories")
                              ? detail::get_field<std::vector<std::string>>(j, "scene_categories", path.string())
                              : std::vector<std::string>{};
      const auto& arr = j.at("instances");
      if (!arr.is_array()) throw InputError(path.string() + ": 'instances' must be an array");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string where = path.string() + "[" + std::to_string(k) + "]";
        auto parsed = instance_from_json(arr[k], where, shared, scenes);
        if (parsed.sample.instance.name.empty()) parsed.sample.instance.name = "instance_" + std::to_string(k);
        detail::add_to_corpus(corpus, std::move(parsed), where, corpus.empty());
      }
    } else {
      auto parsed = instance_from_json(j, path.string());
      if (parsed.sample.instance.name.empty()) parsed.sample.instance.name = path.stem().string();
      detail::add_to_corpus(corpus, std::move(parsed), path.string(), true);
    }
  } else {
    throw InputError("no such corpus: '" + path.string() + "'");
  }
  if (corpus.empty()) throw InputError("corpus '" + path.string() + "' contains no instances");
  return corpus;
}

/// Writes one canonical file per instance, named after the instance.
inline void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& s : corpus.samples)
    write_text_file(dir / (s.instance.name + ".json"), serialize_instance(s, corpus.labels, corpus.scene_categories));
}

// ---------------------------------------------------------------------------
// Rules.

inline Json rules_to_json(const std::vector<Rule>& rules, const LabelSet& labels) {
  Json out = Json::array();
  for (const auto& r : rules) {
    Json j = Json::object();
    j["kind"] = std::string(to_string(r.kind));
    j["a"] = labels.name(r.a);
    j["b"] = labels.name(r.b);
    j["hard"] = r.hard;
    j["penalty"] = r.hard ? Json(nullptr) : Json(r.penalty);
    j["support"] = r.support;
    j["violations"] = r.violations;
    out.push_back(std::move(j));
  }
  return out;
}

/// Parses a rules file. Support and violation counts are optional, so rules
/// can be written by hand.
inline std::vector<Rule> rules_from_json(const Json& j, const LabelSet& labels, const std::string& where = "rules") {
  if (!j.is_array()) throw InputError(where + ": expected an array of rules");
  std::vector<Rule> rules;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& rj = j[k];
    const std::string rw = where + "[" + std::to_string(k) + "]";
    if (!rj.is_object()) throw InputError(rw + ": rule must be an object");
    Rule r;
    r.kind = relation_kind_from_string(detail::get_field<std::string>(rj, "kind", rw));
    if (!rj.contains("a") || !rj.contains("b")) throw InputError(rw + ": missing label");
    r.a = detail::label_ref(rj.at("a"), labels, rw);
    r.b = detail::label_ref(rj.at("b"), labels, rw);
    r.hard = detail::get_field<bool>(rj, "hard", rw);
    if (!r.hard) r.penalty = detail::get_field<double>(rj, "penalty", rw);
    if (rj.contains("support")) r.support = detail::get_field<std::int64_t>(rj, "support", rw);
    if (rj.contains("violations")) r.violations = detail::get_field<std::int64_t>(rj, "violations", rw);
    try {
      validate_rule(r, labels.size());
    } catch (const InputError& e) {
      throw InputError(rw + ": " + e.what());
    }
    rules.push_back(r);
  }
  return rules;
}

inline std::vector<Rule> load_rules(const std::filesystem::path& path, const LabelSet& labels) {
  return rules_from_json(read_json_file(path), labels, path.string());
}

// ---------------------------------------------------------------------------
// Association model.

inline Json model_to_json(const AssociationModel& m) {
  Json j = Json::object();
  j["lambda"] = m.lambda;
  j["scene_categories"] = m.scene_categories;
  j["labels"] = m.labels;
  j["W"] = detail::matrix_to_json(m.W);
  return j;
}

inline AssociationModel model_from_json(const Json& j, const std::string& where = "model") {
  AssociationModel m;
  m.lambda = detail::get_field<double>(j, "lambda", where);
  m.scene_categories = detail::get_field<std::vector<std::string>>(j, "scene_categories", where);
  m.labels = detail::get_field<std::vector<std::string>>(j, "labels", where);
  if (!j.contains("W")) throw InputError(where + ": missing field 'W'");
  m.W = detail::matrix_from_json(j.at("W"), where + ": W");
  if (m.W.rows() == 0 && !m.labels.empty()) m.W.resize(static_cast<Eigen::Index>(m.labels.size()), 0);
  if (static_cast<std::size_t>(m.W.rows()) != m.labels.size() ||
      static_cast<std::size_t>(m.W.cols()) != m.scene_categories.size())
    throw InputError(where + ": W must be labels x scene_categories");
  if ((m.W.array() < 0.0).any() || !m.W.allFinite()) throw InputError(where + ": W must be finite and non-negative");
  return m;
}

inline AssociationModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path), path.string());
}

}  // namespace ruleseg

#endif  // RULESEG_IO_HPP_
