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

// Core domain types: label sets, regions (super-pixels), scene instances,
// ground truth and corpora.

#ifndef RULESEG_MODEL_HPP_
#define RULESEG_MODEL_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ruleseg/error.hpp"

namespace ruleseg {

using LabelId = int;
using RegionId = int;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered list of distinct label names; the index of a name is its label id.
class LabelSet {
 public:
  LabelSet() = default;

  explicit LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty()) throw InputError("label names must be non-empty");
      if (!index_.emplace(names_[i], static_cast<LabelId>(i)).second)
        throw InputError("duplicate label name '" + names_[i] + "'");
    }
  }

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(LabelId id) const { return names_.at(static_cast<std::size_t>(id)); }

  std::optional<LabelId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  LabelId id(const std::string& name) const {
    auto found = find(name);
    if (!found) throw InputError("unknown label '" + name + "'");
    return *found;
  }

  bool operator==(const LabelSet& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> index_;
};

/// Axis-aligned bounding box in pixels; y grows downward.
struct BBox {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t w = 0;
  std::int64_t h = 0;

  std::int64_t right() const { return x + w; }
  std::int64_t bottom() const { return y + h; }
  bool operator==(const BBox&) const = default;
};

struct Region {
  RegionId id = 0;
  BBox bbox;
  std::int64_t area = 0;
  std::vector<RegionId> neighbors;
};

/// One scene: its regions, an n x l matrix of raw classifier scores and
/// optional image-level scene-category confidences.
struct Instance {
  std::string name;
  std::vector<Region> regions;
  Matrix raw_scores;
  std::optional<std::vector<double>> scene_scores;

  std::size_t size() const { return regions.size(); }
};

struct GroundTruth {
  std::vector<LabelId> labels;
};

/// One label per region plus the objective value that produced it.
struct Assignment {
  std::vector<LabelId> labels;
  double objective = 0.0;
};

struct Sample {
  Instance instance;
  std::optional<GroundTruth> truth;
};

/// A set of instances sharing one label set (and scene taxonomy, if any).
struct Corpus {
  LabelSet labels;
  std::vector<std::string> scene_categories;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

/// Lists every violated structural invariant of an instance. An empty report
/// means the instance is well formed with respect to `labels`.
inline ValidationReport validate_instance(const Instance& instance, const LabelSet& labels,
                                          const GroundTruth* truth = nullptr) {
  ValidationReport report;
  auto issue = [&](std::string msg) { report.issues.push_back(std::move(msg)); };
  const auto n = instance.regions.size();

  if (static_cast<std::size_t>(instance.raw_scores.rows()) != n)
    issue("row count mismatch: " + std::to_string(instance.raw_scores.rows()) +
          " score rows for " + std::to_string(n) + " regions");
  if (static_cast<std::size_t>(instance.raw_scores.cols()) != labels.size())
    issue("column count mismatch: " + std::to_string(instance.raw_scores.cols()) +
          " score columns for " + std::to_string(labels.size()) + " labels");
  if (!instance.raw_scores.allFinite()) issue("non-finite raw score");

  for (std::size_t i = 0; i < n; ++i) {
    const Region& r = instance.regions[i];
    const std::string where = "region " + std::to_string(i);
    if (r.id != static_cast<RegionId>(i)) issue(where + ": id " + std::to_string(r.id) + " does not match position");
    if (r.area <= 0) issue(where + ": non-positive area");
    if (r.bbox.w <= 0 || r.bbox.h <= 0) issue(where + ": non-positive bbox extent");
    std::set<RegionId> seen;
    for (RegionId nb : r.neighbors) {
      if (nb < 0 || static_cast<std::size_t>(nb) >= n) {
        issue(where + ": neighbor " + std::to_string(nb) + " out of range");
        continue;
      }
      if (nb == r.id) issue(where + ": self adjacency");
      if (!seen.insert(nb).second) issue(where + ": duplicate neighbor " + std::to_string(nb));
      const auto& back = instance.regions[static_cast<std::size_t>(nb)].neighbors;
      if (std::find(back.begin(), back.end(), static_cast<RegionId>(i)) == back.end())
        issue("asymmetric adjacency: " + std::to_string(i) + " -> " + std::to_string(nb));
    }
  }

  if (instance.scene_scores) {
    for (double s : *instance.scene_scores)
      if (!(s >= 0.0 && s <= 1.0)) {
        issue("scene score outside [0,1]");
        break;
      }
  }

  if (truth) {
    if (truth->labels.size() != n) issue("ground truth length mismatch");
    for (LabelId l : truth->labels)
      if (l < 0 || static_cast<std::size_t>(l) >= labels.size()) {
        issue("ground truth label out of range");
        break;
      }
  }
  return report;
}

/// Number of ground-truth regions carrying each label across the corpus.
inline std::vector<std::size_t> label_counts(const Corpus& corpus) {
  if (corpus.empty()) throw InputError("label_counts: empty corpus");
  std::vector<std::size_t> counts(corpus.labels.size(), 0);
  for (const auto& sample : corpus.samples) {
    if (!sample.truth) throw InputError("label_counts: instance '" + sample.instance.name + "' has no ground truth");
    for (LabelId l : sample.truth->labels) ++counts.at(static_cast<std::size_t>(l));
  }
  return counts;
}

/// Labels present in a labeling, as a flag per label id.
inline std::vector<char> present_labels(const std::vector<LabelId>& labeling, std::size_t num_labels) {
  std::vector<char> present(num_labels, 0);
  for (LabelId l : labeling) present[static_cast<std::size_t>(l)] = 1;
  return present;
}

}  // namespace ruleseg

#endif  // RULESEG_MODEL_HPP_
