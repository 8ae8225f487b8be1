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

// Typed label-pair rules and their mining from annotated corpora.
//
// Relation semantics per ordered label pair (a, b) and instance:
//
//   kind             opportunity                       holds
//   non_coexistence  a or b present                    not both present
//   geometric_above  an a/b region pair is vertically  no b region lies strictly
//                    separated (either direction)      above an a region
//   presence         a present                         b present
//   cooccurrence     a or b present                    both present
//   adjacency        a present                         every a region has a b neighbor

#ifndef RULESEG_RULES_HPP_
#define RULESEG_RULES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ruleseg/model.hpp"

namespace ruleseg {

enum class RelationKind : int { NonCoexistence = 0, GeometricAbove, Presence, Cooccurrence, Adjacency };

inline constexpr std::size_t kNumRelationKinds = 5;

inline constexpr std::array<RelationKind, kNumRelationKinds> kAllRelationKinds = {
    RelationKind::NonCoexistence, RelationKind::GeometricAbove, RelationKind::Presence, RelationKind::Cooccurrence,
    RelationKind::Adjacency};

inline std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::NonCoexistence: return "non_coexistence";
    case RelationKind::GeometricAbove: return "geometric_above";
    case RelationKind::Presence: return "presence";
    case RelationKind::Cooccurrence: return "cooccurrence";
    case RelationKind::Adjacency: return "adjacency";
  }
  return "unknown";
}

inline RelationKind relation_kind_from_string(std::string_view name) {
  for (auto kind : kAllRelationKinds)
    if (to_string(kind) == name) return kind;
  throw InputError("unknown rule kind '" + std::string(name) + "'");
}

/// Symmetric kinds are mined once per unordered pair (a < b).
inline bool is_symmetric(RelationKind kind) {
  return kind == RelationKind::NonCoexistence || kind == RelationKind::Cooccurrence;
}

struct Rule {
  RelationKind kind = RelationKind::NonCoexistence;
  LabelId a = 0;
  LabelId b = 0;
  bool hard = true;
  double penalty = 0.0;  // soft rules only
  std::int64_t support = 0;
  std::int64_t violations = 0;

  bool operator==(const Rule&) const = default;
};

/// Throws InputError when a rule is malformed for a label set of size `num_labels`.
inline void validate_rule(const Rule& rule, std::size_t num_labels) {
  const auto in_range = [&](LabelId x) { return x >= 0 && static_cast<std::size_t>(x) < num_labels; };
  if (!in_range(rule.a) || !in_range(rule.b)) throw InputError("rule references an unknown label id");
  if (rule.a == rule.b) throw InputError("rule relates a label to itself");
  if (!rule.hard && !(rule.penalty > 0.0 && std::isfinite(rule.penalty)))
    throw InputError("soft rule needs a finite positive penalty");
}

/// True iff `upper` lies entirely above `lower` (its bottom edge at or above
/// the other's top edge, y growing downward) and their horizontal extents
/// overlap by at least one pixel.
inline bool strictly_above(const Region& upper, const Region& lower) {
  if (upper.bbox.bottom() > lower.bbox.y) return false;
  const auto overlap = std::min(upper.bbox.right(), lower.bbox.right()) - std::max(upper.bbox.x, lower.bbox.x);
  return overlap >= 1;
}

/// Soft-violation penalty -log(P(violated) / P(satisfied)) with add-one
/// smoothing. Returns nullopt when the rule would not be worth a positive
/// penalty (violations >= satisfactions).
inline std::optional<double> compute_penalty(std::int64_t violations, std::int64_t satisfactions) {
  if (violations < 0 || satisfactions < 0) throw InputError("compute_penalty: negative count");
  if (violations >= satisfactions) return std::nullopt;
  return -std::log(static_cast<double>(violations + 1) / static_cast<double>(satisfactions + 1));
}

/// l x l x r tallies of how often each relation held, and how often it could
/// have been observed, over a corpus.
class RelationCube {
 public:
  RelationCube() = default;
  explicit RelationCube(std::size_t num_labels)
      : l_(num_labels),
        counts_(kNumRelationKinds * num_labels * num_labels, 0),
        opportunity_(kNumRelationKinds * num_labels * num_labels, 0) {}

  std::size_t num_labels() const { return l_; }

  std::int64_t count(RelationKind k, LabelId a, LabelId b) const { return counts_[index(k, a, b)]; }
  std::int64_t opportunity(RelationKind k, LabelId a, LabelId b) const { return opportunity_[index(k, a, b)]; }

  /// Records one observation opportunity; `held` says whether the relation held.
  void observe(RelationKind k, LabelId a, LabelId b, bool held) {
    const auto i = index(k, a, b);
    ++opportunity_[i];
    if (held) ++counts_[i];
  }

  RelationCube& operator+=(const RelationCube& other) {
    if (other.l_ != l_) throw InputError("RelationCube: merging cubes of different label counts");
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      counts_[i] += other.counts_[i];
      opportunity_[i] += other.opportunity_[i];
    }
    return *this;
  }

  friend RelationCube operator+(RelationCube lhs, const RelationCube& rhs) { return lhs += rhs; }
  bool operator==(const RelationCube&) const = default;

 private:
  std::size_t index(RelationKind k, LabelId a, LabelId b) const {
    return (static_cast<std::size_t>(k) * l_ + static_cast<std::size_t>(a)) * l_ + static_cast<std::size_t>(b);
  }

  std::size_t l_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> opportunity_;
};

/// Adds one labeled instance's relation observations to `cube`.
inline void accumulate_relations(RelationCube& cube, const Instance& instance, const std::vector<LabelId>& labeling) {
  const std::size_t l = cube.num_labels();
  const std::size_t n = instance.regions.size();
  if (labeling.size() != n) throw InputError("accumulate_relations: ground truth length mismatch");

  const auto present = present_labels(labeling, l);
  // above[u][v]: some u-labeled region lies strictly above some v-labeled region.
  std::vector<char> above(l * l, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && strictly_above(instance.regions[i], instance.regions[j]))
        above[static_cast<std::size_t>(labeling[i]) * l + static_cast<std::size_t>(labeling[j])] = 1;
  // has_neighbor[i * l + b]: region i borders a b-labeled region.
  std::vector<char> has_neighbor(n * l, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (RegionId nb : instance.regions[i].neighbors)
      has_neighbor[i * l + static_cast<std::size_t>(labeling[static_cast<std::size_t>(nb)])] = 1;

  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = 0; b < l; ++b) {
      if (a == b) continue;
      const auto la = static_cast<LabelId>(a), lb = static_cast<LabelId>(b);
      const bool pa = present[a], pb = present[b];
      if (pa || pb) {
        cube.observe(RelationKind::NonCoexistence, la, lb, !(pa && pb));
        cube.observe(RelationKind::Cooccurrence, la, lb, pa && pb);
      }
      const bool a_over_b = above[a * l + b], b_over_a = above[b * l + a];
      if (a_over_b || b_over_a) cube.observe(RelationKind::GeometricAbove, la, lb, !b_over_a);
      if (pa) {
        cube.observe(RelationKind::Presence, la, lb, pb);
        bool every = true;
        for (std::size_t i = 0; i < n && every; ++i)
          if (static_cast<std::size_t>(labeling[i]) == a && !has_neighbor[i * l + b]) every = false;
        cube.observe(RelationKind::Adjacency, la, lb, every);
      }
    }
  }
}

/// Relation cube of a ground-truth-labeled corpus. With threads > 1 the
/// corpus is split into contiguous chunks whose partial cubes are summed.
inline RelationCube build_relation_cube(const Corpus& corpus, unsigned threads = 1) {
  const std::size_t l = corpus.labels.size();
  for (const auto& s : corpus.samples)
    if (!s.truth) throw InputError("build_relation_cube: instance '" + s.instance.name + "' has no ground truth");

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, corpus.size()))));
  std::vector<RelationCube> partial(threads, RelationCube(l));
  auto work = [&](unsigned t) {
    const std::size_t begin = corpus.size() * t / threads, end = corpus.size() * (t + 1) / threads;
    for (std::size_t s = begin; s < end; ++s)
      accumulate_relations(partial[t], corpus.samples[s].instance, corpus.samples[s].truth->labels);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  RelationCube total(l);
  for (const auto& p : partial) total += p;
  return total;
}

struct MiningParams {
  std::int64_t min_support = 5;
  double soft_ratio = 0.8;
};

/// Hard rule when the relation held in every one of at least `min_support`
/// opportunities; soft rule when it held in at least `soft_ratio` of them.
inline std::vector<Rule> extract_rules(const RelationCube& cube, const MiningParams& params = {}) {
  if (params.min_support < 1) throw InputError("extract_rules: min_support must be >= 1");
  if (!(params.soft_ratio > 0.0 && params.soft_ratio <= 1.0))
    throw InputError("extract_rules: soft_ratio must lie in (0, 1]");

  std::vector<Rule> rules;
  const auto l = static_cast<LabelId>(cube.num_labels());
  for (auto kind : kAllRelationKinds) {
    for (LabelId a = 0; a < l; ++a) {
      for (LabelId b = 0; b < l; ++b) {
        if (a == b || (is_symmetric(kind) && b < a)) continue;
        const auto opp = cube.opportunity(kind, a, b);
        if (opp < params.min_support) continue;
        const auto held = cube.count(kind, a, b);
        Rule rule{kind, a, b, true, 0.0, held, opp - held};
        if (held == opp) {
          rules.push_back(rule);
        } else if (static_cast<double>(held) >= params.soft_ratio * static_cast<double>(opp)) {
          auto penalty = compute_penalty(opp - held, held);
          if (!penalty) continue;
          rule.hard = false;
          rule.penalty = *penalty;
          rules.push_back(rule);
        }
      }
    }
  }
  return rules;
}

inline std::vector<Rule> mine_rules(const Corpus& corpus, const MiningParams& params = {}, unsigned threads = 1) {
  if (corpus.empty()) throw InputError("mine_rules: empty corpus");
  return extract_rules(build_relation_cube(corpus, threads), params);
}

}  // namespace ruleseg

#endif  // RULESEG_RULES_HPP_
