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

// Seeded synthetic corpora with planted structure.
//
// Each instance is a rows x cols grid of regions. A scene type is drawn
// uniformly; its bands fill the grid top to bottom (every band at least one
// row tall, remaining rows spread at random). Objects then replace cells of
// their host band: at most max_count of them, never 4-adjacent to another
// object, present with the given probability.
//
// Raw scores: non-true labels draw U(0, 0.6), the true label 1.5 + U(0, 0.5).
// With probability `noise` one random wrong label is raised above the true
// score by U(0.05, 0.3), so the true label is then the runner-up.
// scene_scores are one-hot over the scene types.

#ifndef RULESEG_BENCH_HPP_
#define RULESEG_BENCH_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ruleseg/io.hpp"
#include "ruleseg/model.hpp"

namespace ruleseg {

struct SceneScheme {
  std::string name;
  std::vector<std::string> bands;  // top to bottom
};

struct ObjectSpec {
  std::string label;
  std::string host;
  double probability = 0.5;
  int min_count = 1;
  int max_count = 1;
};

struct SynthConfig {
  std::size_t rows = 10;
  std::size_t cols = 10;
  std::int64_t cell = 16;  // px per grid cell side
  double noise = 0.3;
  std::uint64_t seed = 0;
  std::vector<std::string> labels;
  std::vector<SceneScheme> scenes;
  std::vector<ObjectSpec> objects;
};

/// Three scene types (coast, city, country) with sun, boat and car objects;
/// ten labels in total.
inline SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.labels = {"sky", "sea", "sand", "building", "road", "tree", "grass", "sun", "boat", "car"};
  cfg.scenes = {{"coast", {"sky", "sea", "sand"}}, {"city", {"sky", "building", "road"}},
                {"country", {"sky", "tree", "grass"}}};
  cfg.objects = {{"sun", "sky", 0.4, 1, 1}, {"boat", "sea", 0.8, 1, 1}, {"car", "road", 0.6, 1, 2}};
  return cfg;
}

/// Throws InputError when the scheme cannot generate valid instances.
inline void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.rows < 1 || cfg.cols < 1) throw InputError("synth config: grid must be at least 1 x 1");
  if (cfg.cell < 1) throw InputError("synth config: cell size must be positive");
  if (!(cfg.noise >= 0.0 && cfg.noise < 1.0)) throw InputError("synth config: noise must lie in [0, 1)");
  if (cfg.labels.size() < 2) throw InputError("synth config: need at least two labels");
  const LabelSet labels(cfg.labels);
  if (cfg.scenes.empty()) throw InputError("synth config: no scene types");
  std::vector<char> band_label(cfg.labels.size(), 0);
  for (const auto& s : cfg.scenes) {
    if (s.bands.empty()) throw InputError("synth config: scene '" + s.name + "' has no bands");
    if (s.bands.size() > cfg.rows)
      throw InputError("synth config: scene '" + s.name + "' has more bands than grid rows");
    for (const auto& b : s.bands) band_label[static_cast<std::size_t>(labels.id(b))] = 1;
  }
  for (const auto& o : cfg.objects) {
    const LabelId id = labels.id(o.label);
    if (!band_label[static_cast<std::size_t>(labels.id(o.host))])
      throw InputError("synth config: object host '" + o.host + "' is not a band of any scene");
    if (band_label[static_cast<std::size_t>(id)])
      throw InputError("synth config: object label '" + o.label + "' is also a band label");
    if (!(o.probability >= 0.0 && o.probability <= 1.0))
      throw InputError("synth config: object probability outside [0, 1]");
    if (o.min_count < 1 || o.max_count < o.min_count) throw InputError("synth config: bad object count range");
  }
}

namespace detail {

/// Uniform [0, 1) from the top 53 bits of a 64-bit draw.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_draw(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_draw(rng); }

/// Uniform integer in [lo, hi].
inline std::int64_t int_draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(unit_draw(rng) * static_cast<double>(span)) %
                                        span);
}

inline Sample generate_instance(const SynthConfig& cfg, const LabelSet& labels, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  const std::size_t R = cfg.rows, C = cfg.cols, n = R * C, l = labels.size();

  Sample sample;
  Instance& inst = sample.instance;
  char name[32];
  std::snprintf(name, sizeof name, "synth_%05zu", index);
  inst.name = name;

  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      Region reg;
      reg.id = static_cast<RegionId>(r * C + c);
      reg.bbox = {static_cast<std::int64_t>(c) * cfg.cell, static_cast<std::int64_t>(r) * cfg.cell, cfg.cell, cfg.cell};
      const double full = static_cast<double>(cfg.cell * cfg.cell);
      reg.area = std::max<std::int64_t>(1, static_cast<std::int64_t>(full * uniform_draw(rng, 0.5, 1.0)));
      if (r > 0) reg.neighbors.push_back(static_cast<RegionId>((r - 1) * C + c));
      if (c > 0) reg.neighbors.push_back(static_cast<RegionId>(r * C + c - 1));
      if (c + 1 < C) reg.neighbors.push_back(static_cast<RegionId>(r * C + c + 1));
      if (r + 1 < R) reg.neighbors.push_back(static_cast<RegionId>((r + 1) * C + c));
      inst.regions.push_back(std::move(reg));
    }
  }

  const auto scene = static_cast<std::size_t>(int_draw(rng, 0, static_cast<std::int64_t>(cfg.scenes.size()) - 1));
  const auto& bands = cfg.scenes[scene].bands;
  std::vector<std::size_t> height(bands.size(), 1);
  for (std::size_t extra = bands.size(); extra < R; ++extra)
    ++height[static_cast<std::size_t>(int_draw(rng, 0, static_cast<std::int64_t>(bands.size()) - 1))];

  std::vector<LabelId> truth(n);
  std::size_t row = 0;
  for (std::size_t b = 0; b < bands.size(); ++b)
    for (std::size_t k = 0; k < height[b]; ++k, ++row)
      for (std::size_t c = 0; c < C; ++c) truth[row * C + c] = labels.id(bands[b]);

  std::vector<char> is_object(n, 0);
  for (const auto& obj : cfg.objects) {
    const LabelId host = labels.id(obj.host);
    if (std::find(bands.begin(), bands.end(), obj.host) == bands.end()) continue;
    if (unit_draw(rng) >= obj.probability) continue;
    const auto count = int_draw(rng, obj.min_count, obj.max_count);
    for (std::int64_t k = 0; k < count; ++k) {
      std::vector<std::size_t> free_cells;
      for (std::size_t i = 0; i < n; ++i) {
        if (truth[i] != host || is_object[i]) continue;
        bool touches = false;
        for (RegionId nb : inst.regions[i].neighbors) touches = touches || is_object[static_cast<std::size_t>(nb)];
        if (!touches) free_cells.push_back(i);
      }
      if (free_cells.empty()) break;
      const auto cell = free_cells[static_cast<std::size_t>(
          int_draw(rng, 0, static_cast<std::int64_t>(free_cells.size()) - 1))];
      truth[cell] = labels.id(obj.label);
      is_object[cell] = 1;
    }
  }

  inst.raw_scores = Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < l; ++j) inst.raw_scores(ii, static_cast<Eigen::Index>(j)) = uniform_draw(rng, 0.0, 0.6);
    const double true_score = 1.5 + uniform_draw(rng, 0.0, 0.5);
    inst.raw_scores(ii, truth[i]) = true_score;
    if (unit_draw(rng) < cfg.noise) {
      auto wrong = static_cast<LabelId>(int_draw(rng, 0, static_cast<std::int64_t>(l) - 2));
      if (wrong >= truth[i]) ++wrong;
      inst.raw_scores(ii, wrong) = true_score + uniform_draw(rng, 0.05, 0.3);
    }
  }
  std::vector<double> scene_scores(cfg.scenes.size(), 0.0);
  scene_scores[scene] = 1.0;
  inst.scene_scores = std::move(scene_scores);
  sample.truth = GroundTruth{std::move(truth)};
  return sample;
}

}  // namespace detail

/// Generates `count` instances. Instance k depends only on (seed, k), so the
/// result does not depend on `threads`.
inline Corpus generate_corpus(const SynthConfig& cfg, std::size_t count, unsigned threads = 1) {
  if (count < 1) throw InputError("generate_corpus: count must be >= 1");
  validate_synth_config(cfg);
  Corpus corpus;
  corpus.labels = LabelSet(cfg.labels);
  for (const auto& s : cfg.scenes) corpus.scene_categories.push_back(s.name);
  corpus.samples.resize(count);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(count, 1024))));
  auto work = [&](unsigned t) {
    for (std::size_t k = t; k < count; k += threads)
      corpus.samples[k] = detail::generate_instance(cfg, corpus.labels, k);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Config file:
//   {"grid": [rows, cols], "cell": 16, "noise": 0.3, "seed": 0,
//    "labels": [...],
//    "label_scheme": {"scenes": [{"name": ..., "bands": [...]}],
//                     "objects": [{"label", "host", "probability",
//                                  "min_count", "max_count"}]}}
// Missing fields take the default_synth_config() values.

inline SynthConfig synth_config_from_json(const Json& j, const std::string& where = "synth config") {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  SynthConfig cfg = default_synth_config();
  if (j.contains("grid")) {
    const auto grid = detail::get_field<std::vector<std::size_t>>(j, "grid", where);
    if (grid.size() != 2) throw InputError(where + ": grid must be [rows, cols]");
    cfg.rows = grid[0];
    cfg.cols = grid[1];
  }
  if (j.contains("cell")) cfg.cell = detail::get_field<std::int64_t>(j, "cell", where);
  if (j.contains("noise")) cfg.noise = detail::get_field<double>(j, "noise", where);
  if (j.contains("seed")) cfg.seed = detail::get_field<std::uint64_t>(j, "seed", where);
  if (j.contains("labels")) cfg.labels = detail::get_field<std::vector<std::string>>(j, "labels", where);
  if (j.contains("label_scheme")) {
    const auto& scheme = j.at("label_scheme");
    if (scheme.contains("scenes")) {
      cfg.scenes.clear();
      for (const auto& s : scheme.at("scenes"))
        cfg.scenes.push_back({detail::get_field<std::string>(s, "name", where),
                              detail::get_field<std::vector<std::string>>(s, "bands", where)});
    }
    if (scheme.contains("objects")) {
      cfg.objects.clear();
      for (const auto& o : scheme.at("objects")) {
        ObjectSpec spec;
        spec.label = detail::get_field<std::string>(o, "label", where);
        spec.host = detail::get_field<std::string>(o, "host", where);
        if (o.contains("probability")) spec.probability = detail::get_field<double>(o, "probability", where);
        if (o.contains("min_count")) spec.min_count = detail::get_field<int>(o, "min_count", where);
        if (o.contains("max_count")) spec.max_count = detail::get_field<int>(o, "max_count", where);
        cfg.objects.push_back(spec);
      }
    }
  }
  validate_synth_config(cfg);
  return cfg;
}

inline Json synth_config_to_json(const SynthConfig& cfg) {
  Json j = Json::object();
  j["grid"] = {cfg.rows, cfg.cols};
  j["cell"] = cfg.cell;
  j["noise"] = cfg.noise;
  j["seed"] = cfg.seed;
  j["labels"] = cfg.labels;
  Json scenes = Json::array(), objects = Json::array();
  for (const auto& s : cfg.scenes) scenes.push_back({{"name", s.name}, {"bands", s.bands}});
  for (const auto& o : cfg.objects)
    objects.push_back({{"label", o.label},
                       {"host", o.host},
                       {"probability", o.probability},
                       {"min_count", o.min_count},
                       {"max_count", o.max_count}});
  j["label_scheme"] = {{"scenes", scenes}, {"objects", objects}};
  return j;
}

}  // namespace ruleseg

#endif  // RULESEG_BENCH_HPP_
