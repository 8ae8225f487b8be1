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

// Subcommand implementations behind the ruleseg command-line tool. Each
// returns the process exit code: 0 success, 1 internal error, 2 bad input.
//
// A JSON config file may set any option:
//   {"seed": 0, "threads": 1, "deterministic": false, "verbose": false,
//    "scoring": {"a", "b", "beta", "prune_eps", "rescale", "area_weighting"},
//    "solver": {"time_limit_ms", "gap_tol", "node_limit"},
//    "mining": {"min_support", "soft_ratio"},
//    "context": {"lambda"}}
// Command-line flags override it.

#ifndef RULESEG_COMMANDS_HPP_
#define RULESEG_COMMANDS_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ruleseg/bench.hpp"
#include "ruleseg/context.hpp"
#include "ruleseg/io.hpp"
#include "ruleseg/pipeline.hpp"
#include "ruleseg/rules.hpp"

namespace ruleseg {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitBadInput = 2 };

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;  // 0 = hardware concurrency
  bool deterministic = false;
  bool verbose = false;
  std::optional<std::string> dump_lp;  // directory
  std::optional<std::string> config;   // JSON config file
};

struct MineArgs {
  std::string corpus;
  std::string out;
  std::optional<std::int64_t> min_support;
  std::optional<double> soft_ratio;
  CommonOptions common;
};

struct LearnContextArgs {
  std::string corpus;
  std::string out;
  std::optional<double> lambda;
  CommonOptions common;
};

struct InferArgs {
  std::string corpus;
  std::string out_dir;
  std::optional<std::string> rules;
  std::optional<std::string> model;
  std::optional<double> a, b, beta, prune_eps;
  bool no_rescale = false;
  bool no_area_weight = false;
  std::optional<std::string> tune_on;
  std::optional<std::int64_t> time_limit_ms;
  std::optional<std::int64_t> node_limit;
  CommonOptions common;
};

struct EvalArgs {
  std::string predictions;
  std::string corpus;
  std::optional<std::string> out;
  CommonOptions common;
};

struct GenArgs {
  std::optional<std::string> synth_config;
  std::size_t count = 1;
  std::string out;
  std::optional<double> noise;
  CommonOptions common;
};

/// Effective settings after merging the config file and the flags.
struct Settings {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool deterministic = false;
  bool verbose = false;
  ScoringParams scoring;
  SolverConfig solver;
  MiningParams mining;
  double lambda = -1.0;  // negative: default_lambda

  Json to_json() const {
    Json j = Json::object();
    j["seed"] = seed;
    j["deterministic"] = deterministic;
    j["scoring"] = {{"a", scoring.sigmoid.a},
                    {"b", scoring.sigmoid.b},
                    {"beta", scoring.beta},
                    {"prune_eps", scoring.prune_eps},
                    {"rescale", scoring.rescale},
                    {"area_weighting", scoring.area_weighting}};
    j["solver"] = {{"time_limit_ms", solver.time_limit_ms},
                   {"gap_tol", solver.gap_tol},
                   {"node_limit", solver.node_limit}};
    j["mining"] = {{"min_support", mining.min_support}, {"soft_ratio", mining.soft_ratio}};
    j["context"] = {{"lambda", lambda}};
    return j;
  }
};

namespace detail {

template <typename T>
void read_opt(const Json& j, const char* key, T& target, const std::string& where) {
  if (j.is_object() && j.contains(key)) target = get_field<T>(j, key, where);
}

inline Settings load_settings(const CommonOptions& common) {
  Settings s;
  if (common.config) {
    const Json j = read_json_file(*common.config);
    const std::string& w = *common.config;
    if (!j.is_object()) throw InputError(w + ": config must be a JSON object");
    read_opt(j, "seed", s.seed, w);
    read_opt(j, "threads", s.threads, w);
    read_opt(j, "deterministic", s.deterministic, w);
    read_opt(j, "verbose", s.verbose, w);
    if (j.contains("scoring")) {
      const auto& sc = j.at("scoring");
      read_opt(sc, "a", s.scoring.sigmoid.a, w);
      read_opt(sc, "b", s.scoring.sigmoid.b, w);
      read_opt(sc, "beta", s.scoring.beta, w);
      read_opt(sc, "prune_eps", s.scoring.prune_eps, w);
      read_opt(sc, "rescale", s.scoring.rescale, w);
      read_opt(sc, "area_weighting", s.scoring.area_weighting, w);
    }
    if (j.contains("solver")) {
      const auto& so = j.at("solver");
      read_opt(so, "time_limit_ms", s.solver.time_limit_ms, w);
      read_opt(so, "gap_tol", s.solver.gap_tol, w);
      read_opt(so, "node_limit", s.solver.node_limit, w);
    }
    if (j.contains("mining")) {
      read_opt(j.at("mining"), "min_support", s.mining.min_support, w);
      read_opt(j.at("mining"), "soft_ratio", s.mining.soft_ratio, w);
    }
    if (j.contains("context")) read_opt(j.at("context"), "lambda", s.lambda, w);
  }
  if (common.seed) s.seed = *common.seed;
  if (common.threads) s.threads = *common.threads;
  if (common.deterministic) s.deterministic = true;
  if (common.verbose) s.verbose = true;
  if (s.threads == 0) s.threads = std::max(1u, std::thread::hardware_concurrency());
  s.solver.deterministic = s.deterministic;
  return s;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

/// Runs fn(k) for k in [0, count) on a pool of `threads` workers.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count || failed.load()) return;
      try {
        fn(k);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline Json nullable(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_mine(const MineArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    Settings s = detail::load_settings(args.common);
    if (args.min_support) s.mining.min_support = *args.min_support;
    if (args.soft_ratio) s.mining.soft_ratio = *args.soft_ratio;
    const Corpus corpus = load_corpus(args.corpus);
    const auto rules = mine_rules(corpus, s.mining, s.threads);
    write_text_file(args.out, dump_json(rules_to_json(rules, corpus.labels)));
    std::size_t hard = 0;
    for (const auto& r : rules) hard += r.hard;
    out << "mined " << rules.size() << " rules (" << hard << " hard, " << rules.size() - hard << " soft) from "
        << corpus.size() << " instances -> " << args.out << "\n";
    return static_cast<int>(kExitOk);
  });
}

inline int cmd_learn_context(const LearnContextArgs& args, std::ostream& out = std::cout,
                             std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    Settings s = detail::load_settings(args.common);
    if (args.lambda) s.lambda = *args.lambda;
    const Corpus corpus = load_corpus(args.corpus);
    FitReport report;
    const auto model = fit_association(corpus, s.lambda, FitOptions{}, &report);
    write_text_file(args.out, dump_json(model_to_json(model)));
    out << "fitted " << model.W.rows() << "x" << model.W.cols() << " association matrix, lambda " << model.lambda
        << ", " << report.iterations << " iterations, KKT residual " << report.kkt_residual << " -> " << args.out
        << "\n";
    return static_cast<int>(kExitOk);
  });
}

inline int cmd_gen(const GenArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const Settings s = detail::load_settings(args.common);
    SynthConfig cfg = args.synth_config
                          ? synth_config_from_json(read_json_file(*args.synth_config), *args.synth_config)
                          : default_synth_config();
    if (args.common.seed) cfg.seed = *args.common.seed;
    if (args.noise) cfg.noise = *args.noise;
    const Corpus corpus = generate_corpus(cfg, args.count, s.threads);
    save_corpus(corpus, args.out);
    out << "generated " << corpus.size() << " instances -> " << args.out << "\n";
    return static_cast<int>(kExitOk);
  });
}

struct InstanceReport {
  std::string name;
  InferenceResult result;
  std::optional<double> per_pixel;
  std::optional<double> per_class;
};

inline int cmd_infer(const InferArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  return detail::guarded(err, [&] {
    Settings s = detail::load_settings(args.common);
    if (args.a) s.scoring.sigmoid.a = *args.a;
    if (args.b) s.scoring.sigmoid.b = *args.b;
    if (args.beta) s.scoring.beta = *args.beta;
    if (args.prune_eps) s.scoring.prune_eps = *args.prune_eps;
    if (args.no_rescale) s.scoring.rescale = false;
    if (args.no_area_weight) s.scoring.area_weighting = false;
    if (args.time_limit_ms) s.solver.time_limit_ms = *args.time_limit_ms;
    if (args.node_limit) s.solver.node_limit = *args.node_limit;

    Corpus corpus = load_corpus(args.corpus);
    std::vector<Rule> rules;
    if (args.rules) rules = load_rules(*args.rules, corpus.labels);

    std::optional<AssociationModel> model;
    if (args.model) {
      if (!fs::exists(*args.model)) {
        err << "warning: model file '" << *args.model << "' not found; context step skipped\n";
      } else {
        model = load_model(*args.model);
        if (model->labels != corpus.labels.names())
          throw InputError("model labels do not match the corpus label set");
      }
    }

    if (args.tune_on) {
      const Corpus validation = load_corpus(*args.tune_on);
      if (!(validation.labels == corpus.labels)) throw InputError("validation corpus uses a different label set");
      std::vector<std::optional<std::vector<double>>> priors;
      for (const auto& smp : validation.samples)
        priors.push_back(model && smp.instance.scene_scores
                             ? std::optional<std::vector<double>>(label_prior(*model, *smp.instance.scene_scores))
                             : std::nullopt);
      s.scoring.sigmoid = tune_sigmoid(validation, priors, s.scoring);
      if (s.verbose) err << "tuned sigmoid: a=" << s.scoring.sigmoid.a << " b=" << s.scoring.sigmoid.b << "\n";
    }

    std::sort(corpus.samples.begin(), corpus.samples.end(),
              [](const Sample& x, const Sample& y) { return x.instance.name < y.instance.name; });

    InferenceConfig icfg;
    icfg.scoring = s.scoring;
    icfg.solver = s.solver;
    if (args.common.dump_lp) fs::create_directories(*args.common.dump_lp);

    std::vector<InstanceReport> reports(corpus.size());
    std::vector<double> millis(corpus.size(), 0.0);
    detail::parallel_for(corpus.size(), s.threads, [&](std::size_t k) {
      const auto& smp = corpus.samples[k];
      const auto t0 = std::chrono::steady_clock::now();
      IlpProblem problem;
      auto& rep = reports[k];
      rep.name = smp.instance.name;
      rep.result = infer_instance(smp.instance, rules, model ? &*model : nullptr, icfg, &problem);
      millis[k] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      if (args.common.dump_lp) {
        std::ostringstream lp;
        write_lp(lp, problem, &corpus.labels);
        write_text_file(fs::path(*args.common.dump_lp) / (smp.instance.name + ".lp"), lp.str());
      }
      if (smp.truth && !rep.result.labels.empty()) {
        rep.per_pixel = per_pixel_accuracy(rep.result.labels, smp.truth->labels, smp.instance.regions);
        rep.per_class =
            per_class_accuracy(rep.result.labels, smp.truth->labels, smp.instance.regions, corpus.labels.size());
      }
    });

    // Predictions.
    Json preds = Json::object();
    preds["labels"] = corpus.labels.names();
    Json pred_list = Json::array();
    for (const auto& rep : reports) {
      const auto& r = rep.result;
      Json pj = Json::object();
      pj["name"] = rep.name;
      pj["status"] = std::string(to_string(r.status));
      if (r.labels.empty()) {
        pj["labels"] = nullptr;
        pj["objective"] = nullptr;
      } else {
        Json names = Json::array();
        for (LabelId id : r.labels) names.push_back(corpus.labels.name(id));
        pj["labels"] = std::move(names);
        pj["objective"] = r.objective;
      }
      Json rr = Json::array();
      for (std::size_t k = 0; k < rules.size(); ++k)
        rr.push_back({{"kind", std::string(to_string(rules[k].kind))},
                      {"a", corpus.labels.name(rules[k].a)},
                      {"b", corpus.labels.name(rules[k].b)},
                      {"hard", rules[k].hard},
                      {"outcome", std::string(to_string(r.rules[k]))}});
      pj["rules"] = std::move(rr);
      if (!r.conflict.empty()) pj["conflicting_rules"] = r.conflict;
      pred_list.push_back(std::move(pj));
    }
    preds["instances"] = std::move(pred_list);
    const fs::path out_dir(args.out_dir);
    write_text_file(out_dir / "predictions.json", dump_json(preds));

    // Manifest.
    Json manifest = Json::object();
    manifest["tool"] = "ruleseg";
    manifest["version"] = kToolVersion;
    manifest["timestamp"] = detail::utc_timestamp();
    manifest["inputs"] = {{"corpus", args.corpus}, {"rules", detail::nullable(args.rules)},
                          {"model", detail::nullable(args.model)}, {"tune_on", detail::nullable(args.tune_on)}};
    const Json config = s.to_json();
    manifest["config_hash"] = detail::fnv1a_hex(config.dump());
    manifest["config"] = config;
    manifest["context_applied"] = model.has_value();
    Json inst_list = Json::array();
    std::size_t counts[4] = {0, 0, 0, 0};
    double sum_obj = 0.0, sum_pp = 0.0, sum_pc = 0.0;
    std::size_t solved = 0, with_truth = 0;
    for (const auto& rep : reports) {
      const auto& r = rep.result;
      ++counts[static_cast<int>(r.status)];
      Json ij = Json::object();
      ij["name"] = rep.name;
      ij["status"] = std::string(to_string(r.status));
      ij["objective"] = r.labels.empty() ? Json(nullptr) : Json(r.objective);
      ij["gap"] = std::isfinite(r.gap) ? Json(r.gap) : Json(nullptr);
      ij["nodes"] = r.stats.nodes;
      ij["lp_iterations"] = r.stats.lp_iterations;
      std::size_t violated_soft = 0;
      for (std::size_t k = 0; k < rules.size(); ++k) violated_soft += r.rules[k] == RuleOutcome::Violated;
      ij["violated_soft_rules"] = violated_soft;
      ij["per_pixel"] = rep.per_pixel ? Json(*rep.per_pixel) : Json(nullptr);
      ij["per_class"] = rep.per_class ? Json(*rep.per_class) : Json(nullptr);
      if (!r.labels.empty()) {
        sum_obj += r.objective;
        ++solved;
      }
      if (rep.per_pixel) {
        sum_pp += *rep.per_pixel;
        sum_pc += *rep.per_class;
        ++with_truth;
      }
      inst_list.push_back(std::move(ij));
    }
    manifest["instances"] = std::move(inst_list);
    auto mean = [](double sum, std::size_t n) { return n ? Json(sum / static_cast<double>(n)) : Json(nullptr); };
    manifest["aggregate"] = {{"instances", reports.size()},
                             {"optimal", counts[0]},
                             {"feasible", counts[1]},
                             {"infeasible", counts[2]},
                             {"aborted", counts[3]},
                             {"mean_objective", mean(sum_obj, solved)},
                             {"evaluated", with_truth},
                             {"mean_per_pixel", mean(sum_pp, with_truth)},
                             {"mean_per_class", mean(sum_pc, with_truth)}};
    write_text_file(out_dir / "manifest.json", dump_json(manifest));

    for (std::size_t k = 0; k < reports.size(); ++k) {
      const auto& r = reports[k].result;
      if (r.status == SolveStatus::Infeasible) {
        err << "warning: " << reports[k].name << " is infeasible";
        if (!r.conflict.empty()) {
          err << "; conflicting hard rules:";
          for (std::size_t c : r.conflict)
            err << " " << to_string(rules[c].kind) << "(" << corpus.labels.name(rules[c].a) << ", "
                << corpus.labels.name(rules[c].b) << ")";
        }
        err << "\n";
      }
      if (s.verbose)
        err << reports[k].name << ": " << to_string(r.status) << " objective " << r.objective << " nodes "
            << r.stats.nodes << " lp_iterations " << r.stats.lp_iterations << " vars " << r.num_vars << " rows "
            << r.num_rows << " " << std::fixed << std::setprecision(2) << millis[k] << " ms\n"
            << std::defaultfloat;
    }
    out << "labeled " << reports.size() << " instances (" << counts[0] << " optimal, " << counts[1] << " feasible, "
        << counts[2] << " infeasible, " << counts[3] << " aborted) -> " << args.out_dir << "\n";
    return static_cast<int>(kExitOk);
  });
}

inline int cmd_eval(const EvalArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  return detail::guarded(err, [&] {
    const Corpus corpus = load_corpus(args.corpus);
    const Json preds = read_json_file(args.predictions);
    if (!preds.is_object() || !preds.contains("instances") || !preds.at("instances").is_array())
      throw InputError(args.predictions + ": expected an object with an 'instances' array");
    std::map<std::string, const Sample*> by_name;
    for (const auto& smp : corpus.samples) by_name[smp.instance.name] = &smp;

    const std::size_t l = corpus.labels.size();
    ClassAreaTally tally(l);
    Json per_instance = Json::array();
    std::size_t evaluated = 0, skipped = 0;
    for (const auto& pj : preds.at("instances")) {
      const auto name = detail::get_field<std::string>(pj, "name", args.predictions);
      auto it = by_name.find(name);
      if (it == by_name.end()) throw InputError("prediction for unknown instance '" + name + "'");
      const Sample& smp = *it->second;
      if (!smp.truth) throw InputError("instance '" + name + "' has no ground truth");
      if (!pj.contains("labels") || pj.at("labels").is_null()) {
        ++skipped;
        continue;
      }
      std::vector<LabelId> pred;
      for (const auto& v : pj.at("labels")) pred.push_back(detail::label_ref(v, corpus.labels, name));
      if (pred.size() != smp.instance.regions.size())
        throw InputError("prediction for '" + name + "' has the wrong number of regions");
      tally.add(pred, smp.truth->labels, smp.instance.regions);
      per_instance.push_back(
          {{"name", name},
           {"per_pixel", per_pixel_accuracy(pred, smp.truth->labels, smp.instance.regions)},
           {"per_class", per_class_accuracy(pred, smp.truth->labels, smp.instance.regions, l)}});
      ++evaluated;
    }
    if (evaluated == 0) throw InputError("no labeled predictions to evaluate");

    Json per_label = Json::object();
    out << std::left << std::setw(16) << "label" << std::right << std::setw(12) << "gt area" << std::setw(10)
        << "recall" << "\n";
    for (std::size_t c = 0; c < l; ++c) {
      const double recall = tally.recall(c);
      per_label[corpus.labels.name(static_cast<LabelId>(c))] = recall < 0.0 ? Json(nullptr) : Json(recall);
      out << std::left << std::setw(16) << corpus.labels.name(static_cast<LabelId>(c)) << std::right << std::setw(12)
          << tally.class_area(c) << std::setw(10);
      if (recall < 0.0) out << "-";
      else out << std::fixed << std::setprecision(4) << recall << std::defaultfloat;
      out << "\n";
    }
    out << std::fixed << std::setprecision(4) << "per-pixel " << tally.per_pixel() << "\nper-class "
        << tally.per_class() << std::defaultfloat << "\n"
        << "instances " << evaluated << " evaluated, " << skipped << " without labels\n";

    Json metrics = Json::object();
    metrics["per_pixel"] = tally.per_pixel();
    metrics["per_class"] = tally.per_class();
    metrics["per_label"] = std::move(per_label);
    metrics["evaluated"] = evaluated;
    metrics["skipped"] = skipped;
    metrics["instances"] = std::move(per_instance);
    const fs::path json_out =
        args.out ? fs::path(*args.out) : fs::path(args.predictions).parent_path() / "metrics.json";
    write_text_file(json_out, dump_json(metrics));
    return static_cast<int>(kExitOk);
  });
}

}  // namespace ruleseg

#endif  // RULESEG_COMMANDS_HPP_
