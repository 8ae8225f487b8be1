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

// ruleseg: mine rules, learn scene context, label instances, evaluate, and
// generate synthetic corpora.

#include <iostream>

#include <CLI11.hpp>

#include "ruleseg/commands.hpp"

namespace {

void add_common(CLI::App* app, ruleseg::CommonOptions& c) {
  app->add_option("--seed", c.seed, "Random seed (default 0)");
  app->add_option("--threads", c.threads, "Worker threads, 0 for all cores (default 1)");
  app->add_flag("--deterministic", c.deterministic, "Reproducible runs: the solver ignores its time limit");
  app->add_flag("--verbose", c.verbose, "Per-instance solver statistics on stderr");
  app->add_option("--dump-lp", c.dump_lp, "Directory for per-instance LP files (infer)");
  app->add_option("--config", c.config, "JSON config file; flags override it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene labeling with knowledge-based rules solved as a 0-1 integer program"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ruleseg::kToolVersion);

  ruleseg::MineArgs mine;
  auto* mine_cmd = app.add_subcommand("mine", "Mine hard and soft rules from an annotated corpus");
  mine_cmd->add_option("--corpus", mine.corpus, "Corpus directory or file")->required();
  mine_cmd->add_option("--out", mine.out, "Output rules file")->required();
  mine_cmd->add_option("--min-support", mine.min_support, "Minimum opportunities per rule (default 5)");
  mine_cmd->add_option("--soft-ratio", mine.soft_ratio, "Minimum holding ratio of a soft rule (default 0.8)");
  add_common(mine_cmd, mine.common);

  ruleseg::LearnContextArgs learn;
  auto* learn_cmd = app.add_subcommand("learn-context", "Fit the scene-label association model");
  learn_cmd->add_option("--corpus", learn.corpus, "Corpus directory or file")->required();
  learn_cmd->add_option("--out", learn.out, "Output model file")->required();
  learn_cmd->add_option("--lambda", learn.lambda, "L1 weight (default: 0.1 of the smallest zeroing value)");
  add_common(learn_cmd, learn.common);

  ruleseg::InferArgs infer;
  auto* infer_cmd = app.add_subcommand("infer", "Label instances under rules and scene context");
  infer_cmd->add_option("--corpus,--instances", infer.corpus, "Instance directory or file")->required();
  infer_cmd->add_option("--out", infer.out_dir, "Output directory (predictions.json, manifest.json)")->required();
  infer_cmd->add_option("--rules", infer.rules, "Rules file");
  infer_cmd->add_option("--model", infer.model, "Association model file");
  infer_cmd->add_option("--sigmoid-a", infer.a, "Sigmoid slope (default 2)");
  infer_cmd->add_option("--sigmoid-b", infer.b, "Sigmoid midpoint (default 0.5)");
  infer_cmd->add_option("--beta", infer.beta, "Context prior exponent (default 1)");
  infer_cmd->add_option("--prune-eps", infer.prune_eps, "Prior below which labels are pruned (default 0.01)");
  infer_cmd->add_flag("--no-rescale", infer.no_rescale, "Use raw scores without the sigmoid");
  infer_cmd->add_flag("--no-area-weight", infer.no_area_weight, "Skip area weighting");
  infer_cmd->add_option("--tune-on", infer.tune_on, "Validation corpus for the sigmoid grid search");
  infer_cmd->add_option("--time-limit-ms", infer.time_limit_ms, "Per-instance solver time limit (default 10000)");
  infer_cmd->add_option("--node-limit", infer.node_limit, "Per-instance branch-and-bound node limit");
  add_common(infer_cmd, infer.common);

  ruleseg::EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--predictions", eval.predictions, "predictions.json from infer")->required();
  eval_cmd->add_option("--corpus", eval.corpus, "Corpus with ground truth")->required();
  eval_cmd->add_option("--out", eval.out, "Metrics JSON (default: metrics.json beside the predictions)");
  add_common(eval_cmd, eval.common);

  ruleseg::GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen_cmd->add_option("--synth-config", gen.synth_config, "Generator config (JSON)");
  gen_cmd->add_option("--count", gen.count, "Number of instances")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--noise", gen.noise, "Probability that the true label is not the top score");
  add_common(gen_cmd, gen.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ruleseg::kExitBadInput;
  }

  if (*mine_cmd) return ruleseg::cmd_mine(mine);
  if (*learn_cmd) return ruleseg::cmd_learn_context(learn);
  if (*infer_cmd) return ruleseg::cmd_infer(infer);
  if (*eval_cmd) return ruleseg::cmd_eval(eval);
  if (*gen_cmd) {
    // `gen --config synth.json`: for gen, --config names the generator config.
    if (gen.common.config && !gen.synth_config) {
      gen.synth_config = gen.common.config;
      gen.common.config.reset();
    }
    return ruleseg::cmd_gen(gen);
  }
  return ruleseg::kExitBadInput;
}
