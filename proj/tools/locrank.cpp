// locrank: simulate -> train -> evaluate -> compare -> inspect-weights.

#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "locrank/pipeline.hpp"

namespace {

using namespace locrank;

/// Flag overrides are applied on top of the config file only when given.
class Overrides {
 public:
  template <typename T>
  void add(CLI::App* cmd, const std::string& flag, T& dst, const std::string& help) {
    auto value = std::make_shared<T>();
    auto* opt = cmd->add_option(flag, *value, help);
    pending_.push_back([opt, value, &dst] {
      if (opt->count() > 0) dst = *value;
    });
  }
  void apply() const {
    for (const auto& fn : pending_) fn();
  }

 private:
  std::vector<std::function<void()>> pending_;
};

std::string config_footer() {
  return "\nTrain config file keys (JSON) and defaults:\n" + serialize_train_config(TrainConfig{}) +
         "\nSim config file keys (JSON) and defaults:\n" + serialize_sim_config(SimConfig{});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locale-aware multi-objective learning-to-rank toolkit"};
  app.footer(config_footer());
  app.require_subcommand(1);

  // simulate
  SimConfig sim_cfg;
  std::string sim_config_path, sim_out;
  double split = 0.8;
  Overrides sim_over;
  auto* cmd_sim = app.add_subcommand("simulate", "Generate a synthetic multi-locale click log");
  cmd_sim->add_option("--config", sim_config_path, "Sim config JSON (defaults when omitted)");
  cmd_sim->add_option("--out", sim_out, "Output directory")->required();
  cmd_sim->add_option("--split", split, "Train fraction per locale")->capture_default_str();
  sim_over.add(cmd_sim, "--seed", sim_cfg.seed, "seed (default 42)");
  sim_over.add(cmd_sim, "--list-size", sim_cfg.list_size, "list_size (default 20)");
  sim_over.add(cmd_sim, "--sessions", sim_cfg.sessions_per_query, "sessions_per_query (default 8)");
  sim_over.add(cmd_sim, "--gamma", sim_cfg.position_bias_exponent, "position_bias_exponent (default 1)");
  sim_over.add(cmd_sim, "--click-noise", sim_cfg.click_noise, "click_noise (default 0.05)");
  sim_over.add(cmd_sim, "--label-noise", sim_cfg.label_noise, "label_noise (default 0.1)");
  sim_over.add(cmd_sim, "--withhold", sim_cfg.label_withhold_fraction,
               "label_withhold_fraction (default 0.1)");
  sim_over.add(cmd_sim, "--exposure-tilt", sim_cfg.exposure_tilt, "exposure_tilt (default 1.5)");
  sim_over.add(cmd_sim, "--local-fraction", sim_cfg.local_fraction, "local_fraction (default 0.5)");

  // train
  TrainConfig tr_cfg;
  std::string tr_dataset, tr_config_path, tr_out, variant = "la-mo", init;
  Overrides tr_over;
  auto* cmd_train = app.add_subcommand("train", "Train a Prod / MO / LA-MO linear ranker");
  cmd_train->add_option("--dataset", tr_dataset, "Training dataset (JSONL)")->required();
  cmd_train->add_option("--config", tr_config_path, "Train config JSON (defaults when omitted)");
  cmd_train->add_option("--variant", variant, "prod | mo | la-mo")
      ->check(CLI::IsMember({"prod", "mo", "la-mo"}))
      ->capture_default_str();
  cmd_train->add_option("--out", tr_out, "Model file to write")->required();
  tr_over.add(cmd_train, "--lambda-rank", tr_cfg.lambda_rank, "lambda_rank (default 1)");
  tr_over.add(cmd_train, "--lambda-list", tr_cfg.lambda_list, "lambda_list (default 1)");
  tr_over.add(cmd_train, "--tau", tr_cfg.tau, "ListNet target temperature tau (default 1)");
  tr_over.add(cmd_train, "--eta", tr_cfg.eta, "locale boost factor eta (default 2)");
  tr_over.add(cmd_train, "--epochs", tr_cfg.epochs, "epochs E (default 50)");
  tr_over.add(cmd_train, "--warmup", tr_cfg.warmup_epochs, "warmup_epochs at eta=1 (default 0)");
  tr_over.add(cmd_train, "--lr", tr_cfg.learning_rate, "learning_rate (default 0.1)");
  tr_over.add(cmd_train, "--l2", tr_cfg.l2, "l2 penalty (default 0)");
  tr_over.add(cmd_train, "--seed", tr_cfg.seed, "seed for small_uniform init (default 0)");
  cmd_train->add_option("--init", init, "zeros | small_uniform (default zeros)")
      ->check(CLI::IsMember({"zeros", "small_uniform"}));

  // evaluate
  std::string ev_dataset, ev_model, ev_out;
  std::vector<std::size_t> ks = {5, 20};
  auto* cmd_eval = app.add_subcommand("evaluate", "Region match rate and NDCG/P/R by locale x bucket");
  cmd_eval->add_option("--dataset", ev_dataset, "Evaluation dataset (JSONL)")->required();
  cmd_eval->add_option("--model", ev_model, "Model file")->required();
  cmd_eval->add_option("--k", ks, "Cutoffs, comma separated")->delimiter(',')->capture_default_str();
  cmd_eval->add_option("--out", ev_out, "Output prefix (.json and .txt)")->required();

  // compare
  std::string cmp_dataset, cmp_out, metric = "ndcg";
  std::vector<std::string> models;
  std::size_t cmp_k = 20;
  double alpha = 0.05, max_overlap = 1.0;
  auto* cmd_cmp = app.add_subcommand("compare", "Paired Wilcoxon + Benjamini-Hochberg per locale");
  cmd_cmp->add_option("--dataset", cmp_dataset, "Evaluation dataset (JSONL)")->required();
  cmd_cmp->add_option("--model", models, "Baseline model, then treatment model (give twice)")
      ->required()
      ->expected(2);
  cmd_cmp->add_option("--metric", metric, "local | ndcg | precision | recall")
      ->check(CLI::IsMember({"local", "ndcg", "precision", "recall"}))
      ->capture_default_str();
  cmd_cmp->add_option("--k", cmp_k, "Cutoff")->capture_default_str();
  cmd_cmp->add_option("--alpha", alpha, "FDR level")->capture_default_str();
  auto* overlap_opt = cmd_cmp->add_option(
      "--max-overlap", max_overlap, "Keep only queries whose top-20 Jaccard overlap is below this");
  cmd_cmp->add_option("--out", cmp_out, "Output prefix (.json and .txt)")->required();

  // inspect-weights
  std::string ins_model, ins_dataset, semantic = "semantic_similarity";
  auto* cmd_ins = app.add_subcommand("inspect-weights", "Standardized feature importance table");
  cmd_ins->add_option("--model", ins_model, "Model file")->required();
  cmd_ins->add_option("--dataset", ins_dataset, "Dataset for feature spread")->required();
  cmd_ins->add_option("--semantic-feature", semantic, "Column to highlight")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_sim->parsed()) {
      if (!sim_config_path.empty()) sim_cfg = read_sim_config(sim_config_path);
      sim_over.apply();
      sim_cfg.check();
      std::cout << run_simulate(sim_cfg, sim_out, split).text;
    } else if (cmd_train->parsed()) {
      if (!tr_config_path.empty()) tr_cfg = read_train_config(tr_config_path);
      tr_over.apply();
      if (!init.empty()) tr_cfg.init = parse_init(init);
      tr_cfg.check();
      std::cout << run_train(tr_dataset, tr_cfg, parse_variant(variant), tr_out).text;
    } else if (cmd_eval->parsed()) {
      std::cout << run_evaluate(ev_dataset, ev_model, ks, ev_out);
    } else if (cmd_cmp->parsed()) {
      CompareOptions opts;
      if (overlap_opt->count() > 0) opts.max_overlap = max_overlap;
      std::cout << run_compare(cmp_dataset, models.at(0), models.at(1), parse_metric(metric), cmp_k,
                               alpha, opts, cmp_out);
    } else if (cmd_ins->parsed()) {
      std::cout << run_inspect_weights(ins_model, ins_dataset, semantic);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
