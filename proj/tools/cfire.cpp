/*
 * Copyright 2026 The CFIRE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line driver for the full rule-extraction pipeline.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfire/pipeline.hpp"

namespace {

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  cfire::RunConfig cfg;
  std::string label_col, split = "0.8,0.1,0.1", explainers = "ks,li,ig";

  CLI::App app{"Extract global box-rule models from black-box classifiers"};
  app.add_option("--data", cfg.data_path, "CSV file with a header row")->required();
  app.add_option("--label-col", label_col, "Name of the class-label column")->required();
  app.add_option("--split", split, "train,input,test fractions");
  app.add_option("--seed", cfg.seed, "Root seed");
  app.add_option("--models", cfg.n_models, "Number of black boxes in the ensemble");
  app.add_option("--explainers", explainers, "Comma-separated subset of ks,li,ig");
  app.add_option("--iota", cfg.iota, "Importance threshold");
  app.add_option("--tau", cfg.tau, "Relative frequency threshold");
  app.add_option("--max-depth", cfg.max_depth, "Depth limit of the refinement trees");
  app.add_option("--purity", cfg.purity, "Minimum positive fraction of an emitted box");
  app.add_flag("--dump-attributions", cfg.dump_attributions, "Write per-explainer attribution CSVs");
  app.add_option("--out", cfg.out_dir, "Output directory");
  app.add_option("--hidden", cfg.mlp.hidden_width, "Hidden units of each black-box MLP");
  app.add_option("--epochs", cfg.mlp.epochs, "Training epochs of each black-box MLP");
  app.add_option("--lr", cfg.mlp.learning_rate, "Learning rate of each black-box MLP");
  app.add_option("--ks-budget", cfg.ks_budget, "Kernel SHAP coalition budget");
  app.add_option("--lime-budget", cfg.lime_budget, "LIME perturbation budget");
  app.add_option("--ig-steps", cfg.ig_steps, "Integrated-gradients steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cfire::exit_code::kConfig;
  }

  cfg.label_column = label_col;
  try {
    const auto parts = SplitList(split);
    if (parts.size() != 3) cfire::Fail(cfire::ErrorKind::kConfig, "split: expected three fractions");
    cfg.split.train_fraction = std::stod(parts[0]);
    cfg.split.input_fraction = std::stod(parts[1]);
    cfg.split.test_fraction = std::stod(parts[2]);
    cfg.explainers.clear();
    for (const auto& name : SplitList(explainers)) cfg.explainers.push_back(cfire::ParseExplainer(name));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cfire::exit_code::kConfig;
  }

  const auto result = cfire::Run(cfg, std::cerr);
  return result.exit_code;
}
