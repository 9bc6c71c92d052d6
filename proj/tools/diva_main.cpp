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

// Command-line driver: dataset generation, training, evaluation, ablation
// sweeps, and spectrum export. Exit codes are a stable contract:
//   0 ok, 2 config, 3 I/O, 4 divergence, 5 incompatibility.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "diva/ablate.hpp"
#include "diva/config.hpp"
#include "diva/dataio.hpp"
#include "diva/datagen.hpp"
#include "diva/errors.hpp"
#include "diva/evaluator.hpp"
#include "diva/trainer.hpp"

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

diva::Dataset load_any_dataset(const std::string& path) {
  return has_suffix(path, ".csv") ? diva::import_csv(path)
                                  : diva::load_dataset(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw diva::IoError("cannot open \"" + path + "\" for writing");
  out << text;
  out.flush();
  if (!out) throw diva::IoError("failed writing \"" + path + "\"");
}

std::size_t sweep_threads() {
  const char* env = std::getenv("DIVA_THREADS");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(env, &used);
    if (used != std::string(env).size() || v == 0)
      throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw diva::ConfigError(
        "DIVA_THREADS must be a positive integer, got \"" +
        std::string(env) + "\"");
  }
}

void require_matching_width(const diva::TrainConfig& cfg,
                            const diva::Dataset& ds) {
  if (ds.feature_dim() != cfg.model.encoder.input_dim)
    throw diva::CompatError(
        "dataset feature width " + std::to_string(ds.feature_dim()) +
        " does not match the model's input width " +
        std::to_string(cfg.model.encoder.input_dim));
}

std::string spectrum_csv(const std::vector<double>& sv) {
  std::string out = "index,singular_value_normalized\n";
  char line[80];
  for (std::size_t i = 0; i < sv.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.17g\n", i, sv[i]);
    out += line;
  }
  return out;
}

std::string spectrum_svg(const std::vector<double>& sv, double decay) {
  const double w = 640, h = 400, pad = 56;
  double peak = 0.0;
  for (double v : sv) peak = std::max(peak, v);
  if (peak <= 0.0) peak = 1.0;
  const std::size_t n = sv.size();

  std::string points;
  char buf[160];
  for (std::size_t i = 0; i < n; ++i) {
    const double x =
        pad + (n > 1 ? (w - 2 * pad) * static_cast<double>(i) /
                           static_cast<double>(n - 1)
                     : 0.0);
    const double y = h - pad - (h - 2 * pad) * (sv[i] / peak);
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y);
    points += buf;
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.0f\" y=\"28\" font-family=\"monospace\" "
                "font-size=\"14\">singular value spectrum (decay %.6f)"
                "</text>\n",
                pad, decay);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" "
                "stroke=\"black\"/>\n",
                pad, h - pad, w - pad, h - pad);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" "
                "stroke=\"black\"/>\n",
                pad, pad, pad, h - pad);
  svg += buf;
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" "
         "points=\"" + points + "\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.0f\" y=\"%.0f\" font-family=\"monospace\" "
                "font-size=\"12\">index</text>\n",
                w / 2 - 20, h - pad + 32);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"14\" y=\"%.0f\" font-family=\"monospace\" "
                "font-size=\"12\" transform=\"rotate(-90 14 %.0f)\">"
                "normalized value</text>\n",
                h / 2 + 40, h / 2 + 40);
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

int run_gen_data(const std::string& config_path, const std::string& out_path) {
  const diva::RunConfig rc = diva::load_run_config(config_path);
  const diva::Dataset ds = diva::generate_synthetic(rc.synth);
  if (has_suffix(out_path, ".csv")) {
    diva::export_csv(out_path, ds);
  } else {
    diva::save_dataset(out_path, ds);
  }
  const std::size_t train = diva::split_indices(ds, diva::kTrainSplit).size();
  std::cout << "wrote " << ds.n_samples() << " samples (" << ds.feature_dim()
            << " dims, " << ds.n_classes() << " classes, " << train
            << " train / " << ds.n_samples() - train << " test) to "
            << out_path << "\n";
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir, const std::string& tasks,
              bool seed_given, std::uint64_t seed) {
  diva::RunConfig rc = diva::load_run_config(config_path);
  if (!tasks.empty()) {
    rc.train.model.tasks = diva::parse_task_codes(tasks);
    rc.train.model.pairs.clear();  // recomputed for the selected subset
  }
  if (seed_given) rc.train.seed = seed;

  const diva::Dataset ds = load_any_dataset(data_path);
  require_matching_width(rc.train, ds);
  std::filesystem::create_directories(out_dir);

  diva::TrainerState st = diva::TrainerState::init(rc.train);
  const diva::TrainHistory hist = diva::fit(st, ds, rc.train, &std::cout);

  const diva::EvalReport report =
      hist.evals.empty() ? diva::evaluate(st.model, ds, rc.train.eval)
                         : hist.evals.back().report;

  diva::save_checkpoint(out_dir + "/checkpoint.bin", st, rc.train);
  write_text(out_dir + "/history.json", diva::to_json(hist).dump(2) + "\n");
  write_text(out_dir + "/report.json", diva::to_json(report).dump(2) + "\n");
  std::cout << "trained " << rc.train.epochs << " epochs ("
            << hist.steps.size() << " steps); test recall@1 = "
            << report.ensemble.recall.begin()->second << "; artifacts in "
            << out_dir << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& out_path) {
  diva::Checkpoint ckpt = diva::load_checkpoint(ckpt_path);
  const diva::Dataset ds = load_any_dataset(data_path);
  require_matching_width(ckpt.config, ds);
  const diva::EvalReport report =
      diva::evaluate(ckpt.state.model, ds, ckpt.config.eval);
  write_text(out_path, diva::to_json(report).dump(2) + "\n");
  std::cout << "evaluated " << report.n_samples
            << " test samples; ensemble recall@1 = "
            << report.ensemble.recall.begin()->second << "; report in "
            << out_path << "\n";
  return 0;
}

int run_ablate(const std::string& config_path, const std::string& data_path,
               const std::string& out_dir, std::size_t n_seeds) {
  const diva::RunConfig rc = diva::load_run_config(config_path);
  const diva::Dataset ds = load_any_dataset(data_path);
  require_matching_width(rc.train, ds);
  std::filesystem::create_directories(out_dir);

  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < n_seeds; ++i)
    seeds.push_back(rc.train.seed + i);
  const std::vector<diva::AblationCell> cells = diva::run_ablation(
      rc.train, ds, seeds, sweep_threads(), &std::cout);
  write_text(out_dir + "/ablation.csv",
             diva::ablation_csv(cells, rc.train.eval.ks));

  std::size_t failed = 0;
  for (const diva::AblationCell& c : cells) failed += c.ok ? 0 : 1;
  std::cout << cells.size() << " cells (" << failed << " failed); table in "
            << out_dir << "/ablation.csv\n";
  return 0;
}

int run_spectrum(const std::string& ckpt_path, const std::string& data_path,
                 const std::string& out_path) {
  diva::Checkpoint ckpt = diva::load_checkpoint(ckpt_path);
  const diva::Dataset ds = load_any_dataset(data_path);
  require_matching_width(ckpt.config, ds);

  const std::vector<std::size_t> test_idx =
      diva::split_indices(ds, diva::kTestSplit);
  if (test_idx.empty())
    throw diva::ConfigError("spectrum: the dataset has no test split");
  const diva::Tensor x = diva::gather_rows(ds.features, test_idx);
  const diva::Tensor emb = ckpt.state.model.ensemble_embed(
      x, ckpt.config.eval.ensemble_weights);
  const std::vector<double> sv = diva::normalized_spectrum(emb);
  const double decay = diva::spectral_decay(emb);

  write_text(out_path, spectrum_csv(sv));
  std::string svg_path = out_path;
  const std::size_t dot = svg_path.find_last_of('.');
  if (dot != std::string::npos && svg_path.find('/', dot) == std::string::npos)
    svg_path.resize(dot);
  svg_path += ".svg";
  write_text(svg_path, spectrum_svg(sv, decay));

  std::cout << sv.size() << " singular values, spectral decay = " << decay
            << "; wrote " << out_path << " and " << svg_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale multi-task deep metric learning engine"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, tasks, ckpt_path;
  std::uint64_t seed = 0;
  std::size_t n_seeds = 1;

  CLI::App* gen = app.add_subcommand(
      "gen-data", "generate the synthetic benchmark dataset");
  gen->add_option("--config", config_path, "run config JSON")->required();
  gen->add_option("--out", out_path,
                  "output file (.csv for text, anything else binary)")
      ->required();

  CLI::App* train =
      app.add_subcommand("train", "train a model and write its artifacts");
  train->add_option("--config", config_path, "run config JSON")->required();
  train->add_option("--data", data_path, "dataset file")->required();
  train->add_option("--out", out_path, "output directory")->required();
  train->add_option("--tasks", tasks,
                    "task subset as codes, e.g. D,S,I,Da (must include D)");
  CLI::Option* seed_opt =
      train->add_option("--seed", seed, "override the config seed");

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")
      ->required();
  eval_cmd->add_option("--data", data_path, "dataset file")->required();
  eval_cmd->add_option("--out", out_path, "report JSON path")->required();

  CLI::App* ablate =
      app.add_subcommand("ablate", "run the task/decorrelation sweep");
  ablate->add_option("--config", config_path, "run config JSON")->required();
  ablate->add_option("--data", data_path, "dataset file")->required();
  ablate->add_option("--out", out_path, "output directory")->required();
  ablate->add_option("--seeds", n_seeds, "seeds per variant (default 1)");

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "export the test-split singular value spectrum");
  spectrum->add_option("--checkpoint", ckpt_path, "checkpoint file")
      ->required();
  spectrum->add_option("--data", data_path, "dataset file")->required();
  spectrum->add_option("--out", out_path, "spectrum CSV path (SVG written "
                       "alongside)")
      ->required();

  try {
    app.parse(argc, argv);

    if (gen->parsed()) return run_gen_data(config_path, out_path);
    if (train->parsed())
      return run_train(config_path, data_path, out_path, tasks,
                       seed_opt->count() > 0, seed);
    if (eval_cmd->parsed()) return run_eval(ckpt_path, data_path, out_path);
    if (ablate->parsed())
      return run_ablate(config_path, data_path, out_path, n_seeds);
    if (spectrum->parsed()) return run_spectrum(ckpt_path, data_path, out_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version are clean exits
  } catch (const diva::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const diva::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const diva::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const diva::CompatError& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
