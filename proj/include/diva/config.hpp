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

#ifndef DIVA_CONFIG_HPP_
#define DIVA_CONFIG_HPP_

#include <string>

#include "json.hpp"

#include "diva/datagen.hpp"
#include "diva/evaluator.hpp"
#include "diva/trainer.hpp"

namespace diva {

// JSON (de)serialization for every configuration struct. Parsing is an
// overlay: absent keys keep the values of `base`, present keys replace them,
// unknown keys and type mismatches raise ConfigError naming the offending
// path. Emission writes every key, so emit -> parse is the identity.
//
// Representation choices:
//   tasks            array of task names, or one code string ("D,S,I,Da")
//   pairs            array of two-element name arrays
//   base             "margin" | "triplet"
//   ensemble_weights object keyed by task name

nlohmann::json to_json(const EncoderConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const LossWeights& c);
nlohmann::json to_json(const BatchSpec& c);
nlohmann::json to_json(const AugmentConfig& c);
nlohmann::json to_json(const AdamConfig& c);
nlohmann::json to_json(const EvalConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SynthConfig& c);

EncoderConfig encoder_config_from_json(const nlohmann::json& j,
                                       EncoderConfig base = {});
ModelConfig model_config_from_json(const nlohmann::json& j,
                                   ModelConfig base = {});
LossWeights loss_weights_from_json(const nlohmann::json& j,
                                   LossWeights base = {});
BatchSpec batch_spec_from_json(const nlohmann::json& j, BatchSpec base = {});
AugmentConfig augment_config_from_json(const nlohmann::json& j,
                                       AugmentConfig base = {});
AdamConfig adam_config_from_json(const nlohmann::json& j, AdamConfig base = {});
EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig base = {});
SynthConfig synth_config_from_json(const nlohmann::json& j,
                                   SynthConfig base = {});

// TrainConfig additionally accepts a "preset" key: a named (rho_dec, alpha)
// starting point applied to the loss weights BEFORE the "weights" object, so
// explicit keys still win. Known presets: "cub-ibn" (300, 0.15),
// "cars-ibn" (100, 0.15), "sop-ibn" (150, 0.2).
TrainConfig train_config_from_json(const nlohmann::json& j,
                                   TrainConfig base = {});

// Everything one run needs: the training recipe plus the generator recipe
// (under "synth"). The file is a single JSON object; train keys sit at the
// top level.
struct RunConfig {
  TrainConfig train;
  SynthConfig synth;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

// Reads and parses a run config file. Unreadable file -> IoError; malformed
// JSON -> ConfigError carrying line and column; schema violations -> the
// parser errors above.
RunConfig load_run_config(const std::string& path, RunConfig base = {});

// Parses text instead of a file; same error behavior as load_run_config.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});

// Emit-only serialization of evaluation and training artifacts.
nlohmann::json to_json(const MetricSet& m);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const TrainHistory& h);

}  // namespace diva

#endif  // DIVA_CONFIG_HPP_
