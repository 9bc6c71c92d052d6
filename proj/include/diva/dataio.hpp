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

#ifndef DIVA_DATAIO_HPP_
#define DIVA_DATAIO_HPP_

#include <string>

#include "diva/dataset.hpp"
#include "diva/trainer.hpp"

namespace diva {

// --- binary dataset ----------------------------------------------------------
// Little-endian layout:
//   bytes 0..3    magic "DIVA"
//   u32           format version (1)
//   u32           row count N
//   u32           feature width F
//   u32           class count C
//   N*F f32       features, row-major
//   N   u32       labels
//   C   u8        per-class split flags (0 train, 1 test)
// Features are stored in single precision; values already representable as
// f32 (the generator guarantees this) round-trip bit-exactly. Structural
// failures — wrong magic, unknown version, truncation — raise IoError naming
// the byte offset.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

// --- CSV dataset ---------------------------------------------------------------
// One sample per line, no header: F feature values, the integer label, the
// split flag, comma-separated with '.' decimals. Import rejects ragged rows
// (IoError with the 1-based line number), classes that appear under both
// split flags, and class ids with no rows at all (ConfigError).
void export_csv(const std::string& path, const Dataset& ds);
Dataset import_csv(const std::string& path);

// --- checkpoint ----------------------------------------------------------------
// Little-endian layout:
//   bytes 0..3    magic "DVCK"
//   u32           format version (1)
//   u64           header length H
//   H bytes       JSON header: full train config, epochs done, live learning
//                 rate, serialized rng, optimizer step count, queue cursor /
//                 fill, and a blob manifest (name + shape, in file order)
//   f64 blobs     live parameters, shadow parameters, optimizer first and
//                 second moments, queue buffer — exactly as the manifest says
// Loading rebuilds the trainer from the embedded config and overwrites every
// tensor bit-for-bit, so a resumed run continues the interrupted one exactly.
// A manifest that does not match the rebuilt model (renamed or reshaped
// blobs, e.g. a hand-edited embed width) raises CompatError.
struct Checkpoint {
  TrainConfig config;
  TrainerState state;
};

void save_checkpoint(const std::string& path, TrainerState& st,
                     const TrainConfig& cfg);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace diva

#endif  // DIVA_DATAIO_HPP_
