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

#ifndef DIVA_TASK_HPP_
#define DIVA_TASK_HPP_

#include <array>
#include <string>
#include <vector>

namespace diva {

// The four training tasks. Disc separates training classes; Shared ranks
// across classes; Intra ranks within a class; Dance is the contrastive
// instance task fed by the momentum queue.
enum class Task { Disc, Shared, Intra, Dance };

// Canonical order used for head layout, parameter registries and reports.
inline constexpr std::array<Task, 4> kAllTasks = {Task::Disc, Task::Shared,
                                                  Task::Intra, Task::Dance};

std::string task_name(Task t);        // "disc", "shared", "intra", "dance"
std::string task_code(Task t);        // "D", "S", "I", "Da"
Task task_from_name(const std::string& s);
Task task_from_code(const std::string& s);

// Parses a comma-separated code list like "D,S,Da". Deduplicates, keeps
// canonical order. Throws ConfigError on unknown codes.
std::vector<Task> parse_task_codes(const std::string& csv);

bool contains_task(const std::vector<Task>& tasks, Task t);

}  // namespace diva

#endif  // DIVA_TASK_HPP_
