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

#include "diva/task.hpp"

#include <algorithm>
#include <sstream>

#include "diva/errors.hpp"

namespace diva {

std::string task_name(Task t) {
  switch (t) {
    case Task::Disc: return "disc";
    case Task::Shared: return "shared";
    case Task::Intra: return "intra";
    case Task::Dance: return "dance";
  }
  throw ConfigError("task_name: invalid task");
}

std::string task_code(Task t) {
  switch (t) {
    case Task::Disc: return "D";
    case Task::Shared: return "S";
    case Task::Intra: return "I";
    case Task::Dance: return "Da";
  }
  throw ConfigError("task_code: invalid task");
}

Task task_from_name(const std::string& s) {
  for (Task t : kAllTasks) {
    if (task_name(t) == s) return t;
  }
  throw ConfigError("unknown task name: " + s);
}

Task task_from_code(const std::string& s) {
  for (Task t : kAllTasks) {
    if (task_code(t) == s) return t;
  }
  throw ConfigError("unknown task code: " + s);
}

std::vector<Task> parse_task_codes(const std::string& csv) {
  std::vector<Task> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    // Trim surrounding spaces.
    const auto begin = item.find_first_not_of(' ');
    const auto end = item.find_last_not_of(' ');
    if (begin == std::string::npos) throw ConfigError("empty task code in list");
    Task t = task_from_code(item.substr(begin, end - begin + 1));
    if (!contains_task(out, t)) out.push_back(t);
  }
  if (out.empty()) throw ConfigError("task list is empty");
  std::sort(out.begin(), out.end(), [](Task a, Task b) {
    return static_cast<int>(a) < static_cast<int>(b);
  });
  return out;
}

bool contains_task(const std::vector<Task>& tasks, Task t) {
  return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
}

}  // namespace diva
