// Copyright 2026 The robner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The robner command-line pipeline. Run() is separate from main() so tests
// can drive subcommands in-process.

#ifndef ROBNER_TOOLS_CLI_H_
#define ROBNER_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace robner::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

// args excludes the program name. Diagnostics go to err, results to out.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace robner::cli

#endif  // ROBNER_TOOLS_CLI_H_
