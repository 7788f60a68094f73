// Copyright 2026 The NLUForge Authors. All Rights Reserved.
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

#ifndef NLUFORGE_TOOLS_CLI_H_
#define NLUFORGE_TOOLS_CLI_H_

#include <ostream>

namespace nluforge {

// The nluforge command line. Exit codes: 0 success, 1 API error, 2 usage.
int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nluforge

#endif  // NLUFORGE_TOOLS_CLI_H_
