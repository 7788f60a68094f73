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

#ifndef NLUFORGE_TESTS_SUPPORT_FIXTURES_H_
#define NLUFORGE_TESTS_SUPPORT_FIXTURES_H_

#include <filesystem>
#include <string>

namespace nluforge::testing {

// Directory holding the committed fixture files.
std::filesystem::path FixtureDir();
std::string ReadFixture(const std::string& name);
std::string ReadFile(const std::filesystem::path& path);

// The built command-line binary.
std::filesystem::path CliBinary();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace nluforge::testing

#endif  // NLUFORGE_TESTS_SUPPORT_FIXTURES_H_
