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

#ifndef NLUFORGE_ERROR_H_
#define NLUFORGE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace nluforge {

// Coarse failure classes shared by every module. The gateway maps each one to
// an HTTP status and a machine-readable API error code.
enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kConflict,          // optimistic-concurrency or state-transition conflict
  kBusy,              // worker has no free slot
  kParse,             // input is unreadable as a whole
  kValidation,        // input is readable but violates IR invariants
  kFailedPrecondition,
  kResourceExhausted,
  kIo,
  kUnavailable,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nluforge

#endif  // NLUFORGE_ERROR_H_
