// Copyright 2026 The ddopt Authors
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

#ifndef DDOPT_ERROR_HPP_
#define DDOPT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ddopt {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfDomain,
  kStaleCache,
  kInvalidDuration,
  kSolveFailed,
  kShapeError,
  kNoPath,
  kInvalidEndpoint,
  kParseError,
  kNonFinite,
  kIoError,
  kConfigError,
};

std::string_view ToString(ErrorCode code);

// All library failures surface as ddopt::Error carrying a machine-readable
// code. Solver outcomes that are not programming errors (infeasible,
// incomplete) are reported through status enums instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ddopt

#endif  // DDOPT_ERROR_HPP_
