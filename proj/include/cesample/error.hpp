// Copyright 2026 The cesample Authors
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

#ifndef CESAMPLE_ERROR_HPP_
#define CESAMPLE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cesample {

// Error classes surfaced by every module. The numeric values are mirrored by
// ces_status in cesample.h; keep the two in sync.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kBadMagic = 4,
  kUnsupportedVersion = 5,
  kTruncated = 6,
  kDimensionMismatch = 7,
  kNonFinite = 8,
  kDuplicateId = 9,
  kUnknownFormat = 10,
  kInvalidValue = 11,
  kMissingData = 12,
  kSupportViolation = 13,
  kEmptySubset = 14,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cesample

#endif  // CESAMPLE_ERROR_HPP_
