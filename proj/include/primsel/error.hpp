// Copyright 2026 The primsel Authors
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

#ifndef PRIMSEL_ERROR_HPP_
#define PRIMSEL_ERROR_HPP_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace primsel {

enum class ErrorCode {
  kInvalidProfile,
  kMissingTransformCost,
  kInvalidSelection,
  kInvalidRequest,
  kNotAChain,
  kCapExceeded,
  kMissingFamily,
  kInfeasible,
  kOverflow,
  kParse,
};

constexpr std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidProfile: return "InvalidProfile";
    case ErrorCode::kMissingTransformCost: return "MissingTransformCost";
    case ErrorCode::kInvalidSelection: return "InvalidSelection";
    case ErrorCode::kInvalidRequest: return "InvalidRequest";
    case ErrorCode::kNotAChain: return "NotAChain";
    case ErrorCode::kCapExceeded: return "CapExceeded";
    case ErrorCode::kMissingFamily: return "MissingFamily";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

// All library failures are reported through this exception. The code lets
// callers (and the CLI exit-code mapping) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Durations are integer microseconds, memory is integer bytes.
using Duration = std::uint64_t;
using Bytes = std::uint64_t;

inline std::uint64_t CheckedAdd(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorCode::kOverflow, "64-bit accumulation overflow");
  }
  return out;
}

inline std::uint64_t CheckedMul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorCode::kOverflow, "64-bit multiplication overflow");
  }
  return out;
}

// Narrowing used when a cost enters a signed ILP coefficient.
inline std::int64_t ToCoefficient(std::uint64_t value) {
  if (value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw Error(ErrorCode::kOverflow, "cost does not fit a signed 64-bit coefficient");
  }
  return static_cast<std::int64_t>(value);
}

}  // namespace primsel

#endif  // PRIMSEL_ERROR_HPP_
