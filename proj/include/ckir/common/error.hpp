// Copyright 2026-present the ckir authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ckir {

enum class ErrorCode {
    // domain errors
    EmptyCorpus,
    EmptyDocument,
    AllMasked,
    NoPositives,
    UnknownDocument,
    NonPositiveImpact,
    ShapeMismatch,
    NonFinite,
    NonScalarLoss,
    InvalidArgument,
    // input/output errors
    IoError,
    FormatError,
};

std::string_view
ErrorCodeName(ErrorCode code);

/// Every failure raised by the library. `IsIoError()` separates bad inputs
/// and unreadable files from failures of the computation itself.
class Error : public std::runtime_error {
 public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode
    code() const noexcept {
        return code_;
    }

    bool
    IsIoError() const noexcept {
        return code_ == ErrorCode::IoError || code_ == ErrorCode::FormatError;
    }

 private:
    ErrorCode code_;
};

[[noreturn]] void
Throw(ErrorCode code, const std::string& message);

/// FormatError naming `path:line`.
[[noreturn]] void
ThrowFormat(std::string_view path, std::size_t line, const std::string& what);

}  // namespace ckir
