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

#include "ckir/common/error.hpp"

#include <fmt/format.h>

namespace ckir {

std::string_view
ErrorCodeName(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyCorpus:
            return "EmptyCorpus";
        case ErrorCode::EmptyDocument:
            return "EmptyDocument";
        case ErrorCode::AllMasked:
            return "AllMasked";
        case ErrorCode::NoPositives:
            return "NoPositives";
        case ErrorCode::UnknownDocument:
            return "UnknownDocument";
        case ErrorCode::NonPositiveImpact:
            return "NonPositiveImpact";
        case ErrorCode::ShapeMismatch:
            return "ShapeMismatch";
        case ErrorCode::NonFinite:
            return "NonFinite";
        case ErrorCode::NonScalarLoss:
            return "NonScalarLoss";
        case ErrorCode::InvalidArgument:
            return "InvalidArgument";
        case ErrorCode::IoError:
            return "IoError";
        case ErrorCode::FormatError:
            return "FormatError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", ErrorCodeName(code), message)), code_(code) {
}

void
Throw(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

void
ThrowFormat(std::string_view path, std::size_t line, const std::string& what) {
    throw Error(ErrorCode::FormatError, fmt::format("{}:{}: {}", path, line, what));
}

}  // namespace ckir
