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

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>

#include "ckir/common/error.hpp"

namespace ckir::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("ckir-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir&
    operator=(const TempDir&) = delete;

    std::string
    File(const std::string& name) const {
        return (path_ / name).string();
    }

    std::string
    Write(const std::string& name, const std::string& content) const {
        const std::string p = File(name);
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

 private:
    std::filesystem::path path_;
};

/// Runs `fn` and returns the code of the ckir::Error it throws; fails the
/// caller's expectation through the returned optional being empty otherwise.
template <typename Fn>
std::optional<ErrorCode>
CaptureError(Fn&& fn, std::string* message = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (message != nullptr) {
            *message = e.what();
        }
        return e.code();
    }
    return std::nullopt;
}

}  // namespace ckir::testing
