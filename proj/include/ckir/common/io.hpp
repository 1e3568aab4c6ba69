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
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace ckir {

/// Line-by-line text reader that tracks 1-based line numbers. Trailing CR is
/// removed. IoError if the file cannot be opened.
class LineReader {
 public:
    explicit LineReader(std::string path);

    bool
    Next(std::string& line);

    std::size_t
    line_no() const {
        return line_no_;
    }
    const std::string&
    path() const {
        return path_;
    }

 private:
    std::string path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
};

std::vector<std::string_view>
SplitTabs(std::string_view line);

/// Splits on runs of spaces and tabs.
std::vector<std::string_view>
SplitWhitespace(std::string_view line);

std::string
ReadFileBytes(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a half-written artifact.
void
WriteFileAtomic(const std::string& path, std::string_view bytes);

/// Little-endian binary encoding helpers.
class ByteWriter {
 public:
    void
    U8(std::uint8_t v) {
        buf_.push_back(static_cast<char>(v));
    }
    void
    U32(std::uint32_t v);
    void
    U64(std::uint64_t v);
    void
    F32(float v);
    void
    Varint(std::uint64_t v);
    void
    Bytes(std::string_view b) {
        buf_.append(b);
    }

    const std::string&
    str() const {
        return buf_;
    }

 private:
    std::string buf_;
};

/// Bounds-checked reader; running past the end raises FormatError naming `what`.
class ByteReader {
 public:
    ByteReader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {
    }

    std::uint8_t
    U8();
    std::uint32_t
    U32();
    std::uint64_t
    U64();
    float
    F32();
    std::uint64_t
    Varint();
    std::string_view
    Bytes(std::size_t n);

    bool
    AtEnd() const {
        return pos_ == bytes_.size();
    }
    std::size_t
    pos() const {
        return pos_;
    }

 private:
    void
    Need(std::size_t n);

    std::string_view bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

/// FNV-1a, 64-bit.
std::uint64_t
Fnv1a64(std::string_view bytes);

}  // namespace ckir
