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

#include "ckir/common/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "ckir/common/error.hpp"

namespace ckir {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

LineReader::LineReader(std::string path) : path_(std::move(path)), in_(path_) {
    if (!in_) {
        Throw(ErrorCode::IoError, "cannot open '" + path_ + "'");
    }
}

bool
LineReader::Next(std::string& line) {
    if (!std::getline(in_, line)) {
        return false;
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

std::vector<std::string_view>
SplitTabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::vector<std::string_view>
SplitWhitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

std::string
ReadFileBytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Throw(ErrorCode::IoError, "cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void
WriteFileAtomic(const std::string& path, std::string_view bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            Throw(ErrorCode::IoError, "cannot write '" + path + "'");
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            Throw(ErrorCode::IoError, "short write to '" + path + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        Throw(ErrorCode::IoError, "cannot replace '" + path + "'");
    }
}

void
ByteWriter::U32(std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    buf_.append(b, 4);
}

void
ByteWriter::U64(std::uint64_t v) {
    char b[8];
    std::memcpy(b, &v, 8);
    buf_.append(b, 8);
}

void
ByteWriter::F32(float v) {
    U32(std::bit_cast<std::uint32_t>(v));
}

void
ByteWriter::Varint(std::uint64_t v) {
    while (v >= 0x80) {
        U8(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    U8(static_cast<std::uint8_t>(v));
}

void
ByteReader::Need(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
        Throw(ErrorCode::FormatError, what_ + ": truncated at byte " + std::to_string(pos_));
    }
}

std::uint8_t
ByteReader::U8() {
    Need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
}

std::uint32_t
ByteReader::U32() {
    Need(4);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

std::uint64_t
ByteReader::U64() {
    Need(8);
    std::uint64_t v;
    std::memcpy(&v, bytes_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

float
ByteReader::F32() {
    return std::bit_cast<float>(U32());
}

std::uint64_t
ByteReader::Varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        const std::uint8_t b = U8();
        v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
        if ((b & 0x80) == 0) {
            return v;
        }
    }
    Throw(ErrorCode::FormatError, what_ + ": overlong varint at byte " + std::to_string(pos_));
}

std::string_view
ByteReader::Bytes(std::size_t n) {
    Need(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
}

std::uint64_t
Fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace ckir
