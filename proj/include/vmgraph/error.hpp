// Copyright 2026 The vmgraph Authors
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

namespace vmg {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or lengths of inputs disagree (joint counts, frame counts, mask sizes).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A value is outside its documented domain (non-finite, negative, out of range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A serialized document or stream could not be decoded.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// No path satisfies the feature and duration constraints of one target segment.
class SegmentUnreachableError : public Error {
 public:
  explicit SegmentUnreachableError(std::size_t segment)
      : Error("segment " + std::to_string(segment) +
              " is unreachable: no path ends on a matching node within the duration window"),
        segment_(segment) {}

  std::size_t segment() const noexcept { return segment_; }

 private:
  std::size_t segment_;
};

/// A search result cannot be turned into an edit decision list or preview.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vmg
