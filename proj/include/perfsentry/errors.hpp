// Copyright 2026 The perfsentry Authors
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

namespace perfsentry {

// Base of every error raised by the library. Callers that only need to
// distinguish "bad data" from "bad usage" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveSample : public Error {
 public:
  explicit NonPositiveSample(std::size_t index)
      : Error("non-positive sample at index " + std::to_string(index)),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class EmptySample : public Error {
 public:
  EmptySample() : Error("empty sample") {}
};

// Zero variance with zero mean difference: the test carries no information.
class DegenerateVariance : public Error {
 public:
  explicit DegenerateVariance(double center = 0.0)
      : Error("degenerate variance"), center_(center) {}
  double center() const noexcept { return center_; }

 private:
  double center_;
};

class WindowTooShort : public Error {
 public:
  WindowTooShort(std::size_t have, std::size_t need)
      : Error("window of " + std::to_string(have) +
              " observations is shorter than required " +
              std::to_string(need)) {}
};

class UnsortedSeries : public Error {
 public:
  explicit UnsortedSeries(std::size_t index)
      : Error("series out of date order at index " + std::to_string(index)) {}
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptySegment : public Error {
 public:
  EmptySegment() : Error("empty segment") {}
};

class EmptyIntersection : public Error {
 public:
  EmptyIntersection() : Error("series share no dates") {}
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ZeroInput : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input text. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string file, std::size_t line)
      : Error(Locate(what, file, line)), file_(std::move(file)), line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 protected:
  static std::string Locate(const std::string& what, const std::string& file,
                            std::size_t line) {
    std::string loc = file.empty() ? std::string("<input>") : file;
    if (line > 0) loc += ":" + std::to_string(line);
    return loc + ": " + what;
  }

 private:
  std::string file_;
  std::size_t line_;
};

// Well-formed input that breaks a record invariant.
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SpawnError : public Error {
 public:
  using Error::Error;
};

class NonZeroExit : public Error {
 public:
  explicit NonZeroExit(int code)
      : Error("command exited with status " + std::to_string(code)),
        code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

}  // namespace perfsentry
