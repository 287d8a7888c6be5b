/*
 * Copyright 2026 The revlabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REVLABEL_ERROR_HPP
#define REVLABEL_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace revlabel {

// Numeric values are mirrored by rl_status in revlabel.h; keep them in sync.
enum class ErrorCode {
  InvalidArgument = 1,
  UnreadableFile = 2,
  MissingField = 3,
  DuplicateId = 4,
  UnknownLabel = 5,
  ShotLabelUnknown = 6,
  ShotEqualsSample = 7,
  InsufficientClassSamples = 8,
  AuthMissing = 9,
  RateLimited = 10,
  TransportError = 11,
  MalformedResponse = 12,
  FixtureMiss = 13,
  DuplicateModelPrediction = 14,
  InsufficientPool = 15,
  MissingAppId = 16,
  UnknownRecord = 17,
  UnknownClass = 18,
  EmptyInput = 19,
  ClassTooSmall = 20,
  TrainerUnavailable = 21,
  TrainerFailed = 22,
  ValidationError = 23,
  AliasConflict = 24,
  SchemaViolation = 25,
  Internal = 26,
};

const char* to_string(ErrorCode code) noexcept;

// True for errors caused by bad inputs or configuration (CLI exit code 1),
// false for failures that happen while executing (exit code 2).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MissingFieldError : public Error {
 public:
  MissingFieldError(std::string field, std::size_t line);

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

class InsufficientPoolError : public Error {
 public:
  InsufficientPoolError(std::string category, std::size_t shortfall);

  const std::string& category() const noexcept { return category_; }
  std::size_t shortfall() const noexcept { return shortfall_; }

 private:
  std::string category_;
  std::size_t shortfall_;
};

}  // namespace revlabel

#endif  // REVLABEL_ERROR_HPP
