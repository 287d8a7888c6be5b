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

#include "revlabel/error.hpp"

namespace revlabel {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::ShotLabelUnknown: return "ShotLabelUnknown";
    case ErrorCode::ShotEqualsSample: return "ShotEqualsSample";
    case ErrorCode::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::DuplicateModelPrediction: return "DuplicateModelPrediction";
    case ErrorCode::InsufficientPool: return "InsufficientPool";
    case ErrorCode::MissingAppId: return "MissingAppId";
    case ErrorCode::UnknownRecord: return "UnknownRecord";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::TrainerUnavailable: return "TrainerUnavailable";
    case ErrorCode::TrainerFailed: return "TrainerFailed";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::AliasConflict: return "AliasConflict";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnreadableFile:
    case ErrorCode::MissingField:
    case ErrorCode::DuplicateId:
    case ErrorCode::UnknownLabel:
    case ErrorCode::ShotLabelUnknown:
    case ErrorCode::ShotEqualsSample:
    case ErrorCode::InsufficientClassSamples:
    case ErrorCode::AuthMissing:
    case ErrorCode::UnknownClass:
    case ErrorCode::EmptyInput:
    case ErrorCode::ClassTooSmall:
    case ErrorCode::ValidationError:
    case ErrorCode::AliasConflict:
    case ErrorCode::SchemaViolation:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

MissingFieldError::MissingFieldError(std::string field, std::size_t line)
    : Error(ErrorCode::MissingField,
            "missing field '" + field + "' at line " + std::to_string(line)),
      field_(std::move(field)),
      line_(line) {}

InsufficientPoolError::InsufficientPoolError(std::string category,
                                             std::size_t shortfall)
    : Error(ErrorCode::InsufficientPool,
            "pool too small for " + category + ": short by " +
                std::to_string(shortfall)),
      category_(std::move(category)),
      shortfall_(shortfall) {}

}  // namespace revlabel
