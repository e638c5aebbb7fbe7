// Copyright 2026 The KKT-Net Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kktnet {

enum class ErrorCode {
  kInvalidArgument,
  kAllZeroInstance,
  kDimensionMismatch,
  kEmptyBatch,
  kMissingGroundTruth,
  kUnsupportedShape,
  kGenerationExhausted,
  kIo,
  kMalformedRecord,
  kTooFewExamples,
  kShapeMismatch,
  kEmptyDataset,
  kEmptyTestSet,
};

inline const char* error_code_name(ErrorCode code);

// Every failure in the library surfaces as an Error carrying its code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class MalformedRecordError : public Error {
 public:
  MalformedRecordError(std::size_t line, const std::string& reason)
      : Error(ErrorCode::kMalformedRecord,
              "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kAllZeroInstance: return "AllZeroInstance";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kUnsupportedShape: return "UnsupportedShape";
    case ErrorCode::kGenerationExhausted: return "GenerationExhausted";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kTooFewExamples: return "TooFewExamples";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kEmptyTestSet: return "EmptyTestSet";
  }
  return "Unknown";
}

}  // namespace kktnet
