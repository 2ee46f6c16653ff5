/*
 * Copyright 2026 The SciQA Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SCIQA_ERROR_HPP_
#define SCIQA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace sciqa {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kField,
  kDuplicateKey,
  kNotFound,
  kEmptyDocument,
  kEmptyCorpus,
  kEmptyIndex,
  kEmptyInput,
  kNotFitted,
  kDomain,
  kRemoteUnavailable,
  kProtocolViolation,
  kCycle,
  kDanglingNode,
  kInvalidDataset,
  kTooSmall,
  kAmbiguity,
  kAlignment,
  kIo,
  kVersionMismatch,
  kIntegrity,
  kStage,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kField: return "field-error";
    case ErrorCode::kDuplicateKey: return "duplicate-key";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kEmptyDocument: return "empty-document";
    case ErrorCode::kEmptyCorpus: return "empty-corpus";
    case ErrorCode::kEmptyIndex: return "empty-index";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kNotFitted: return "not-fitted";
    case ErrorCode::kDomain: return "domain-error";
    case ErrorCode::kRemoteUnavailable: return "remote-unavailable";
    case ErrorCode::kProtocolViolation: return "protocol-violation";
    case ErrorCode::kCycle: return "cycle";
    case ErrorCode::kDanglingNode: return "dangling-node";
    case ErrorCode::kInvalidDataset: return "invalid-dataset";
    case ErrorCode::kTooSmall: return "too-small";
    case ErrorCode::kAmbiguity: return "ambiguity";
    case ErrorCode::kAlignment: return "alignment-error";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kIntegrity: return "integrity-error";
    case ErrorCode::kStage: return "stage-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit paths, HTTP handlers, tests) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

  /// Same code, message prefixed with where it happened.
  Error WithContext(const std::string& context) const {
    return Error(code_, context + ": " + message_);
  }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace sciqa

#endif  // SCIQA_ERROR_HPP_
