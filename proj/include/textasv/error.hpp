// Copyright 2026 The textasv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEXTASV_ERROR_HPP_
#define TEXTASV_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace textasv {

// Every failure the library reports. The CLI maps the category of a kind onto
// its exit code (data errors -> 2, numeric failures -> 3).
enum class ErrorKind {
  // corpus
  kMalformedRecord,
  kDuplicateUttId,
  kEmptyText,
  kInconsistentSex,
  kEmptyCorpus,
  kIo,
  // encoder
  kEmptyTrainingSet,
  kTokenIdOutOfRange,
  kTraceMismatch,
  kBadCheckpoint,
  kInvalidConfig,
  // aam head
  kZeroNormEmbedding,
  kZeroNormWeightRow,
  kTargetOutOfRange,
  // trainer
  kShapeMismatch,
  kTooFewSpeakers,
  kBatchTooLarge,
  kEmptyLog,
  // asv
  kZeroVector,
  kDimensionMismatch,
  kEmptyEnrollment,
  kMixedSpeakers,
  kNoPositivePairs,
  kNoNegativePairs,
  kOutOfRange,
  // attribution
  kInvalidTokenIds,
  kMissingThreshold,
  kMissingEnrollment,
  // synthetic corpus
  kVocabTooSmall,
};

std::string_view ErrorKindName(ErrorKind kind);

// True for failures caused by degenerate numbers rather than bad input data.
bool IsNumericError(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace textasv

#endif  // TEXTASV_ERROR_HPP_
