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

#include "textasv/error.hpp"

namespace textasv {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedRecord: return "MalformedRecord";
    case ErrorKind::kDuplicateUttId: return "DuplicateUttId";
    case ErrorKind::kEmptyText: return "EmptyText";
    case ErrorKind::kInconsistentSex: return "InconsistentSex";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::kTokenIdOutOfRange: return "TokenIdOutOfRange";
    case ErrorKind::kTraceMismatch: return "TraceMismatch";
    case ErrorKind::kBadCheckpoint: return "BadCheckpoint";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kZeroNormEmbedding: return "ZeroNormEmbedding";
    case ErrorKind::kZeroNormWeightRow: return "ZeroNormWeightRow";
    case ErrorKind::kTargetOutOfRange: return "TargetOutOfRange";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kTooFewSpeakers: return "TooFewSpeakers";
    case ErrorKind::kBatchTooLarge: return "BatchTooLarge";
    case ErrorKind::kEmptyLog: return "EmptyLog";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptyEnrollment: return "EmptyEnrollment";
    case ErrorKind::kMixedSpeakers: return "MixedSpeakers";
    case ErrorKind::kNoPositivePairs: return "NoPositivePairs";
    case ErrorKind::kNoNegativePairs: return "NoNegativePairs";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kInvalidTokenIds: return "InvalidTokenIds";
    case ErrorKind::kMissingThreshold: return "MissingThreshold";
    case ErrorKind::kMissingEnrollment: return "MissingEnrollment";
    case ErrorKind::kVocabTooSmall: return "VocabTooSmall";
  }
  return "Unknown";
}

bool IsNumericError(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroNormEmbedding:
    case ErrorKind::kZeroNormWeightRow:
    case ErrorKind::kZeroVector:
    case ErrorKind::kNoPositivePairs:
    case ErrorKind::kNoNegativePairs:
      return true;
    default:
      return false;
  }
}

}  // namespace textasv
