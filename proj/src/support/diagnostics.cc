/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/support/diagnostics.h"

namespace tc {

const char* errorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
      return "ParseError";
    case ErrorKind::Name:
      return "NameError";
    case ErrorKind::UnsupportedCall:
      return "UnsupportedCall";
    case ErrorKind::UnderConstrained:
      return "UnderConstrained";
    case ErrorKind::Ambiguous:
      return "Ambiguous";
    case ErrorKind::EmptyRange:
      return "EmptyRange";
    case ErrorKind::LivenessInterference:
      return "LivenessInterference";
    case ErrorKind::OutOfBounds:
      return "OutOfBounds";
    case ErrorKind::UninitializedRead:
      return "UninitializedRead";
    case ErrorKind::InvalidSchedule:
      return "InvalidSchedule";
    case ErrorKind::NoParallelOuterBand:
      return "NoParallelOuterBand";
    case ErrorKind::NotSinkable:
      return "NotSinkable";
    case ErrorKind::MappingInvalid:
      return "MappingInvalid";
    case ErrorKind::PromotionBudget:
      return "PromotionBudget";
    case ErrorKind::PromotionLogic:
      return "PromotionLogic";
    case ErrorKind::IndexOutOfRange:
      return "IndexOutOfRange";
    case ErrorKind::RaceDetected:
      return "RaceDetected";
    case ErrorKind::BarrierDivergence:
      return "BarrierDivergence";
    case ErrorKind::DegeneratePopulation:
      return "DegeneratePopulation";
    case ErrorKind::NoViableCandidate:
      return "NoViableCandidate";
    case ErrorKind::CorruptStore:
      return "CorruptStore";
    case ErrorKind::MissingBinding:
      return "MissingBinding";
    case ErrorKind::ShapeMismatch:
      return "ShapeMismatch";
    case ErrorKind::Io:
      return "IoError";
    case ErrorKind::Internal:
      return "InternalError";
  }
  return "UnknownError";
}

} // namespace tc
