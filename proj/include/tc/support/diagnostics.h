/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tc {

// A position in a .tc source buffer. Lines and columns are 1-based; a
// default-constructed location (line 0) means "no position available".
struct SourceLoc {
  uint32_t line = 0;
  uint32_t col = 0;

  bool valid() const {
    return line != 0;
  }
};

inline std::ostream& operator<<(std::ostream& os, const SourceLoc& loc) {
  return os << loc.line << ":" << loc.col;
}

// Machine-readable classification of every error the pipeline can diagnose.
// Tests match on the kind, messages are for humans.
enum class ErrorKind {
  // frontend
  Parse,
  Name,
  UnsupportedCall, // calling another def from a def
  // range inference and static checks
  UnderConstrained,
  Ambiguous,
  EmptyRange,
  LivenessInterference,
  OutOfBounds,
  UninitializedRead,
  // scheduling and mapping
  InvalidSchedule,
  NoParallelOuterBand,
  NotSinkable,
  MappingInvalid,
  // promotion
  PromotionBudget,
  PromotionLogic,
  // execution
  IndexOutOfRange,
  RaceDetected,
  BarrierDivergence,
  // tuner / cache / io
  DegeneratePopulation,
  NoViableCandidate,
  CorruptStore,
  MissingBinding,
  ShapeMismatch,
  Io,
  Internal,
};

const char* errorKindName(ErrorKind kind);

// Every diagnosed failure is thrown as an Error carrying a kind, an
// optional source location and a human-readable message. The CLI renders
// these as "file:line:col: message".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourceLoc loc = {})
      : std::runtime_error(std::move(message)), kind_(kind), loc_(loc) {}

  ErrorKind kind() const {
    return kind_;
  }
  SourceLoc loc() const {
    return loc_;
  }

 private:
  ErrorKind kind_;
  SourceLoc loc_;
};

[[noreturn]] inline void
throwError(ErrorKind kind, const std::string& message, SourceLoc loc = {}) {
  throw Error(kind, message, loc);
}

// Internal invariant check. Unlike Error, tripping one of these is a bug in
// the compiler, not in the user's program.
#define TC_CHECK(cond, msg)                                                \
  do {                                                                     \
    if (!(cond)) {                                                         \
      std::ostringstream tcCheckSs_;                                       \
      tcCheckSs_ << "internal check failed at " << __FILE__ << ":"         \
                 << __LINE__ << ": " << msg;                               \
      throw ::tc::Error(::tc::ErrorKind::Internal, tcCheckSs_.str());      \
    }                                                                      \
  } while (0)

// FNV-1a 64-bit hash; used for cache checksums and content fingerprints.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

} // namespace tc
