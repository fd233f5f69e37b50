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
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tc/lang/ast.h"

namespace tc {
namespace backend {

/*
 * Runtime tensor: element kind, shape, row-major storage. Float tensors
 * hold 32-bit IEEE values, int tensors 32-bit signed values; arithmetic
 * happens in double and narrows on store, which keeps reductions stable
 * while preserving float32 output semantics.
 */
struct TensorData {
  lang::ElemKind elemKind = lang::ElemKind::Float;
  std::vector<int64_t> shape;
  std::vector<float> f;
  std::vector<int32_t> i;

  static TensorData zeros(lang::ElemKind kind, std::vector<int64_t> shape);

  int64_t volume() const;
  // Row-major linearization. Indices must be in bounds.
  int64_t linearize(const std::vector<int64_t>& idx) const;

  double load(int64_t linear) const;
  void store(int64_t linear, double v); // narrows per element kind
};

// Narrowing rule shared by every execution path: floats round to float32,
// ints saturate to int32 and truncate toward zero (NaN becomes 0).
int32_t narrowInt(double v);

using TensorMap = std::map<std::string, TensorData>;
using ScalarMap = std::map<std::string, double>; // float scalar parameters

/*
 * Tensor file format: the 5-byte magic "TCTN1" (version folded into the
 * magic), one byte element kind ('f' or 'i'), one byte rank, rank
 * little-endian int64 extents, then volume 4-byte little-endian values
 * (float bits / int32). Read failures and malformed headers throw
 * Error(Io).
 */
void writeTensorFile(const std::string& path, const TensorData& t);
TensorData readTensorFile(const std::string& path);

// Deterministic uniform fill: floats uniform in [lo, hi), ints uniform
// over the integers of [lo, hi).
void fillUniform(TensorData& t, std::mt19937_64& rng, double lo, double hi);

bool bitEqual(const TensorData& a, const TensorData& b);
// max over elements of |got - ref| / max(|ref|, 1); infinity on shape or
// kind mismatch.
double maxRelError(const TensorData& ref, const TensorData& got);

} // namespace backend
} // namespace tc
