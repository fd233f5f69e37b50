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

#include <map>
#include <string>
#include <vector>

#include "tc/backend/tensor_data.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace backend {

/*
 * Expression evaluation shared by the reference interpreter and the
 * emulator. Integer bindings cover iterators, loop variables, grid/block
 * coordinates, size symbols and int scalars; float scalars live in a
 * separate map. Memory access is abstracted so the emulator can route
 * names to shared/private buffers and record accesses for race detection.
 */
struct EvalEnv {
  std::map<std::string, int64_t> ints;
  const ScalarMap* scalars = nullptr;
  const sem::SpecializedDef* def = nullptr; // shapes, for dimension-of
};

class MemoryModel {
 public:
  virtual ~MemoryModel() = default;
  // Both check bounds against the space's shape and throw
  // Error(IndexOutOfRange) on violation (reachable through data-dependent
  // subscripts only; affine subscripts were checked statically).
  virtual double load(
      const std::string& space,
      const std::vector<int64_t>& idx,
      const SourceLoc& loc) = 0;
  virtual void store(
      const std::string& space,
      const std::vector<int64_t>& idx,
      double v,
      const SourceLoc& loc) = 0;
};

// Full-precision scalar evaluation; tensor loads widen to double.
double evalValue(const lang::Expr& e, const EvalEnv& env, MemoryModel& mem);
// Integer evaluation for subscripts (iterators, int scalars, int tensor
// loads, +, -, *, / and ternaries).
int64_t evalIndex(const lang::Expr& e, const EvalEnv& env, MemoryModel& mem);

/*
 * Executes one statement instance: evaluates the left-hand subscripts,
 * applies the assignment operator (reductions read the accumulator, fold
 * in double, and narrow on store) and routes every access through the
 * memory model.
 */
void executeStmtInstance(
    const sem::SpecializedDef& def,
    size_t stmtIdx,
    const EvalEnv& env,
    MemoryModel& mem);

/*
 * The oracle: runs the specialized definition in textual statement order
 * with loops in canonical nesting (left-hand iterators outer, reduction
 * iterators inner). Inputs must match the inferred shapes; returns may be
 * seeded through `inputs` (they are in/out), otherwise they start at
 * zero, as do temporaries. The result holds the full final storage,
 * inputs included.
 */
TensorMap interpretReference(
    const sem::SpecializedDef& def,
    const TensorMap& inputs,
    const ScalarMap& scalars);

/*
 * Builds the storage map interpretReference and the emulator both start
 * from: copies every input (shape-checked, Error(Io) on mismatch), seeds
 * returns from `inputs` when present, and zero-fills the rest.
 */
TensorMap initialStorage(const sem::SpecializedDef& def, const TensorMap& inputs);

} // namespace backend
} // namespace tc
