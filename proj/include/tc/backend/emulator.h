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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tc/backend/kernel_ir.h"
#include "tc/backend/tensor_data.h"

namespace tc {
namespace backend {

// One detected conflict: two distinct threads of a block touched the same
// cell between consecutive barriers with at least one write, or two
// distinct blocks touched the same global cell with at least one write.
struct RaceRecord {
  std::string space; // tensor or promoted buffer
  int64_t index = 0; // row-major cell
  int writer = -1; // linear thread id (intra-block) or block id (cross)
  int other = -1;
  int phase = 0;
  std::array<int64_t, 3> block{{0, 0, 0}};
  bool crossBlock = false;

  std::string str() const;
};

struct EmulationResult {
  TensorMap storage; // final global memory, inputs included
  std::vector<RaceRecord> races;
  // Emulated-work cost: executed compute/copy statements of the slowest
  // block plus 32 per barrier crossing in that block.
  int64_t cost = 0;
  int64_t totalStatements = 0;
  int64_t totalBarrierCrossings = 0;
};

/*
 * Deterministic grid emulation. Blocks run sequentially; within a block,
 * execution proceeds in barrier-delimited phases and the threads of a
 * phase interleave round-robin per IR statement. Shared buffers are
 * per-block and zero-initialized, private buffers per-thread. The race
 * detector tracks per-cell accessors within each phase and across blocks
 * for global memory; conflicts are reported, not fatal. Throws
 * Error(BarrierDivergence) when threads of one block reach different
 * barrier sequences, Error(IndexOutOfRange) on data-dependent subscripts
 * escaping a tensor, and Error(MappingInvalid) on a grid/block shape the
 * machine model rejects (thread product above 1024).
 */
EmulationResult emulate(const KernelIR& ir, const TensorMap& inputs, const ScalarMap& scalars);

} // namespace backend
} // namespace tc
