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

#include <memory>

#include "tc/backend/kernel_ir.h"
#include "tc/sched/tree.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace backend {

struct LoweringOptions {
  // Innermost loops whose combined trip count stays within the factor are
  // flagged for unrolling (rendered expanded in the emitted kernel text).
  int64_t unrollFactor = 1;
  // Flags every shared-copy loop regardless of the factor.
  bool unrollCopyShared = false;
};

/*
 * Lowers a mapped (and possibly promotion-rewritten) schedule tree to
 * kernel IR. Band members become loops over member values under their
 * tree labels; block- and thread-mapped members become strided loops
 * starting at the grid/block coordinate, which subsumes their mapping
 * filter's residue condition. Residues that cannot fold into a stride
 * (non-zero base offsets) and zero-padding conditions lower to explicit
 * conditionals. Extension nodes expand into copy-in loops, a barrier, the
 * body, a barrier, and for written groups copy-out loops plus a final
 * barrier (the trailing barrier keeps a block's next tile iteration from
 * overlapping the write-back). Shared-copy loops distribute buffer cells
 * across threads, last dimension on thread x; private copies walk each
 * thread's slice. Statement instances reconstruct their iterators as the
 * sum of tile-base and point loop variables.
 */
KernelIR lower(
    const sched::NodePtr& root,
    std::shared_ptr<const sem::SpecializedDef> def,
    const LoweringOptions& opts = {});

} // namespace backend
} // namespace tc
