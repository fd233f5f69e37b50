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

#include "tc/sched/tree.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace promo {

struct PromotionOptions {
  bool useShared = false;
  bool usePrivate = false;
  size_t sharedBudget = 48 * 1024; // bytes of shared storage per block
};

struct PromotionResult {
  size_t sharedBytes = 0;
  size_t privateBytesPerThread = 0;
  std::vector<sched::PromotedGroup> sharedGroups;
  std::vector<sched::PromotedGroup> privateGroups;
};

/* Promotes profitable tensor accesses below each block-mapped band into
 * shared (per block) or private (per thread) buffers.
 *
 * Every access gets an analytic array tile per tensor dimension: iterators
 * fixed by the block band contribute an affine offset in that band's loop
 * variables, free iterators widen the constant extent, and the whole
 * dimension wins when it is narrower. Data-dependent subscripts expand
 * into one buffer dimension per iterator of the subscript, provided the
 * arrays involved are read-only. Accesses with identical tiles form a
 * group; read-only groups of one tensor merge when their bounding box is
 * smaller than the sum of their tiles. A tensor with a write and several
 * distinct tiles, or any access without a tile, stays in global memory.
 *
 * A group moves to shared memory when some element is accessed at least
 * twice per block (counted by enumerating one representative block) and
 * some access is non-coalesced, i.e. the innermost tensor dimension does
 * not ride thread x; indirect groups skip both tests since the reuse sits
 * behind the index values. Selection is greedy by decreasing reuse x size;
 * groups that would overflow the budget stay in global memory. Written
 * groups whose cells each belong to exactly one thread may instead go to
 * private per-thread storage when enabled.
 *
 * Inserts extension nodes below the block filters, rewrites the promoted
 * accesses in `def` to buffer accesses (local subscripts), and marks
 * barriers between sequence children that share a written group. */
PromotionResult promote(
    sched::NodePtr& root,
    sem::SpecializedDef& def,
    const PromotionOptions& options);

} // namespace promo
} // namespace tc
