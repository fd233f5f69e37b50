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
#include <string>
#include <vector>

#include "tc/poly/dependence.h"
#include "tc/sched/tree.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace sched {

/* Where one statement instance lands under a schedule: its block and
 * thread coordinates and the sequential time stamps collected along the
 * root-to-leaf path (band member values and sequence positions, in path
 * order). Time stamps compare lexicographically between instances that
 * share the tree prefix. */
struct Placement {
  std::array<int64_t, 3> block{{0, 0, 0}};
  std::array<int64_t, 3> thread{{0, 0, 0}};
  std::vector<int64_t> time;
};

Placement placementOf(
    const NodePtr& root,
    const sem::SpecializedDef& def,
    size_t stmt,
    const std::vector<int64_t>& point);

struct Violation {
  size_t edgeIdx = 0;
  std::string reason; // cross-block | cross-thread | time order
  std::vector<int64_t> src;
  std::vector<int64_t> dst;
  std::string str(const sem::SpecializedDef& def, const poly::Dependences& deps) const;
};

/* Checks every dependence edge against the schedule. A dependence that
 * crosses blocks is a violation; one that crosses threads of the same
 * block is a violation (trees carry no intra-block synchronization at
 * this stage); on a single thread the destination must run strictly
 * after the source. Relaxable edges (reduction self-dependences) only
 * need both endpoints on the same block and thread. Refined edges are
 * checked pair by pair, the rest through per-locus constraint systems
 * with a witness extracted from the first nonempty one. */
std::vector<Violation> validateSchedule(
    const NodePtr& root,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps);

} // namespace sched
} // namespace tc
