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
#include <memory>
#include <string>
#include <vector>

#include "tc/poly/affine.h"
#include "tc/sched/tree.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace backend {

/*
 * Kernel IR: the executable form of a mapped schedule tree. A kernel is a
 * grid/block shape, buffer declarations, and a statement list built from
 * five node kinds. Loops have concrete extents; only a loop's lower bound
 * may reference the environment (thread/block coordinates of strided
 * residue loops). Barriers carry unique ids so tests can knock out a
 * specific one. The IR is evaluated against an integer environment that
 * binds grid/block coordinates ("@bx".."@bz", "@tx".."@tz"), loop
 * variables (band members keep their tree labels "@c0"..., copy loops use
 * "@p0"...), and the definition's size symbols.
 */
enum class IrKind { Loop, Cond, Compute, Copy, Barrier };

// Residue predicate: modPos(floorDiv(lhs, divisor), modulus) == rhs, where
// rhs is an environment variable (block/thread coordinate) or a constant.
struct IrCond {
  poly::AffineExpr lhs;
  int64_t divisor = 1;
  int64_t modulus = 1;
  std::string rhsVar; // empty -> compare against rhsConst
  int64_t rhsConst = 0;
};

struct IrNode;
using IrPtr = std::shared_ptr<IrNode>;

struct IrNode {
  IrKind kind = IrKind::Loop;

  // Loop: var in { lo, lo+step, ... } < hi
  std::string var;
  poly::AffineExpr lo;
  int64_t hi = 0; // exclusive
  int64_t step = 1;
  bool unroll = false;
  bool copyLoop = false; // belongs to a promotion copy nest
  std::vector<IrPtr> body; // Loop, Cond

  // Cond: conjunction
  std::vector<IrCond> conds;

  // Compute: one statement instance; every iterator reconstructs as the
  // sum of the listed loop variables (tile base + point offset). Instances
  // whose reconstructed iterators fall outside the statement's ranges are
  // skipped (fused hull loops may overshoot an individual statement).
  size_t stmt = 0;
  std::vector<std::pair<std::string, std::vector<std::string>>> iterSum;

  // Copy: one promoted-buffer cell, addressed by the surrounding copy
  // loops (copyVars aligns with the group's flattened buffer dimensions).
  std::shared_ptr<const sched::PromotedGroup> group;
  bool copyIn = true;
  std::vector<std::string> copyVars;

  // Barrier
  int barrierId = -1;
};

struct BufferDecl {
  std::string name;
  std::string tensor; // the global tensor the buffer caches
  lang::ElemKind elemKind = lang::ElemKind::Float;
  std::vector<int64_t> shape;
  bool sharedMem = true; // else per-thread private
  std::shared_ptr<const sched::PromotedGroup> group;
};

struct KernelIR {
  std::string name;
  std::array<int64_t, 3> grid{{1, 1, 1}};
  std::array<int64_t, 3> block{{1, 1, 1}};
  std::vector<BufferDecl> sharedBufs;
  std::vector<BufferDecl> privateBufs;
  std::vector<IrPtr> body;
  int barrierCount = 0; // ids are 0 .. barrierCount-1
  // The (promotion-rewritten) definition the Compute nodes index into.
  std::shared_ptr<const sem::SpecializedDef> def;
};

IrPtr makeIr(IrKind kind);

// Structural dump, one node per line; the backend golden tests pin it.
std::string dumpIr(const KernelIR& ir);

// Removes the barrier with the given id wherever it appears (mutation
// fixture for the race-detection tests). Returns true when found.
bool deleteBarrier(KernelIR& ir, int id);

} // namespace backend
} // namespace tc
