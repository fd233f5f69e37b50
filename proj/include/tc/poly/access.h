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

#include <optional>
#include <string>
#include <vector>

#include "tc/poly/affine.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace poly {

// One tensor reference of a statement with subscripts lowered to affine
// form over the statement's iterators. A data-dependent subscript (nested
// access, ternary, ...) has no affine form; such dims contribute no
// dependence equality and mark the access inexact.
struct AffineAccess {
  std::string tensor;
  bool write = false;
  // True for the left-hand side reference and for the implicit read a
  // reduction performs on its accumulator.
  bool lhs = false;
  std::vector<std::optional<AffineExpr>> subs;
  bool exact = true;
  SourceLoc loc;
};

struct StmtAccesses {
  std::vector<AffineAccess> all; // index 0 is the write
};

// Affine form of one subscript; nullopt when data-dependent. Int scalar
// parameters fold to their specialization-time values.
std::optional<AffineExpr> linearizeSubscript(
    const lang::ExprPtr& e,
    const sem::SpecializedDef& def,
    const sem::ConcreteStmt& cs);

// Per-statement access lists (parallel to def.stmts). The write comes
// first; reductions contribute an implicit accumulator read.
std::vector<StmtAccesses> buildAccesses(const sem::SpecializedDef& def);

} // namespace poly
} // namespace tc
