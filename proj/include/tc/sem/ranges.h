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
#include <set>
#include <string>
#include <vector>

#include "tc/lang/validate.h"
#include "tc/sem/size_expr.h"

namespace tc {
namespace sem {

// Inferred iteration ranges for one statement. Iterators of different
// statements are unrelated even when they share a name.
struct StmtRanges {
  std::vector<std::string> iterators; // first-use order
  std::map<std::string, SymRange> ranges;

  const SymRange& at(const std::string& iter) const;
};

struct InferredRanges {
  // Every tensor of the def, inputs included. Outputs and temporaries get
  // the extents of their first resolved writer's left-hand side iterators;
  // returns that are read but never written get fresh symbols "T__d".
  std::map<std::string, std::vector<SizeExpr>> shapes;
  std::vector<StmtRanges> stmts; // parallel to def.stmts
  std::set<std::string> sizeSymbols; // declared plus synthesized
};

/*
 * Whole-def range inference.
 *
 * Runs rounds to a global fixpoint. Within a round, each subscript of an
 * access to a tensor of known shape proposes a range for its single
 * not-yet-resolved iterator by requiring 0 <= subscript <= extent-1 for
 * every value the already-resolved iterators can take; `where` clauses
 * propose their interval directly. Proposals for the same iterator made in
 * the same round intersect; once a round commits an iterator its range is
 * final. A written tensor's shape is fixed at the end of the first round in
 * which one of its writers has every left-hand side iterator resolved.
 *
 * Iterators are never negative: every committed lower bound is clamped to
 * zero.
 *
 * Throws Error(UnderConstrained) when the fixpoint leaves an iterator
 * unresolved, Error(Ambiguous) when same-round writers disagree on a shape
 * or a subscript coefficient's sign cannot be decided, and
 * Error(EmptyRange) when a committed range is provably empty.
 */
InferredRanges inferRanges(const lang::ValidatedDef& vdef);

} // namespace sem
} // namespace tc
