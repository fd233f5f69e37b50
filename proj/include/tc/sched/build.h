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

#include "tc/poly/dependence.h"
#include "tc/sched/tree.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace sched {

/* Canonical schedule: a domain over all statements, a sequence in textual
 * order, and one full permutable band per statement (its iterators in
 * canonical loop order). Coincidence flags come from the dependences. */
NodePtr buildCanonicalTree(const sem::SpecializedDef& def, const poly::Dependences& deps);

/* True when no dependence between the given statements separates two
 * instances that disagree on the member function's value. Refined edges
 * are checked pair-by-pair; the rest through emptiness of their order
 * systems. Edges whose endpoints both lie outside `stmts`, and member
 * functions that do not cover an edge's endpoints, are ignored. */
bool memberCoincident(
    const poly::Dependences& deps,
    const sem::SpecializedDef& def,
    const std::set<size_t>& stmts,
    const std::map<size_t, poly::AffineExpr>& fn);

/* Full band for one statement: one plain member per iterator. */
NodePtr makeStmtBand(
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    size_t stmtIdx);

} // namespace sched
} // namespace tc
