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

#include "tc/lang/ast.h"
#include "tc/poly/affine.h"
#include "tc/sched/tree.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace promo {

lang::ExprPtr cloneExpr(const lang::ExprPtr& e);

/* Builds the syntax for an affine expression; its variables (loop labels
 * like "@c0" or thread ids like "@tx") must be bound by the evaluator. */
lang::ExprPtr affineToAst(const poly::AffineExpr& e);

/* Redirects every access to the group's tensor inside the statement to
 * the buffer, with subscripts localized against the group's offsets (and
 * thread-sliced for private groups). */
void rewriteStmtAccesses(sem::ConcreteStmt& cs, const sched::PromotedGroup& group);

/* Places an extension node carrying the groups between the filter and its
 * children. */
void insertExtension(sched::NodePtr& filter, std::vector<sched::PromotedGroup> groups);

/* Marks a barrier between consecutive sequence children that both touch a
 * written shared group (the copies themselves are already fenced). */
void markBarriers(
    sched::NodePtr& node,
    const sem::SpecializedDef& def,
    const std::vector<sched::PromotedGroup>& groups);

} // namespace promo
} // namespace tc
