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

#include <string>
#include <vector>

#include "tc/poly/access.h"

namespace tc {
namespace poly {

// How source and destination instances of a dependence are ordered by the
// original program: statements execute as whole nests in textual order, and
// instances of one nest execute in lexicographic iterator order.
enum class OrderMode {
  TextualForward, // src statement textually precedes dst; all instance pairs
  LexForward, // same statement; src instance lexicographically precedes dst
};

struct DepEdge {
  size_t src = 0;
  size_t dst = 0;
  size_t srcAcc = 0;
  size_t dstAcc = 0;
  std::string tensor;
  OrderMode order = OrderMode::TextualForward;
  // Accumulator self-dependence of an associative reduction: a schedule may
  // reorder these instances as long as it keeps them on one thread.
  bool relaxable = false;
  // False when a data-dependent subscript forced a dimension to be
  // over-approximated (no equality for that dimension).
  bool exact = true;
  // When true, `pairs` lists exactly the (producer, consumer) instances:
  // last-writer refinement has replaced the memory-based approximation.
  bool refined = false;
  std::vector<std::pair<std::vector<int64_t>, std::vector<int64_t>>> pairs;
};

struct Dependences {
  std::vector<StmtAccesses> accesses; // parallel to def.stmts
  std::vector<DepEdge> edges;
};

/*
 * Memory-based dependence analysis between all access pairs that touch the
 * same tensor with at least one write, followed by last-writer flow
 * refinement (capped enumeration) that prunes transitively overwritten
 * read-after-write edges to explicit instance pairs.
 */
Dependences computeDependences(const sem::SpecializedDef& def);

// Box bounds and subscript equalities of an edge, source instance variables
// prefixed `srcPrefix`, destination `dstPrefix`. Order constraints are NOT
// included.
LinearSystem edgeBaseSystem(
    const sem::SpecializedDef& def,
    const Dependences& deps,
    const DepEdge& edge,
    const std::string& srcPrefix = "a.",
    const std::string& dstPrefix = "b.");

// The edge's order condition as a disjunction of conjunctive systems: the
// base system per branch, plus "equal up to depth d, strictly less at d"
// for LexForward edges. TextualForward edges yield the base system alone.
std::vector<LinearSystem> edgeOrderSystems(
    const sem::SpecializedDef& def,
    const Dependences& deps,
    const DepEdge& edge,
    const std::string& srcPrefix = "a.",
    const std::string& dstPrefix = "b.");

struct InstancePair {
  std::vector<int64_t> src;
  std::vector<int64_t> dst;
};

// Explicit instance pairs realizing the edge, up to `cap`: the refined list
// when available, otherwise enumeration of the boxes filtered by subscript
// equality and order. Tests use this as the oracle for the constraint
// systems.
std::vector<InstancePair> enumeratePairs(
    const sem::SpecializedDef& def,
    const Dependences& deps,
    const DepEdge& edge,
    int64_t cap);

} // namespace poly
} // namespace tc
