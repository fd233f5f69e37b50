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

#include "tc/poly/dependence.h"
#include "tc/sched/tree.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace sched {

enum class FusionStrategy {
  Max, // fuse adjacent branches whenever legal
  Min, // keep every statement in its own branch
  PreserveThreeParallel, // fuse only when >= 3 fused members stay parallel
};

FusionStrategy fusionStrategyFromString(const std::string& s);
std::string fusionStrategyToString(FusionStrategy s);

/* Greedy pairwise fusion of adjacent sequence branches. Band members of
 * the two branches correspond when some tensor dimension is subscripted
 * by exactly those members on both sides; fusing is legal when no
 * dependence between the branches has a lexicographically negative
 * distance on the corresponded members. Leftover members stay in inner
 * per-branch bands and the inner sequence keeps textual order. Applies
 * recursively to the sequences fusion creates. */
void fuseTree(
    NodePtr& root,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    FusionStrategy strategy);

/* Tiles bands in depth-first order with one global size cursor per
 * root-to-leaf path: a band with n members consumes n entries. Members
 * whose entry exists and is positive split into a TileFloor member in the
 * outer band and a Mod member in the inner point band; other members stay
 * in the point band unchanged. */
void tileTree(NodePtr& root, const std::vector<int64_t>& sizes);

/* Moves the coincident members of point bands (created by tileTree) to
 * the bottom of every sequence branch below them. Bands created by the
 * same pass join; crossing an extension or set node is not sinkable. */
void sinkPointLoops(NodePtr& root);

/* Inserts the context node, cyclically distributes each branch's
 * outermost band over grid blocks (tileIdx = b mod gridDim along each
 * mapped dimension), and residue-maps the coincident members of each
 * branch's innermost permutable band onto threads, first member to
 * thread x. Branches that consume fewer thread dimensions than others
 * get zero filters for the rest. */
void mapToGpu(
    NodePtr& root,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    std::array<int64_t, 3> grid,
    std::array<int64_t, 3> block);

} // namespace sched
} // namespace tc
