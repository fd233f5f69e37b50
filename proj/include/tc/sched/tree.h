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
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tc/lang/ast.h"
#include "tc/poly/affine.h"

namespace tc {
namespace sched {

enum class NodeKind { Domain, Context, Band, Filter, Sequence, Set, Extension };

enum class MemberMode {
  Plain, // value = base
  TileFloor, // value = tile * floor(base / tile)
  Mod, // value = base mod tile
};

// One schedule dimension of a band: a per-statement affine function (our
// transformations only ever produce single-iterator bases) plus an optional
// tiling mode.
struct BandMember {
  std::map<size_t, poly::AffineExpr> fn; // statement index -> base
  MemberMode mode = MemberMode::Plain;
  int64_t tile = 0;
  // No dependence between subtree statements separates instances with
  // different values of this member: it can run in parallel.
  bool coincident = false;
  int blockDim = -1; // 0..2 once cyclically distributed over grid blocks
  int threadDim = -1; // 0..2 once residue-mapped to threads

  int64_t apply(int64_t base) const;
  std::string str(const std::string& baseStr) const;
};

// Mapping condition attached to a filter: the member value (after its
// mode) determines a block or thread coordinate. Block conditions divide
// by the tile size first and distribute tiles cyclically; thread
// conditions take the value's residue. padZero conditions pin an unused
// thread dimension to zero so branches agree on how many they consume.
struct MapCond {
  int dim = 0; // x=0, y=1, z=2
  bool block = false;
  bool padZero = false;
  std::map<size_t, poly::AffineExpr> base;
  MemberMode mode = MemberMode::Plain;
  int64_t tile = 0;
  int64_t divisor = 1; // tileIdx = value / divisor (block conditions)
  int64_t modulus = 1; // grid or block extent along dim

  int64_t value(int64_t baseVal) const; // member value after mode
};

// One promoted-buffer dimension. Affine dimensions cache an interval of
// the tensor dimension: [offset, offset + extent). Indirect dimensions
// enumerate one iterator of the data-dependent subscript instead; the
// original subscript expression re-evaluates per cell during copies.
struct BufferDim {
  bool indirect = false;
  poly::AffineExpr offset; // over loop-variable names (see labelLoops)
  int64_t extent = 1;
  // Iterator the dimension enumerates. Set for indirect expansions (the
  // copy loop walks the iterator and re-evaluates the subscript) and for
  // plain single-iterator subscripts (where private slicing may apply).
  std::string iter;
  int64_t lo = 0; // iterator range, validity window for copy cells
  int64_t hi = 0;
  // Private promotion slices a dimension across a thread dimension: each
  // thread keeps ceil(extent / threadExtent) cells and localizes a value
  // as (value - offset - t_d) / threadExtent.
  int threadDim = -1;
  int64_t threadExtent = 1;
};

struct PromotedGroup {
  std::string tensor;
  std::string buffer;
  bool shared = true; // else private (per-thread)
  bool hasReads = false;
  bool hasWrites = false;
  // Per tensor dimension, the buffer dimensions it expands to (one for
  // affine dimensions, the subscript's iterators for indirect ones).
  std::vector<std::vector<BufferDim>> dims;
  // Representative subscripts for copy-address evaluation.
  std::vector<lang::ExprPtr> subs;
  size_t repStmt = 0; // statement the representative subscripts came from
  size_t bytes = 0;

  std::vector<int64_t> bufferShape() const;
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  NodeKind kind = NodeKind::Domain;

  // Band
  std::vector<BandMember> members;
  bool permutable = false;
  bool fromSink = false; // created by sinkPointLoops (merge marker)
  bool pointBand = false; // intra-tile band created by tileTree

  // Filter
  std::set<size_t> stmts;
  std::vector<MapCond> conds;

  // Context
  std::array<int64_t, 3> grid{{1, 1, 1}};
  std::array<int64_t, 3> block{{1, 1, 1}};

  // Sequence: sync required between consecutive children (set by
  // promotion when a written shared group spans the boundary).
  std::vector<bool> barrierAfter;

  // Extension
  std::vector<PromotedGroup> copies;

  std::vector<NodePtr> children;
};

NodePtr makeNode(NodeKind kind);
NodePtr cloneTree(const NodePtr& node);

// Statements filtered into the subtree rooted here (the domain set for
// nodes above any filter).
std::set<size_t> subtreeStmts(const NodePtr& node, const std::set<size_t>& inherited);

// Assigns every band member a loop-variable name ("@c0", "@c1", ...) in
// depth-first pre-order; promotion offsets and lowering agree through this
// labeling. The "@" keeps labels out of the identifier space a definition
// can use. Returns member count.
size_t labelLoops(const NodePtr& root, std::map<const BandMember*, std::string>* names);

// Collapses single-child sequences and filters that pass every statement
// of their position.
void simplify(NodePtr& node, const std::set<size_t>& inherited);

// Structural dump, one node per line, two-space indentation. This is the
// format the golden schedule tests pin down.
std::string dumpTree(const NodePtr& root, const std::vector<std::string>* stmtNames = nullptr);

} // namespace sched
} // namespace tc
