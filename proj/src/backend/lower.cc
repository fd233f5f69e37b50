/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/backend/lower.h"

#include <algorithm>
#include <functional>
#include <set>

#include "tc/support/diagnostics.h"

namespace tc {
namespace backend {

namespace {

using sched::BandMember;
using sched::MapCond;
using sched::MemberMode;
using sched::NodeKind;
using sched::NodePtr;

const char* kBlockVars[3] = {"@bx", "@by", "@bz"};
const char* kThreadVars[3] = {"@tx", "@ty", "@tz"};

int64_t floorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

struct LowerCtx {
  const sem::SpecializedDef* def = nullptr;
  std::map<const BandMember*, std::string> names;
  std::array<int64_t, 3> grid{{1, 1, 1}};
  std::array<int64_t, 3> block{{1, 1, 1}};
  int nextBarrier = 0;
  int nextCopyVar = 0;
  std::vector<BufferDecl> sharedBufs;
  std::vector<BufferDecl> privateBufs;
};

struct PathState {
  std::set<size_t> stmts;
  std::vector<std::pair<const BandMember*, std::string>> members;
  std::set<std::pair<bool, int>> stridedDims; // residues folded into a loop
};

// The single base iterator of a member's per-statement schedule function.
const std::string& memberIter(const BandMember& m, size_t stmt) {
  const auto& fn = m.fn.at(stmt);
  TC_CHECK(
      fn.cst == 0 && fn.coeffs.size() == 1 && fn.coeffs.begin()->second == 1,
      "band member is not a plain iterator");
  return fn.coeffs.begin()->first;
}

std::vector<IrPtr> lowerNode(const NodePtr& node, PathState st, LowerCtx& cx);

std::vector<IrPtr> lowerChildren(const NodePtr& node, const PathState& st, LowerCtx& cx) {
  std::vector<IrPtr> out;
  for (const auto& child : node->children) {
    auto part = lowerNode(child, st, cx);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<IrPtr> computesAtLeaf(const PathState& st, LowerCtx& cx) {
  std::vector<IrPtr> out;
  for (size_t s : st.stmts) {
    auto c = makeIr(IrKind::Compute);
    c->stmt = s;
    const auto& cs = cx.def->stmts[s];
    for (const auto& iter : cs.iterators) {
      std::vector<std::string> vars;
      for (const auto& [m, var] : st.members) {
        if (m->fn.count(s) != 0 && memberIter(*m, s) == iter) {
          vars.push_back(var);
        }
      }
      TC_CHECK(!vars.empty(), "iterator '" + iter + "' is not scheduled by any band");
      c->iterSum.emplace_back(iter, std::move(vars));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<IrPtr> lowerBand(const NodePtr& node, PathState st, LowerCtx& cx) {
  std::vector<IrPtr> loops;

  for (const auto& m : node->members) {
    // Hull of the member's value range over the statements it schedules.
    int64_t lo = 0;
    int64_t hi = 0;
    bool first = true;
    for (const auto& [s, fn] : m.fn) {
      (void)fn;
      if (st.stmts.count(s) == 0) {
        continue;
      }
      const auto& r = cx.def->stmts[s].range(memberIter(m, s));
      lo = first ? r.lo : std::min(lo, r.lo);
      hi = first ? r.hi : std::max(hi, r.hi);
      first = false;
    }
    if (first) {
      continue; // member schedules no active statement
    }

    auto loop = makeIr(IrKind::Loop);
    loop->var = cx.names.at(&m);
    switch (m.mode) {
      case MemberMode::Plain:
        if (m.blockDim >= 0 && lo == 0) {
          loop->lo = poly::AffineExpr::var(kBlockVars[m.blockDim]);
          loop->hi = hi;
          loop->step = cx.grid[static_cast<size_t>(m.blockDim)];
          st.stridedDims.insert({true, m.blockDim});
        } else if (m.threadDim >= 0 && lo == 0) {
          loop->lo = poly::AffineExpr::var(kThreadVars[m.threadDim]);
          loop->hi = hi;
          loop->step = cx.block[static_cast<size_t>(m.threadDim)];
          st.stridedDims.insert({false, m.threadDim});
        } else {
          loop->lo = poly::AffineExpr::constant(lo);
          loop->hi = hi;
          loop->step = 1;
        }
        break;
      case MemberMode::TileFloor:
        if (m.blockDim >= 0 && floorDiv(lo, m.tile) == 0) {
          loop->lo = poly::AffineExpr::var(kBlockVars[m.blockDim]).scaled(m.tile);
          loop->hi = hi;
          loop->step = m.tile * cx.grid[static_cast<size_t>(m.blockDim)];
          st.stridedDims.insert({true, m.blockDim});
        } else {
          loop->lo = poly::AffineExpr::constant(m.tile * floorDiv(lo, m.tile));
          loop->hi = hi;
          loop->step = m.tile;
        }
        break;
      case MemberMode::Mod:
        if (m.threadDim >= 0) {
          loop->lo = poly::AffineExpr::var(kThreadVars[m.threadDim]);
          loop->hi = std::min(m.tile, hi);
          loop->step = cx.block[static_cast<size_t>(m.threadDim)];
          st.stridedDims.insert({false, m.threadDim});
        } else {
          loop->lo = poly::AffineExpr::constant(0);
          loop->hi = std::min(m.tile, hi);
          loop->step = 1;
        }
        break;
    }
    st.members.emplace_back(&m, loop->var);
    loops.push_back(std::move(loop));
  }

  std::vector<IrPtr> inner =
      node->children.empty() ? computesAtLeaf(st, cx) : lowerChildren(node, st, cx);
  for (size_t k = loops.size(); k > 0; --k) {
    loops[k - 1]->body = std::move(inner);
    inner = {loops[k - 1]};
  }
  return inner;
}

std::vector<IrPtr> lowerFilter(const NodePtr& node, PathState st, LowerCtx& cx) {
  // Mapping filters restrict coordinates, not statements; their statement
  // set is empty and means "everything that reaches this point".
  if (!node->stmts.empty()) {
    std::set<size_t> kept;
    for (size_t s : node->stmts) {
      if (st.stmts.count(s) != 0) {
        kept.insert(s);
      }
    }
    st.stmts = std::move(kept);
    if (st.stmts.empty()) {
      return {};
    }
  }

  std::vector<IrCond> conds;
  for (const auto& c : node->conds) {
    if (c.padZero) {
      IrCond ic;
      ic.lhs = poly::AffineExpr::var(c.block ? kBlockVars[c.dim] : kThreadVars[c.dim]);
      ic.modulus = c.modulus;
      ic.rhsConst = 0;
      conds.push_back(std::move(ic));
      continue;
    }
    if (st.stridedDims.count({c.block, c.dim}) != 0) {
      continue; // already folded into the member's strided loop
    }
    // Fall back to an explicit residue test on the member's loop variable.
    const std::string* var = nullptr;
    for (auto it = st.members.rbegin(); it != st.members.rend(); ++it) {
      int mapped = c.block ? it->first->blockDim : it->first->threadDim;
      if (mapped == c.dim) {
        var = &it->second;
        break;
      }
    }
    TC_CHECK(var != nullptr, "mapping condition without a matching band member");
    IrCond ic;
    ic.lhs = poly::AffineExpr::var(*var);
    ic.divisor = c.divisor;
    ic.modulus = c.modulus;
    ic.rhsVar = c.block ? kBlockVars[c.dim] : kThreadVars[c.dim];
    conds.push_back(std::move(ic));
  }

  auto inner = node->children.empty() ? computesAtLeaf(st, cx) : lowerChildren(node, st, cx);
  if (conds.empty() || inner.empty()) {
    return inner;
  }
  auto cond = makeIr(IrKind::Cond);
  cond->conds = std::move(conds);
  cond->body = std::move(inner);
  return {cond};
}

IrPtr barrier(LowerCtx& cx) {
  auto b = makeIr(IrKind::Barrier);
  b->barrierId = cx.nextBarrier++;
  return b;
}

std::vector<IrPtr> copyNest(
    const std::shared_ptr<const sched::PromotedGroup>& g,
    bool copyIn,
    LowerCtx& cx) {
  std::vector<int64_t> shape = g->bufferShape();
  size_t rank = shape.size();
  std::vector<std::string> vars;
  std::vector<IrPtr> loops;
  std::set<size_t> usedThreadDims;
  for (size_t k = 0; k < rank; ++k) {
    auto loop = makeIr(IrKind::Loop);
    loop->var = "@p" + std::to_string(cx.nextCopyVar++);
    size_t fromEnd = rank - 1 - k;
    if (g->shared && fromEnd < 3) {
      // Distribute cells across threads, last dimension on thread x so
      // neighboring threads touch neighboring global addresses.
      loop->lo = poly::AffineExpr::var(kThreadVars[fromEnd]);
      loop->hi = shape[k];
      loop->step = cx.block[fromEnd];
      loop->copyLoop = true;
      usedThreadDims.insert(fromEnd);
    } else {
      loop->lo = poly::AffineExpr::constant(0);
      loop->hi = shape[k];
      loop->step = 1;
      loop->copyLoop = g->shared;
    }
    vars.push_back(loop->var);
    loops.push_back(std::move(loop));
  }
  auto copy = makeIr(IrKind::Copy);
  copy->group = g;
  copy->copyIn = copyIn;
  copy->copyVars = vars;
  std::vector<IrPtr> inner = {copy};
  for (size_t k = loops.size(); k > 0; --k) {
    loops[k - 1]->body = std::move(inner);
    inner = {loops[k - 1]};
  }
  if (g->shared) {
    // Thread dimensions the nest does not distribute over would repeat the
    // same transfers; pin them to zero so every cell has a single owner.
    std::vector<IrCond> pins;
    for (size_t d = 0; d < 3; ++d) {
      if (cx.block[d] > 1 && usedThreadDims.count(d) == 0) {
        IrCond ic;
        ic.lhs = poly::AffineExpr::var(kThreadVars[d]);
        ic.modulus = cx.block[d];
        ic.rhsConst = 0;
        pins.push_back(std::move(ic));
      }
    }
    if (!pins.empty()) {
      auto cond = makeIr(IrKind::Cond);
      cond->conds = std::move(pins);
      cond->body = std::move(inner);
      inner = {cond};
    }
  }
  return inner;
}

std::vector<IrPtr> lowerExtension(const NodePtr& node, PathState st, LowerCtx& cx) {
  std::vector<std::shared_ptr<const sched::PromotedGroup>> groups;
  for (const auto& g : node->copies) {
    auto gp = std::make_shared<const sched::PromotedGroup>(g);
    BufferDecl decl;
    decl.name = g.buffer;
    decl.tensor = g.tensor;
    decl.elemKind = cx.def->vdef.tensors.at(g.tensor).elemKind;
    decl.shape = g.bufferShape();
    decl.sharedMem = g.shared;
    decl.group = gp;
    (g.shared ? cx.sharedBufs : cx.privateBufs).push_back(std::move(decl));
    groups.push_back(std::move(gp));
  }

  std::vector<IrPtr> out;
  for (const auto& g : groups) {
    auto nest = copyNest(g, true, cx);
    out.insert(out.end(), nest.begin(), nest.end());
  }
  out.push_back(barrier(cx));
  auto body = lowerChildren(node, st, cx);
  out.insert(out.end(), body.begin(), body.end());
  out.push_back(barrier(cx));
  bool wrote = false;
  for (const auto& g : groups) {
    if (!g->hasWrites) {
      continue;
    }
    wrote = true;
    auto nest = copyNest(g, false, cx);
    out.insert(out.end(), nest.begin(), nest.end());
  }
  if (wrote) {
    out.push_back(barrier(cx));
  }
  return out;
}

std::vector<IrPtr> lowerNode(const NodePtr& node, PathState st, LowerCtx& cx) {
  switch (node->kind) {
    case NodeKind::Domain:
      st.stmts.clear();
      for (size_t s = 0; s < cx.def->stmts.size(); ++s) {
        st.stmts.insert(s);
      }
      return node->children.empty() ? computesAtLeaf(st, cx) : lowerChildren(node, st, cx);
    case NodeKind::Context:
      cx.grid = node->grid;
      cx.block = node->block;
      return node->children.empty() ? computesAtLeaf(st, cx) : lowerChildren(node, st, cx);
    case NodeKind::Band:
      return lowerBand(node, std::move(st), cx);
    case NodeKind::Filter:
      return lowerFilter(node, std::move(st), cx);
    case NodeKind::Sequence: {
      std::vector<IrPtr> out;
      for (size_t k = 0; k < node->children.size(); ++k) {
        auto part = lowerNode(node->children[k], st, cx);
        out.insert(out.end(), part.begin(), part.end());
        if (k < node->barrierAfter.size() && node->barrierAfter[k]) {
          out.push_back(barrier(cx));
        }
      }
      return out;
    }
    case NodeKind::Set:
      return lowerChildren(node, st, cx);
    case NodeKind::Extension:
      return lowerExtension(node, std::move(st), cx);
  }
  throwError(ErrorKind::Internal, "unhandled schedule node kind in lowering");
}

// Bottom-up unroll budgeting: a loop is flagged when its whole subtree can
// expand within the remaining factor. Returns the subtree's expansion
// footprint, or -1 when something below cannot expand.
int64_t annotateUnroll(const IrPtr& n, int64_t budget) {
  int64_t inner = 1;
  for (const auto& c : n->body) {
    int64_t v = annotateUnroll(c, budget);
    if (v < 0 || inner < 0) {
      inner = -1;
    } else {
      inner *= v;
    }
  }
  if (n->kind != IrKind::Loop) {
    return inner;
  }
  if (inner < 0) {
    return -1;
  }
  // Strided loops start at a coordinate whose minimum is zero, so the
  // constant part of the bound gives the longest trip count.
  int64_t trips = std::max<int64_t>(0, (n->hi - n->lo.cst + n->step - 1) / n->step);
  if (trips * inner <= budget && trips > 0) {
    n->unroll = true;
    return trips * inner;
  }
  return -1;
}

void flagCopyLoops(const IrPtr& n) {
  if (n->kind == IrKind::Loop && n->copyLoop) {
    n->unroll = true;
  }
  for (const auto& c : n->body) {
    flagCopyLoops(c);
  }
}

} // namespace

KernelIR lower(
    const NodePtr& root,
    std::shared_ptr<const sem::SpecializedDef> def,
    const LoweringOptions& opts) {
  KernelIR ir;
  ir.def = def;
  ir.name = def->vdef.def.name;
  for (const auto& [sym, v] : def->sizes) {
    (void)sym;
    ir.name += "_" + std::to_string(v);
  }

  LowerCtx cx;
  cx.def = def.get();
  sched::labelLoops(root, &cx.names);

  // The context node (when present) is a child of the domain; peek ahead
  // so band lowering knows the grid/block striding.
  std::function<void(const NodePtr&)> findCtx = [&](const NodePtr& n) {
    if (n->kind == NodeKind::Context) {
      cx.grid = n->grid;
      cx.block = n->block;
      return;
    }
    for (const auto& c : n->children) {
      findCtx(c);
    }
  };
  findCtx(root);

  PathState st;
  ir.body = lowerNode(root, st, cx);
  ir.grid = cx.grid;
  ir.block = cx.block;
  ir.sharedBufs = std::move(cx.sharedBufs);
  ir.privateBufs = std::move(cx.privateBufs);
  ir.barrierCount = cx.nextBarrier;

  if (opts.unrollFactor > 1) {
    for (const auto& n : ir.body) {
      annotateUnroll(n, opts.unrollFactor);
    }
  }
  if (opts.unrollCopyShared) {
    for (const auto& n : ir.body) {
      flagCopyLoops(n);
    }
  }
  return ir;
}

} // namespace backend
} // namespace tc
