/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sched/transforms.h"

#include <algorithm>
#include <optional>

#include "tc/poly/access.h"
#include "tc/sched/build.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace sched {

FusionStrategy fusionStrategyFromString(const std::string& s) {
  if (s == "max") {
    return FusionStrategy::Max;
  }
  if (s == "min") {
    return FusionStrategy::Min;
  }
  if (s == "preserve3") {
    return FusionStrategy::PreserveThreeParallel;
  }
  throwError(ErrorKind::MappingInvalid, "unknown fusion strategy '" + s + "'");
}

std::string fusionStrategyToString(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::Max:
      return "max";
    case FusionStrategy::Min:
      return "min";
    case FusionStrategy::PreserveThreeParallel:
      return "preserve3";
  }
  return "max";
}

namespace {

/* ------------------------------- fusion ------------------------------- */

/* Returns the expression's iterator when it is exactly one iterator of
 * the statement with coefficient one and no constant. */
std::optional<std::string> identityVar(const poly::AffineExpr& e) {
  if (e.cst != 0 || e.coeffs.size() != 1 || e.coeffs.begin()->second != 1) {
    return std::nullopt;
  }
  return e.coeffs.begin()->first;
}

/* Evidence that band member `member` subscripts dimension `dim` of
 * `tensor` directly in some statement of the branch. */
struct RoleKey {
  std::string tensor;
  size_t dim;
  bool operator<(const RoleKey& o) const {
    return tensor != o.tensor ? tensor < o.tensor : dim < o.dim;
  }
};

std::map<RoleKey, size_t> memberRoles(
    const Node& band,
    const std::set<size_t>& stmts,
    const poly::Dependences& deps) {
  std::map<RoleKey, size_t> roles;
  for (size_t mi = 0; mi < band.members.size(); ++mi) {
    const auto& member = band.members[mi];
    for (size_t s : stmts) {
      auto fnIt = member.fn.find(s);
      if (fnIt == member.fn.end()) {
        continue;
      }
      auto var = identityVar(fnIt->second);
      if (!var) {
        continue;
      }
      for (const auto& acc : deps.accesses[s].all) {
        for (size_t d = 0; d < acc.subs.size(); ++d) {
          if (!acc.subs[d]) {
            continue;
          }
          auto subVar = identityVar(*acc.subs[d]);
          if (subVar && *subVar == *var) {
            roles.emplace(RoleKey{acc.tensor, d}, mi);
          }
        }
      }
    }
  }
  return roles;
}

/* Per-statement functions for the members fused so far along the path;
 * instances of different statements only share a branch when these agree. */
using PathEqs = std::vector<std::map<size_t, poly::AffineExpr>>;

int64_t evalFn(
    const poly::AffineExpr& fn,
    const sem::ConcreteStmt& cs,
    const std::vector<int64_t>& point) {
  std::map<std::string, int64_t> env;
  for (size_t i = 0; i < cs.iterators.size(); ++i) {
    env[cs.iterators[i]] = point[i];
  }
  return fn.eval(env);
}

/* Checks that no dependence between the two branches runs backwards on
 * the fused members: for every prefix, equality on the earlier members
 * plus a strictly decreasing member must be infeasible. */
bool fusionLegal(
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    const std::set<size_t>& stmtsA,
    const std::set<size_t>& stmtsB,
    const std::vector<std::map<size_t, poly::AffineExpr>>& fused,
    const PathEqs& pathEqs) {
  for (const auto& edge : deps.edges) {
    bool forward = stmtsA.count(edge.src) && stmtsB.count(edge.dst);
    if (!forward) {
      continue;
    }
    const auto& csSrc = def.stmts[edge.src];
    const auto& csDst = def.stmts[edge.dst];
    if (edge.refined) {
      for (const auto& pr : edge.pairs) {
        for (const auto& fn : fused) {
          int64_t a = evalFn(fn.at(edge.src), csSrc, pr.first);
          int64_t b = evalFn(fn.at(edge.dst), csDst, pr.second);
          if (a < b) {
            break; // strictly positive distance: later prefixes are free
          }
          if (a > b) {
            return false;
          }
        }
      }
      continue;
    }
    for (const auto& base : poly::edgeOrderSystems(def, deps, edge)) {
      for (size_t p = 0; p < fused.size(); ++p) {
        poly::LinearSystem sys = base;
        for (const auto& eq : pathEqs) {
          sys.addEq(eq.at(edge.src).withPrefix("a.") - eq.at(edge.dst).withPrefix("b."));
        }
        for (size_t q = 0; q < p; ++q) {
          sys.addEq(fused[q].at(edge.src).withPrefix("a.") -
                    fused[q].at(edge.dst).withPrefix("b."));
        }
        poly::AffineExpr fa = fused[p].at(edge.src).withPrefix("a.");
        poly::AffineExpr fb = fused[p].at(edge.dst).withPrefix("b.");
        sys.addGe(fa - fb - poly::AffineExpr::constant(1));
        if (!sys.isEmpty()) {
          return false;
        }
      }
    }
  }
  return true;
}

/* A sequence branch viewed as filter -> band -> rest. */
struct Branch {
  NodePtr filter;
  NodePtr band; // may be null
};

std::optional<Branch> asBranch(const NodePtr& child) {
  if (child->kind != NodeKind::Filter || child->stmts.empty()) {
    return std::nullopt;
  }
  Branch br;
  br.filter = child;
  if (child->children.size() == 1 && child->children[0]->kind == NodeKind::Band) {
    br.band = child->children[0];
  }
  return br;
}

/* Rebuilds a branch with the fused members removed from its band. */
NodePtr stripFused(const Branch& br, const std::vector<size_t>& fusedIdx) {
  auto filter = br.filter;
  std::set<size_t> drop(fusedIdx.begin(), fusedIdx.end());
  std::vector<BandMember> leftover;
  for (size_t i = 0; i < br.band->members.size(); ++i) {
    if (!drop.count(i)) {
      leftover.push_back(br.band->members[i]);
    }
  }
  if (leftover.empty()) {
    // Splice the band out of the chain.
    filter->children = br.band->children;
  } else {
    br.band->members = leftover;
  }
  return filter;
}

bool tryFusePair(
    NodePtr& seq,
    size_t idx,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    FusionStrategy strategy,
    const PathEqs& pathEqs) {
  auto a = asBranch(seq->children[idx]);
  auto b = asBranch(seq->children[idx + 1]);
  if (!a || !b || !a->band || !b->band) {
    return false;
  }
  auto rolesA = memberRoles(*a->band, a->filter->stmts, deps);
  auto rolesB = memberRoles(*b->band, b->filter->stmts, deps);
  // Pair members that play the same subscript role, first come first
  // serve in role order, each member used at most once.
  std::vector<std::pair<size_t, size_t>> pairs;
  std::set<size_t> usedA;
  std::set<size_t> usedB;
  for (const auto& kv : rolesA) {
    auto itB = rolesB.find(kv.first);
    if (itB == rolesB.end()) {
      continue;
    }
    if (usedA.count(kv.second) || usedB.count(itB->second)) {
      continue;
    }
    usedA.insert(kv.second);
    usedB.insert(itB->second);
    pairs.emplace_back(kv.second, itB->second);
  }
  if (pairs.empty()) {
    return false;
  }
  // Keep branch A's member order for the fused band.
  std::sort(pairs.begin(), pairs.end());

  std::vector<std::map<size_t, poly::AffineExpr>> fusedFns;
  for (const auto& pr : pairs) {
    std::map<size_t, poly::AffineExpr> fn = a->band->members[pr.first].fn;
    for (const auto& kv : b->band->members[pr.second].fn) {
      fn[kv.first] = kv.second;
    }
    fusedFns.push_back(std::move(fn));
  }
  if (!fusionLegal(def, deps, a->filter->stmts, b->filter->stmts, fusedFns, pathEqs)) {
    return false;
  }

  std::set<size_t> allStmts = a->filter->stmts;
  allStmts.insert(b->filter->stmts.begin(), b->filter->stmts.end());
  auto fusedBand = makeNode(NodeKind::Band);
  fusedBand->permutable = a->band->permutable && b->band->permutable;
  size_t parallel = 0;
  for (size_t p = 0; p < pairs.size(); ++p) {
    BandMember m;
    m.fn = fusedFns[p];
    m.coincident = memberCoincident(deps, def, allStmts, m.fn);
    parallel += m.coincident ? 1 : 0;
    fusedBand->members.push_back(std::move(m));
  }
  if (strategy == FusionStrategy::PreserveThreeParallel && parallel < 3) {
    return false;
  }

  std::vector<size_t> fusedA;
  std::vector<size_t> fusedB;
  for (const auto& pr : pairs) {
    fusedA.push_back(pr.first);
    fusedB.push_back(pr.second);
  }
  auto innerSeq = makeNode(NodeKind::Sequence);
  innerSeq->children.push_back(stripFused(*a, fusedA));
  innerSeq->children.push_back(stripFused(*b, fusedB));
  fusedBand->children.push_back(innerSeq);
  auto fusedFilter = makeNode(NodeKind::Filter);
  fusedFilter->stmts = allStmts;
  fusedFilter->children.push_back(fusedBand);

  seq->children[idx] = fusedFilter;
  seq->children.erase(seq->children.begin() + static_cast<long>(idx) + 1);
  return true;
}

/* Merges nested sequences produced by repeated pair fusion so that a
 * cluster's branches stay flat and in textual order. */
void flattenSequence(NodePtr& seq) {
  std::vector<NodePtr> flat;
  for (auto& child : seq->children) {
    if (child->kind == NodeKind::Filter && child->conds.empty() &&
        child->children.size() == 1 && child->children[0]->kind == NodeKind::Sequence) {
      // filter -> sequence with the same statements: hoist the branches.
      auto inner = child->children[0];
      std::set<size_t> innerStmts;
      for (const auto& c : inner->children) {
        innerStmts.insert(c->stmts.begin(), c->stmts.end());
      }
      if (innerStmts == child->stmts) {
        for (auto& c : inner->children) {
          flat.push_back(c);
        }
        continue;
      }
    }
    flat.push_back(child);
  }
  seq->children = flat;
}

void fuseNode(
    NodePtr& node,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    FusionStrategy strategy,
    PathEqs& pathEqs) {
  if (node->kind == NodeKind::Sequence && strategy != FusionStrategy::Min) {
    bool merged = true;
    while (merged) {
      merged = false;
      size_t i = 0;
      while (i + 1 < node->children.size()) {
        if (tryFusePair(node, i, def, deps, strategy, pathEqs)) {
          flattenSequence(node->children[i]->children[0]->children[0]);
          merged = true;
        } else {
          ++i;
        }
      }
    }
  }
  size_t pushed = 0;
  if (node->kind == NodeKind::Band) {
    for (const auto& m : node->members) {
      pathEqs.push_back(m.fn);
      ++pushed;
    }
  }
  for (auto& child : node->children) {
    fuseNode(child, def, deps, strategy, pathEqs);
  }
  for (size_t i = 0; i < pushed; ++i) {
    pathEqs.pop_back();
  }
}

/* ------------------------------- tiling ------------------------------- */

void tileNode(NodePtr& node, const std::vector<int64_t>& sizes, size_t cursor) {
  if (node->kind == NodeKind::Band && !node->members.empty()) {
    size_t n = node->members.size();
    auto outer = makeNode(NodeKind::Band);
    auto inner = makeNode(NodeKind::Band);
    outer->permutable = node->permutable;
    inner->permutable = node->permutable;
    inner->pointBand = true;
    for (size_t i = 0; i < n; ++i) {
      int64_t size = cursor + i < sizes.size() ? sizes[cursor + i] : 0;
      TC_CHECK(size >= 0, "negative tile size");
      BandMember m = node->members[i];
      if (size > 0) {
        BandMember tileMember = m;
        tileMember.mode = MemberMode::TileFloor;
        tileMember.tile = size;
        outer->members.push_back(tileMember);
        m.mode = MemberMode::Mod;
        m.tile = size;
      }
      inner->members.push_back(m);
    }
    if (!outer->members.empty()) {
      inner->children = node->children;
      outer->children.push_back(inner);
      node = outer;
      for (auto& child : inner->children) {
        tileNode(child, sizes, cursor + n);
      }
    } else {
      for (auto& child : node->children) {
        tileNode(child, sizes, cursor + n);
      }
    }
    return;
  }
  for (auto& child : node->children) {
    tileNode(child, sizes, cursor);
  }
}

/* ------------------------------- sinking ------------------------------ */

void insertAtBottom(NodePtr& node, const std::vector<BandMember>& members, bool permutable) {
  if (node->kind == NodeKind::Extension || node->kind == NodeKind::Set) {
    throwError(
        ErrorKind::NotSinkable,
        "cannot sink point loops across an extension or set node");
  }
  if (node->children.empty()) {
    if (node->kind == NodeKind::Band && node->fromSink) {
      for (const auto& m : members) {
        node->members.push_back(m);
      }
      node->permutable = node->permutable && permutable;
      return;
    }
    auto sunk = makeNode(NodeKind::Band);
    sunk->fromSink = true;
    sunk->pointBand = true;
    sunk->permutable = permutable;
    sunk->members = members;
    node->children.push_back(sunk);
    return;
  }
  for (auto& child : node->children) {
    insertAtBottom(child, members, permutable);
  }
}

/* Drops statements outside the branch from sunk member functions. */
std::vector<BandMember> restrictMembers(
    const std::vector<BandMember>& members,
    const std::set<size_t>& stmts) {
  std::vector<BandMember> result;
  for (const auto& m : members) {
    BandMember r = m;
    r.fn.clear();
    for (const auto& kv : m.fn) {
      if (stmts.count(kv.first)) {
        r.fn[kv.first] = kv.second;
      }
    }
    if (!r.fn.empty()) {
      result.push_back(std::move(r));
    }
  }
  return result;
}

void insertAtBottomPerBranch(
    NodePtr& node,
    const std::vector<BandMember>& members,
    bool permutable,
    const std::set<size_t>& inherited) {
  if (node->kind == NodeKind::Extension || node->kind == NodeKind::Set) {
    throwError(
        ErrorKind::NotSinkable,
        "cannot sink point loops across an extension or set node");
  }
  std::set<size_t> here = inherited;
  if (node->kind == NodeKind::Filter && !node->stmts.empty()) {
    std::set<size_t> filtered;
    for (size_t s : node->stmts) {
      if (here.count(s)) {
        filtered.insert(s);
      }
    }
    here = filtered;
  }
  if (node->children.empty()) {
    auto restricted = restrictMembers(members, here);
    if (restricted.empty()) {
      return;
    }
    if (node->kind == NodeKind::Band && node->fromSink) {
      for (const auto& m : restricted) {
        node->members.push_back(m);
      }
      node->permutable = node->permutable && permutable;
      return;
    }
    auto sunk = makeNode(NodeKind::Band);
    sunk->fromSink = true;
    sunk->pointBand = true;
    sunk->permutable = permutable;
    sunk->members = restricted;
    node->children.push_back(sunk);
    return;
  }
  for (auto& child : node->children) {
    insertAtBottomPerBranch(child, members, permutable, here);
  }
}

void sinkNode(NodePtr& node, const std::set<size_t>& inherited) {
  std::set<size_t> here = inherited;
  if (node->kind == NodeKind::Filter && !node->stmts.empty()) {
    std::set<size_t> filtered;
    for (size_t s : node->stmts) {
      if (here.count(s)) {
        filtered.insert(s);
      }
    }
    here = filtered;
  }
  if (node->kind == NodeKind::Band && node->pointBand && !node->fromSink &&
      node->permutable) {
    std::vector<BandMember> parallel;
    std::vector<BandMember> rest;
    for (const auto& m : node->members) {
      (m.coincident ? parallel : rest).push_back(m);
    }
    bool bandHasBody = !node->children.empty();
    if (!parallel.empty() && (bandHasBody || !rest.empty())) {
      node->members = rest;
      if (node->children.empty()) {
        auto sunk = makeNode(NodeKind::Band);
        sunk->fromSink = true;
        sunk->pointBand = true;
        sunk->permutable = true;
        sunk->members = parallel;
        node->children.push_back(sunk);
      } else {
        for (auto& child : node->children) {
          insertAtBottomPerBranch(child, parallel, true, here);
        }
      }
      if (node->members.empty()) {
        TC_CHECK(node->children.size() == 1, "point band fan-out while sinking");
        node = node->children[0];
      }
    }
  }
  for (auto& child : node->children) {
    sinkNode(child, here);
  }
}

/* ------------------------------ mapping ------------------------------- */

void mapBlocksInBranch(NodePtr& node, std::array<int64_t, 3> grid) {
  if (node->kind == NodeKind::Band) {
    int next = 0;
    auto filter = makeNode(NodeKind::Filter);
    for (auto& m : node->members) {
      if (!m.coincident || next >= 3) {
        continue;
      }
      m.blockDim = next;
      MapCond cond;
      cond.dim = next;
      cond.block = true;
      cond.base = m.fn;
      cond.mode = m.mode;
      cond.tile = m.tile;
      cond.divisor = m.mode == MemberMode::TileFloor ? m.tile : 1;
      cond.modulus = grid[static_cast<size_t>(next)];
      filter->conds.push_back(std::move(cond));
      ++next;
    }
    if (next == 0) {
      throwError(
          ErrorKind::NoParallelOuterBand,
          "the outermost band of a branch has no parallel member to map to blocks");
    }
    for (size_t d = static_cast<size_t>(next); d < 3; ++d) {
      if (grid[d] <= 1) {
        continue;
      }
      MapCond pad;
      pad.dim = static_cast<int>(d);
      pad.block = true;
      pad.padZero = true;
      pad.modulus = grid[d];
      filter->conds.push_back(std::move(pad));
    }
    filter->children = node->children;
    node->children.clear();
    node->children.push_back(filter);
    return;
  }
  if (node->children.empty()) {
    throwError(
        ErrorKind::NoParallelOuterBand,
        "a branch has no band to map to blocks");
  }
  for (auto& child : node->children) {
    mapBlocksInBranch(child, grid);
  }
}

/* The innermost permutable band with a coincident member along each
 * root-to-leaf path receives the thread mapping. First pass counts how
 * many thread dimensions each path needs. */
void countThreadDims(const NodePtr& node, size_t& maxUsed) {
  bool isCandidate = node->kind == NodeKind::Band && node->permutable;
  size_t count = 0;
  if (isCandidate) {
    for (const auto& m : node->members) {
      if (m.coincident && m.blockDim < 0 && count < 3) {
        ++count;
      }
    }
  }
  if (node->children.empty()) {
    maxUsed = std::max(maxUsed, count);
    return;
  }
  for (const auto& child : node->children) {
    size_t below = 0;
    countThreadDims(child, below);
    // An inner candidate shadows this band along that path.
    maxUsed = std::max(maxUsed, below > 0 ? below : count);
  }
}

/* Returns true when the subtree contains a band that got thread-mapped. */
bool mapThreadsInner(NodePtr& node, std::array<int64_t, 3> block, size_t used) {
  bool mappedBelow = false;
  for (auto& child : node->children) {
    mappedBelow = mapThreadsInner(child, block, used) || mappedBelow;
  }
  if (mappedBelow) {
    return true;
  }
  if (node->kind != NodeKind::Band || !node->permutable) {
    return false;
  }
  int next = 0;
  auto filter = makeNode(NodeKind::Filter);
  for (auto& m : node->members) {
    if (!m.coincident || m.blockDim >= 0 || next >= 3) {
      continue;
    }
    m.threadDim = next;
    MapCond cond;
    cond.dim = next;
    cond.block = false;
    cond.base = m.fn;
    cond.mode = m.mode;
    cond.tile = m.tile;
    cond.modulus = block[static_cast<size_t>(next)];
    filter->conds.push_back(std::move(cond));
    ++next;
  }
  if (next == 0) {
    return false;
  }
  for (size_t d = static_cast<size_t>(next); d < used; ++d) {
    MapCond pad;
    pad.dim = static_cast<int>(d);
    pad.block = false;
    pad.padZero = true;
    pad.modulus = block[d];
    filter->conds.push_back(std::move(pad));
  }
  filter->children = node->children;
  node->children.clear();
  node->children.push_back(filter);
  return true;
}

/* Branches that map no member still run on a single thread. */
void padUnmappedBranch(NodePtr& node, std::array<int64_t, 3> block, size_t used) {
  if (used == 0) {
    return;
  }
  auto filter = makeNode(NodeKind::Filter);
  for (size_t d = 0; d < used; ++d) {
    MapCond pad;
    pad.dim = static_cast<int>(d);
    pad.block = false;
    pad.padZero = true;
    pad.modulus = block[d];
    filter->conds.push_back(std::move(pad));
  }
  filter->children = node->children;
  node->children.clear();
  node->children.push_back(filter);
}

void mapThreadsPerBranch(NodePtr& node, std::array<int64_t, 3> block, size_t used) {
  if (node->kind == NodeKind::Sequence || node->kind == NodeKind::Set) {
    for (auto& child : node->children) {
      mapThreadsPerBranch(child, block, used);
    }
    return;
  }
  if (node->kind == NodeKind::Filter && !node->stmts.empty()) {
    if (!mapThreadsInner(node, block, used)) {
      padUnmappedBranch(node, block, used);
    }
    return;
  }
  // Root of a single-branch tree: map directly.
  if (!mapThreadsInner(node, block, used)) {
    padUnmappedBranch(node, block, used);
  }
}

} // namespace

void fuseTree(
    NodePtr& root,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    FusionStrategy strategy) {
  PathEqs eqs;
  fuseNode(root, def, deps, strategy, eqs);
  std::set<size_t> all;
  for (size_t s = 0; s < def.stmts.size(); ++s) {
    all.insert(s);
  }
  simplify(root, all);
}

void tileTree(NodePtr& root, const std::vector<int64_t>& sizes) {
  if (sizes.empty()) {
    return;
  }
  tileNode(root, sizes, 0);
}

void sinkPointLoops(NodePtr& root) {
  std::set<size_t> all = root->stmts;
  sinkNode(root, all);
}

void mapToGpu(
    NodePtr& root,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    std::array<int64_t, 3> grid,
    std::array<int64_t, 3> block) {
  (void)def;
  (void)deps;
  for (size_t d = 0; d < 3; ++d) {
    if (grid[d] < 1 || block[d] < 1) {
      throwError(ErrorKind::MappingInvalid, "grid and block extents must be at least 1");
    }
  }
  TC_CHECK(root->kind == NodeKind::Domain, "mapping expects a domain root");
  auto ctx = makeNode(NodeKind::Context);
  ctx->grid = grid;
  ctx->block = block;
  ctx->children = root->children;
  root->children.clear();
  root->children.push_back(ctx);

  if (ctx->children.empty()) {
    return;
  }
  NodePtr& top = ctx->children[0];
  if (top->kind == NodeKind::Sequence || top->kind == NodeKind::Set) {
    for (auto& child : top->children) {
      mapBlocksInBranch(child, grid);
    }
  } else {
    mapBlocksInBranch(top, grid);
  }

  size_t used = 0;
  countThreadDims(top, used);
  used = std::min<size_t>(used, 3);
  // Thread dimensions with more than one thread must be constrained in
  // every branch or idle threads would repeat its work.
  for (size_t d = used; d < 3; ++d) {
    if (block[d] > 1) {
      used = d + 1;
    }
  }
  mapThreadsPerBranch(top, block, used);
}

} // namespace sched
} // namespace tc
