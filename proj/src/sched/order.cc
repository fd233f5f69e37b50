/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sched/order.h"

#include <algorithm>
#include <optional>
#include <sstream>

#include "tc/support/diagnostics.h"

namespace tc {
namespace sched {

namespace {

int64_t floorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

int64_t modPos(int64_t a, int64_t b) {
  int64_t r = a % b;
  if (r < 0) {
    r += b;
  }
  return r;
}

/* ------------------------ placement of one point ----------------------- */

struct WalkState {
  std::array<int64_t, 3> grid{{1, 1, 1}};
  std::array<int64_t, 3> block{{1, 1, 1}};
};

bool placementWalk(
    const NodePtr& node,
    size_t stmt,
    const std::map<std::string, int64_t>& env,
    WalkState& st,
    Placement& out) {
  switch (node->kind) {
    case NodeKind::Context:
      st.grid = node->grid;
      st.block = node->block;
      break;
    case NodeKind::Filter:
      if (!node->stmts.empty() && !node->stmts.count(stmt)) {
        return false;
      }
      break;
    case NodeKind::Band:
      for (const auto& m : node->members) {
        auto it = m.fn.find(stmt);
        if (it == m.fn.end()) {
          continue;
        }
        int64_t val = m.apply(it->second.eval(env));
        if (m.blockDim >= 0) {
          int64_t divisor = m.mode == MemberMode::TileFloor ? m.tile : 1;
          int64_t tileIdx = floorDiv(val, divisor);
          out.block[static_cast<size_t>(m.blockDim)] =
              modPos(tileIdx, st.grid[static_cast<size_t>(m.blockDim)]);
          out.time.push_back(tileIdx);
        } else if (m.threadDim >= 0) {
          out.thread[static_cast<size_t>(m.threadDim)] =
              modPos(val, st.block[static_cast<size_t>(m.threadDim)]);
          out.time.push_back(val);
        } else {
          out.time.push_back(val);
        }
      }
      break;
    default:
      break;
  }
  if (node->children.empty()) {
    return true;
  }
  if (node->kind == NodeKind::Sequence || node->kind == NodeKind::Set) {
    for (size_t i = 0; i < node->children.size(); ++i) {
      std::set<size_t> sub = subtreeStmts(node->children[i], {stmt});
      if (!sub.empty()) {
        out.time.push_back(static_cast<int64_t>(i));
        return placementWalk(node->children[i], stmt, env, st, out);
      }
    }
    return false;
  }
  for (const auto& child : node->children) {
    if (placementWalk(child, stmt, env, st, out)) {
      return true;
    }
  }
  return false;
}

/* ----------------------- common-path locus model ----------------------- */

struct Locus {
  enum Kind { Member, SeqPos, Unordered } kind = Member;
  const BandMember* member = nullptr;
  int64_t srcPos = 0;
  int64_t dstPos = 0;
};

struct PathInfo {
  std::vector<Locus> commonLoci;
  std::array<const BandMember*, 3> srcBlock{{nullptr, nullptr, nullptr}};
  std::array<const BandMember*, 3> dstBlock{{nullptr, nullptr, nullptr}};
  std::array<const BandMember*, 3> srcThread{{nullptr, nullptr, nullptr}};
  std::array<const BandMember*, 3> dstThread{{nullptr, nullptr, nullptr}};
  std::array<int64_t, 3> grid{{1, 1, 1}};
  std::array<int64_t, 3> block{{1, 1, 1}};
};

void collectSide(
    const NodePtr& node,
    size_t stmt,
    std::array<const BandMember*, 3>& blockSlots,
    std::array<const BandMember*, 3>& threadSlots) {
  if (node->kind == NodeKind::Filter && !node->stmts.empty() &&
      !node->stmts.count(stmt)) {
    return;
  }
  if (node->kind == NodeKind::Band) {
    for (const auto& m : node->members) {
      if (!m.fn.count(stmt)) {
        continue;
      }
      if (m.blockDim >= 0) {
        blockSlots[static_cast<size_t>(m.blockDim)] = &m;
      }
      if (m.threadDim >= 0) {
        threadSlots[static_cast<size_t>(m.threadDim)] = &m;
      }
    }
  }
  for (const auto& child : node->children) {
    collectSide(child, stmt, blockSlots, threadSlots);
  }
}

void collectPath(const NodePtr& node, size_t src, size_t dst, PathInfo& info) {
  switch (node->kind) {
    case NodeKind::Context:
      info.grid = node->grid;
      info.block = node->block;
      break;
    case NodeKind::Band:
      for (const auto& m : node->members) {
        TC_CHECK(
            m.fn.count(src) && m.fn.count(dst),
            "band on the common path misses a statement");
        Locus l;
        l.kind = Locus::Member;
        l.member = &m;
        info.commonLoci.push_back(l);
        if (m.blockDim >= 0) {
          info.srcBlock[static_cast<size_t>(m.blockDim)] = &m;
          info.dstBlock[static_cast<size_t>(m.blockDim)] = &m;
        }
        if (m.threadDim >= 0) {
          info.srcThread[static_cast<size_t>(m.threadDim)] = &m;
          info.dstThread[static_cast<size_t>(m.threadDim)] = &m;
        }
      }
      break;
    default:
      break;
  }
  if (node->children.empty()) {
    return;
  }
  if (node->kind == NodeKind::Sequence || node->kind == NodeKind::Set) {
    size_t srcChild = node->children.size();
    size_t dstChild = node->children.size();
    for (size_t i = 0; i < node->children.size(); ++i) {
      if (!subtreeStmts(node->children[i], {src}).empty()) {
        srcChild = i;
      }
      if (!subtreeStmts(node->children[i], {dst}).empty()) {
        dstChild = i;
      }
    }
    TC_CHECK(
        srcChild < node->children.size() && dstChild < node->children.size(),
        "statement not reachable in schedule tree");
    if (srcChild == dstChild) {
      Locus l;
      l.kind = Locus::SeqPos;
      l.srcPos = static_cast<int64_t>(srcChild);
      l.dstPos = static_cast<int64_t>(dstChild);
      info.commonLoci.push_back(l);
      collectPath(node->children[srcChild], src, dst, info);
      return;
    }
    Locus l;
    l.kind = node->kind == NodeKind::Set ? Locus::Unordered : Locus::SeqPos;
    l.srcPos = static_cast<int64_t>(srcChild);
    l.dstPos = static_cast<int64_t>(dstChild);
    info.commonLoci.push_back(l);
    collectSide(node->children[srcChild], src, info.srcBlock, info.srcThread);
    collectSide(node->children[dstChild], dst, info.dstBlock, info.dstThread);
    return;
  }
  collectPath(node->children[0], src, dst, info);
}

/* --------------------- constraint-system construction ------------------ */

/* Declares auxiliary variables encoding floor/mod member values inside a
 * system. Bounds come from interval arithmetic over the iteration boxes. */
struct ValueBuilder {
  const sem::SpecializedDef& def;
  size_t counter = 0;

  std::pair<int64_t, int64_t> affineRange(
      const poly::AffineExpr& e,
      const sem::ConcreteStmt& cs,
      const std::string& prefix) const {
    int64_t lo = e.cst;
    int64_t hi = e.cst;
    for (const auto& kv : e.coeffs) {
      std::string name = kv.first;
      if (name.rfind(prefix, 0) == 0) {
        name = name.substr(prefix.size());
      }
      const auto& r = cs.ranges.at(name);
      int64_t a = kv.second * r.lo;
      int64_t b = kv.second * (r.hi - 1);
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    return {lo, hi};
  }

  /* Returns {value, tileIdx} expressions for a member on one side. */
  std::pair<poly::AffineExpr, poly::AffineExpr> memberExprs(
      poly::LinearSystem& sys,
      const BandMember& m,
      size_t stmt,
      const std::string& prefix) {
    poly::AffineExpr base = m.fn.at(stmt).withPrefix(prefix);
    if (m.mode == MemberMode::Plain) {
      return {base, base};
    }
    auto range = affineRange(m.fn.at(stmt), def.stmts[stmt], "");
    std::string q = "q" + std::to_string(counter++) + "." + prefix;
    sys.declare(q, floorDiv(range.first, m.tile), floorDiv(range.second, m.tile));
    poly::AffineExpr qe = poly::AffineExpr::var(q);
    // tile*q <= base <= tile*q + tile - 1
    sys.addGe(base - qe.scaled(m.tile));
    sys.addGe(qe.scaled(m.tile) + poly::AffineExpr::constant(m.tile - 1) - base);
    if (m.mode == MemberMode::TileFloor) {
      return {qe.scaled(m.tile), qe};
    }
    return {base - qe.scaled(m.tile), qe}; // Mod: the residue
  }

  /* Spatial coordinate of a member: blockIdx = tileIdx mod grid for block
   * members, value mod blockDim for thread members. Null member means the
   * branch pins the coordinate to zero. */
  poly::AffineExpr coordExpr(
      poly::LinearSystem& sys,
      const BandMember* m,
      size_t stmt,
      const std::string& prefix,
      bool forBlock,
      int64_t extent) {
    if (m == nullptr) {
      return poly::AffineExpr::constant(0);
    }
    auto exprs = memberExprs(sys, *m, stmt, prefix);
    poly::AffineExpr operand = forBlock ? exprs.second : exprs.first;
    if (extent == 1) {
      return poly::AffineExpr::constant(0);
    }
    auto range = affineRange(m->fn.at(stmt), def.stmts[stmt], "");
    int64_t opLo = std::min<int64_t>(0, floorDiv(range.first, 1));
    int64_t opHi = std::max<int64_t>(range.second, 0);
    std::string w = "w" + std::to_string(counter++) + "." + prefix;
    std::string r = "r" + std::to_string(counter++) + "." + prefix;
    sys.declare(w, floorDiv(opLo, extent) - 1, floorDiv(opHi, extent) + 1);
    sys.declare(r, 0, extent - 1);
    // operand = extent * w + r, 0 <= r < extent
    sys.addEq(operand - poly::AffineExpr::var(w).scaled(extent) - poly::AffineExpr::var(r));
    return poly::AffineExpr::var(r);
  }
};

/* Extracts a witness instance for a statement from a solved system. */
std::vector<int64_t> witnessPoint(
    const std::map<std::string, int64_t>& sol,
    const sem::ConcreteStmt& cs,
    const std::string& prefix) {
  std::vector<int64_t> pt;
  for (const auto& iter : cs.iterators) {
    auto it = sol.find(prefix + iter);
    pt.push_back(it == sol.end() ? 0 : it->second);
  }
  return pt;
}

/* Evaluates the time stamps of the common loci for a refined pair. */
bool pairViolates(
    const poly::DepEdge& edge,
    const PathInfo& info,
    const sem::SpecializedDef& def,
    const std::vector<int64_t>& srcPt,
    const std::vector<int64_t>& dstPt,
    std::string& reason) {
  const auto& csSrc = def.stmts[edge.src];
  const auto& csDst = def.stmts[edge.dst];
  std::map<std::string, int64_t> envSrc;
  std::map<std::string, int64_t> envDst;
  for (size_t i = 0; i < csSrc.iterators.size(); ++i) {
    envSrc[csSrc.iterators[i]] = srcPt[i];
  }
  for (size_t i = 0; i < csDst.iterators.size(); ++i) {
    envDst[csDst.iterators[i]] = dstPt[i];
  }
  auto coord = [&](const BandMember* m,
                   const std::map<std::string, int64_t>& env,
                   size_t stmt,
                   bool forBlock,
                   int64_t extent) -> int64_t {
    if (m == nullptr) {
      return 0;
    }
    int64_t val = m->apply(m->fn.at(stmt).eval(env));
    if (forBlock) {
      int64_t divisor = m->mode == MemberMode::TileFloor ? m->tile : 1;
      return modPos(floorDiv(val, divisor), extent);
    }
    return modPos(val, extent);
  };
  for (size_t d = 0; d < 3; ++d) {
    if (coord(info.srcBlock[d], envSrc, edge.src, true, info.grid[d]) !=
        coord(info.dstBlock[d], envDst, edge.dst, true, info.grid[d])) {
      reason = "cross-block";
      return true;
    }
  }
  for (size_t d = 0; d < 3; ++d) {
    if (coord(info.srcThread[d], envSrc, edge.src, false, info.block[d]) !=
        coord(info.dstThread[d], envDst, edge.dst, false, info.block[d])) {
      reason = "cross-thread";
      return true;
    }
  }
  if (edge.relaxable) {
    return false;
  }
  for (const auto& l : info.commonLoci) {
    if (l.kind == Locus::Unordered) {
      reason = "time order";
      return true;
    }
    if (l.kind == Locus::SeqPos) {
      if (l.dstPos > l.srcPos) {
        return false;
      }
      if (l.dstPos < l.srcPos) {
        reason = "time order";
        return true;
      }
      continue;
    }
    const auto& m = *l.member;
    int64_t a = m.apply(m.fn.at(edge.src).eval(envSrc));
    int64_t b = m.apply(m.fn.at(edge.dst).eval(envDst));
    if (m.blockDim >= 0) {
      int64_t divisor = m.mode == MemberMode::TileFloor ? m.tile : 1;
      a = floorDiv(a, divisor);
      b = floorDiv(b, divisor);
    }
    if (b > a) {
      return false;
    }
    if (b < a) {
      reason = "time order";
      return true;
    }
  }
  // Identical schedule point for two distinct ordered instances.
  reason = "time order";
  return true;
}

} // namespace

Placement placementOf(
    const NodePtr& root,
    const sem::SpecializedDef& def,
    size_t stmt,
    const std::vector<int64_t>& point) {
  const auto& cs = def.stmts[stmt];
  TC_CHECK(point.size() == cs.iterators.size(), "instance arity mismatch");
  std::map<std::string, int64_t> env;
  for (size_t i = 0; i < cs.iterators.size(); ++i) {
    env[cs.iterators[i]] = point[i];
  }
  Placement out;
  WalkState st;
  bool found = placementWalk(root, stmt, env, st, out);
  TC_CHECK(found, "statement not reachable in schedule tree");
  return out;
}

std::string Violation::str(
    const sem::SpecializedDef& def,
    const poly::Dependences& deps) const {
  const auto& edge = deps.edges[edgeIdx];
  std::ostringstream os;
  os << reason << " violation on tensor '" << edge.tensor << "': S" << edge.src << "(";
  const auto& csSrc = def.stmts[edge.src];
  for (size_t i = 0; i < src.size(); ++i) {
    os << (i ? ", " : "") << csSrc.iterators[i] << " = " << src[i];
  }
  os << ") must run before S" << edge.dst << "(";
  const auto& csDst = def.stmts[edge.dst];
  for (size_t i = 0; i < dst.size(); ++i) {
    os << (i ? ", " : "") << csDst.iterators[i] << " = " << dst[i];
  }
  os << ")";
  return os.str();
}

std::vector<Violation> validateSchedule(
    const NodePtr& root,
    const sem::SpecializedDef& def,
    const poly::Dependences& deps) {
  std::vector<Violation> out;
  for (size_t ei = 0; ei < deps.edges.size(); ++ei) {
    const auto& edge = deps.edges[ei];
    PathInfo info;
    collectPath(root, edge.src, edge.dst, info);

    if (edge.refined) {
      for (const auto& pr : edge.pairs) {
        std::string reason;
        if (pairViolates(edge, info, def, pr.first, pr.second, reason)) {
          Violation v;
          v.edgeIdx = ei;
          v.reason = reason;
          v.src = pr.first;
          v.dst = pr.second;
          out.push_back(std::move(v));
          break;
        }
      }
      continue;
    }

    bool flagged = false;
    auto report = [&](poly::LinearSystem& sys, const std::string& reason) {
      if (flagged) {
        return;
      }
      auto sol = sys.findPoint();
      if (!sol) {
        return;
      }
      Violation v;
      v.edgeIdx = ei;
      v.reason = reason;
      v.src = witnessPoint(*sol, def.stmts[edge.src], "a.");
      v.dst = witnessPoint(*sol, def.stmts[edge.dst], "b.");
      out.push_back(std::move(v));
      flagged = true;
    };

    for (const auto& base : poly::edgeOrderSystems(def, deps, edge)) {
      if (flagged) {
        break;
      }
      // Cross-block: any difference in a block coordinate.
      for (size_t d = 0; d < 3 && !flagged; ++d) {
        if (!info.srcBlock[d] && !info.dstBlock[d]) {
          continue;
        }
        for (int dir = 0; dir < 2 && !flagged; ++dir) {
          poly::LinearSystem sys = base;
          ValueBuilder vb{def};
          auto a = vb.coordExpr(sys, info.srcBlock[d], edge.src, "a.", true, info.grid[d]);
          auto b = vb.coordExpr(sys, info.dstBlock[d], edge.dst, "b.", true, info.grid[d]);
          sys.addGe((dir == 0 ? a - b : b - a) - poly::AffineExpr::constant(1));
          report(sys, "cross-block");
        }
      }
      // Cross-thread: same block, differing thread coordinate.
      for (size_t d = 0; d < 3 && !flagged; ++d) {
        if (!info.srcThread[d] && !info.dstThread[d]) {
          continue;
        }
        for (int dir = 0; dir < 2 && !flagged; ++dir) {
          poly::LinearSystem sys = base;
          ValueBuilder vb{def};
          for (size_t e = 0; e < 3; ++e) {
            if (!info.srcBlock[e] && !info.dstBlock[e]) {
              continue;
            }
            auto a = vb.coordExpr(sys, info.srcBlock[e], edge.src, "a.", true, info.grid[e]);
            auto b = vb.coordExpr(sys, info.dstBlock[e], edge.dst, "b.", true, info.grid[e]);
            sys.addEq(a - b);
          }
          auto a = vb.coordExpr(sys, info.srcThread[d], edge.src, "a.", false, info.block[d]);
          auto b = vb.coordExpr(sys, info.dstThread[d], edge.dst, "b.", false, info.block[d]);
          sys.addGe((dir == 0 ? a - b : b - a) - poly::AffineExpr::constant(1));
          report(sys, "cross-thread");
        }
      }
      if (edge.relaxable || flagged) {
        continue;
      }
      // Time: same placement, destination not strictly after the source.
      poly::LinearSystem spatial = base;
      ValueBuilder vb{def};
      for (size_t e = 0; e < 3; ++e) {
        if (info.srcBlock[e] || info.dstBlock[e]) {
          auto a = vb.coordExpr(spatial, info.srcBlock[e], edge.src, "a.", true, info.grid[e]);
          auto b = vb.coordExpr(spatial, info.dstBlock[e], edge.dst, "b.", true, info.grid[e]);
          spatial.addEq(a - b);
        }
        if (info.srcThread[e] || info.dstThread[e]) {
          auto a = vb.coordExpr(spatial, info.srcThread[e], edge.src, "a.", false, info.block[e]);
          auto b = vb.coordExpr(spatial, info.dstThread[e], edge.dst, "b.", false, info.block[e]);
          spatial.addEq(a - b);
        }
      }
      std::vector<std::pair<poly::AffineExpr, poly::AffineExpr>> timeEqs;
      bool ordered = false;
      for (const auto& l : info.commonLoci) {
        if (flagged || ordered) {
          break;
        }
        if (l.kind == Locus::Unordered || l.kind == Locus::SeqPos) {
          if (l.kind == Locus::SeqPos && l.dstPos > l.srcPos) {
            ordered = true;
            break;
          }
          if (l.kind == Locus::SeqPos && l.dstPos == l.srcPos) {
            continue;
          }
          poly::LinearSystem sys = spatial;
          for (const auto& eq : timeEqs) {
            sys.addEq(eq.first - eq.second);
          }
          report(sys, "time order");
          break;
        }
        const auto& m = *l.member;
        poly::LinearSystem sys = spatial;
        ValueBuilder vb2 = vb;
        for (const auto& eq : timeEqs) {
          sys.addEq(eq.first - eq.second);
        }
        auto aPair = vb2.memberExprs(sys, m, edge.src, "a.");
        auto bPair = vb2.memberExprs(sys, m, edge.dst, "b.");
        bool useTile = m.blockDim >= 0;
        poly::AffineExpr ta = useTile ? aPair.second : aPair.first;
        poly::AffineExpr tb = useTile ? bPair.second : bPair.first;
        sys.addGe(ta - tb - poly::AffineExpr::constant(1));
        report(sys, "time order");
        // Later loci constrain this member to be equal: declare its
        // encoding in the shared prefix system so later copies inherit it.
        auto ap = vb.memberExprs(spatial, m, edge.src, "a.");
        auto bp = vb.memberExprs(spatial, m, edge.dst, "b.");
        timeEqs.emplace_back(useTile ? ap.second : ap.first, useTile ? bp.second : bp.first);
      }
      if (!flagged && !ordered && !info.commonLoci.empty()) {
        bool lastDecides = false;
        for (const auto& l : info.commonLoci) {
          if (l.kind != Locus::Member && l.dstPos != l.srcPos) {
            lastDecides = true;
          }
        }
        if (!lastDecides) {
          // All loci can coincide: two ordered instances at one point.
          poly::LinearSystem sys = spatial;
          for (const auto& eq : timeEqs) {
            sys.addEq(eq.first - eq.second);
          }
          report(sys, "time order");
        }
      }
    }
  }
  return out;
}

} // namespace sched
} // namespace tc
