/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/poly/dependence.h"

#include <functional>
#include <map>
#include <optional>
#include <tuple>

#include "tc/support/diagnostics.h"

namespace tc {
namespace poly {

namespace {

// Last-writer refinement enumerates every statement instance; beyond this
// many points the memory-based edges are kept as-is.
constexpr int64_t kRefineCap = 100000;

void declareInstance(
    LinearSystem& sys,
    const sem::ConcreteStmt& cs,
    const std::string& prefix) {
  for (const auto& iter : cs.iterators) {
    const auto& r = cs.range(iter);
    sys.declare(prefix + iter, r.lo, r.hi - 1);
  }
}

} // namespace

LinearSystem edgeBaseSystem(
    const sem::SpecializedDef& def,
    const Dependences& deps,
    const DepEdge& edge,
    const std::string& srcPrefix,
    const std::string& dstPrefix) {
  const auto& srcStmt = def.stmts[edge.src];
  const auto& dstStmt = def.stmts[edge.dst];
  const auto& srcAcc = deps.accesses[edge.src].all[edge.srcAcc];
  const auto& dstAcc = deps.accesses[edge.dst].all[edge.dstAcc];

  LinearSystem sys;
  declareInstance(sys, srcStmt, srcPrefix);
  declareInstance(sys, dstStmt, dstPrefix);
  size_t dims = std::min(srcAcc.subs.size(), dstAcc.subs.size());
  for (size_t d = 0; d < dims; ++d) {
    if (srcAcc.subs[d] && dstAcc.subs[d]) {
      sys.addEq(srcAcc.subs[d]->withPrefix(srcPrefix) - dstAcc.subs[d]->withPrefix(dstPrefix));
    }
  }
  return sys;
}

std::vector<LinearSystem> edgeOrderSystems(
    const sem::SpecializedDef& def,
    const Dependences& deps,
    const DepEdge& edge,
    const std::string& srcPrefix,
    const std::string& dstPrefix) {
  LinearSystem base = edgeBaseSystem(def, deps, edge, srcPrefix, dstPrefix);
  if (edge.order == OrderMode::TextualForward) {
    return {std::move(base)};
  }
  // Same statement: src lexicographically before dst over the canonical
  // iterator order.
  const auto& iters = def.stmts[edge.src].iterators;
  std::vector<LinearSystem> branches;
  for (size_t d = 0; d < iters.size(); ++d) {
    LinearSystem b = base;
    for (size_t k = 0; k < d; ++k) {
      b.addEq(AffineExpr::var(srcPrefix + iters[k]) - AffineExpr::var(dstPrefix + iters[k]));
    }
    // dst[d] - src[d] - 1 >= 0
    b.addGe(
        AffineExpr::var(dstPrefix + iters[d]) - AffineExpr::var(srcPrefix + iters[d]) -
        AffineExpr::constant(1));
    branches.push_back(std::move(b));
  }
  return branches;
}

namespace {

struct CellTracker {
  // Flat cell -> (writer statement, writer instance point).
  std::map<std::string, std::vector<std::optional<std::pair<size_t, std::vector<int64_t>>>>>
      lastWriter;

  std::vector<std::optional<std::pair<size_t, std::vector<int64_t>>>>& forTensor(
      const sem::SpecializedDef& def,
      const std::string& tensor) {
    auto it = lastWriter.find(tensor);
    if (it == lastWriter.end()) {
      int64_t cells = 1;
      for (int64_t d : def.shapes.at(tensor)) {
        cells *= d;
      }
      it = lastWriter.emplace(tensor, std::vector<std::optional<std::pair<size_t, std::vector<int64_t>>>>(cells)).first;
    }
    return it->second;
  }
};

std::optional<int64_t> flatCell(
    const sem::SpecializedDef& def,
    const AffineAccess& acc,
    const std::map<std::string, int64_t>& point) {
  const auto& dims = def.shapes.at(acc.tensor);
  int64_t flat = 0;
  for (size_t d = 0; d < acc.subs.size(); ++d) {
    int64_t v = acc.subs[d]->eval(point);
    if (v < 0 || v >= dims[d]) {
      return std::nullopt;
    }
    flat = flat * dims[d] + v;
  }
  return flat;
}

} // namespace

Dependences computeDependences(const sem::SpecializedDef& def) {
  Dependences deps;
  deps.accesses = buildAccesses(def);
  size_t n = def.stmts.size();

  for (size_t s = 0; s < n; ++s) {
    for (size_t t = s; t < n; ++t) {
      const auto& sa = deps.accesses[s].all;
      const auto& ta = deps.accesses[t].all;
      for (size_t ai = 0; ai < sa.size(); ++ai) {
        for (size_t bi = 0; bi < ta.size(); ++bi) {
          if (sa[ai].tensor != ta[bi].tensor) {
            continue;
          }
          if (!sa[ai].write && !ta[bi].write) {
            continue;
          }
          if (s == t && ai == bi && !sa[ai].write) {
            continue;
          }
          DepEdge edge;
          edge.src = s;
          edge.dst = t;
          edge.srcAcc = ai;
          edge.dstAcc = bi;
          edge.tensor = sa[ai].tensor;
          edge.order = s == t ? OrderMode::LexForward : OrderMode::TextualForward;
          edge.exact = sa[ai].exact && ta[bi].exact;
          edge.relaxable =
              s == t && sa[ai].lhs && ta[bi].lhs && lang::isReduction(def.stmts[s].stmt.op);
          bool exists = false;
          for (auto& branch : edgeOrderSystems(def, deps, edge)) {
            if (!branch.isEmpty()) {
              exists = true;
              break;
            }
          }
          if (exists) {
            deps.edges.push_back(std::move(edge));
          }
        }
      }
    }
  }

  // Last-writer flow refinement.
  int64_t total = 0;
  for (const auto& cs : def.stmts) {
    int64_t points = 1;
    for (const auto& [iter, r] : cs.ranges) {
      (void)iter;
      points *= r.extent();
    }
    total += points;
  }
  if (total > kRefineCap) {
    return deps;
  }

  CellTracker tracker;
  std::map<std::tuple<size_t, size_t, size_t>, std::vector<std::pair<std::vector<int64_t>, std::vector<int64_t>>>>
      flowPairs;
  for (size_t s = 0; s < n; ++s) {
    const auto& cs = def.stmts[s];
    const auto& sa = deps.accesses[s].all;
    std::map<std::string, int64_t> point;
    std::vector<int64_t> pointVec(cs.iterators.size());
    std::function<void(size_t)> walk = [&](size_t depth) {
      if (depth == cs.iterators.size()) {
        for (size_t bi = 0; bi < sa.size(); ++bi) {
          if (sa[bi].write || !sa[bi].exact) {
            continue;
          }
          auto cell = flatCell(def, sa[bi], point);
          if (!cell) {
            continue;
          }
          const auto& writer = tracker.forTensor(def, sa[bi].tensor)[*cell];
          if (writer) {
            flowPairs[{writer->first, s, bi}].emplace_back(writer->second, pointVec);
          }
        }
        auto cell = flatCell(def, sa[0], point);
        if (cell) {
          tracker.forTensor(def, sa[0].tensor)[*cell] = {s, pointVec};
        }
        return;
      }
      const auto& r = cs.range(cs.iterators[depth]);
      for (int64_t v = r.lo; v < r.hi; ++v) {
        point[cs.iterators[depth]] = v;
        pointVec[depth] = v;
        walk(depth + 1);
      }
    };
    walk(0);
  }

  for (auto& edge : deps.edges) {
    const auto& srcAcc = deps.accesses[edge.src].all[edge.srcAcc];
    const auto& dstAcc = deps.accesses[edge.dst].all[edge.dstAcc];
    if (!srcAcc.write || dstAcc.write || !dstAcc.exact) {
      continue; // only read-after-write edges with evaluable reads refine
    }
    edge.refined = true;
    auto it = flowPairs.find({edge.src, edge.dst, edge.dstAcc});
    if (it != flowPairs.end()) {
      edge.pairs = std::move(it->second);
    }
  }
  return deps;
}

std::vector<InstancePair> enumeratePairs(
    const sem::SpecializedDef& def,
    const Dependences& deps,
    const DepEdge& edge,
    int64_t cap) {
  std::vector<InstancePair> out;
  if (edge.refined) {
    for (const auto& [a, b] : edge.pairs) {
      if ((int64_t)out.size() >= cap) {
        break;
      }
      out.push_back({a, b});
    }
    return out;
  }

  const auto& srcStmt = def.stmts[edge.src];
  const auto& dstStmt = def.stmts[edge.dst];
  const auto& srcAcc = deps.accesses[edge.src].all[edge.srcAcc];
  const auto& dstAcc = deps.accesses[edge.dst].all[edge.dstAcc];

  auto enumerate = [&](const sem::ConcreteStmt& cs,
                       const std::function<void(const std::vector<int64_t>&)>& fn) {
    std::vector<int64_t> v(cs.iterators.size());
    std::function<void(size_t)> walk = [&](size_t depth) {
      if (depth == v.size()) {
        fn(v);
        return;
      }
      const auto& r = cs.range(cs.iterators[depth]);
      for (int64_t x = r.lo; x < r.hi; ++x) {
        v[depth] = x;
        walk(depth + 1);
      }
    };
    walk(0);
  };

  auto toPoint = [](const sem::ConcreteStmt& cs, const std::vector<int64_t>& v) {
    std::map<std::string, int64_t> p;
    for (size_t i = 0; i < cs.iterators.size(); ++i) {
      p[cs.iterators[i]] = v[i];
    }
    return p;
  };

  enumerate(srcStmt, [&](const std::vector<int64_t>& a) {
    if ((int64_t)out.size() >= cap) {
      return;
    }
    auto pa = toPoint(srcStmt, a);
    enumerate(dstStmt, [&](const std::vector<int64_t>& b) {
      if ((int64_t)out.size() >= cap) {
        return;
      }
      if (edge.order == OrderMode::LexForward && !(a < b)) {
        return; // vector comparison is lexicographic
      }
      auto pb = toPoint(dstStmt, b);
      size_t dims = std::min(srcAcc.subs.size(), dstAcc.subs.size());
      for (size_t d = 0; d < dims; ++d) {
        if (srcAcc.subs[d] && dstAcc.subs[d] &&
            srcAcc.subs[d]->eval(pa) != dstAcc.subs[d]->eval(pb)) {
          return;
        }
      }
      out.push_back({a, b});
    });
  });
  return out;
}

} // namespace poly
} // namespace tc
