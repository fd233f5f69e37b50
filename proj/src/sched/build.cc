/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sched/build.h"

#include "tc/support/diagnostics.h"

namespace tc {
namespace sched {

namespace {

/* Evaluates a per-statement member function at a concrete instance. */
int64_t evalAt(
    const poly::AffineExpr& fn,
    const sem::ConcreteStmt& cs,
    const std::vector<int64_t>& point) {
  std::map<std::string, int64_t> env;
  TC_CHECK(point.size() == cs.iterators.size(), "instance arity mismatch");
  for (size_t i = 0; i < cs.iterators.size(); ++i) {
    env[cs.iterators[i]] = point[i];
  }
  return fn.eval(env);
}

} // namespace

bool memberCoincident(
    const poly::Dependences& deps,
    const sem::SpecializedDef& def,
    const std::set<size_t>& stmts,
    const std::map<size_t, poly::AffineExpr>& fn) {
  for (const auto& edge : deps.edges) {
    if (!stmts.count(edge.src) || !stmts.count(edge.dst)) {
      continue;
    }
    auto srcIt = fn.find(edge.src);
    auto dstIt = fn.find(edge.dst);
    if (srcIt == fn.end() || dstIt == fn.end()) {
      continue;
    }
    if (edge.refined) {
      for (const auto& pr : edge.pairs) {
        int64_t a = evalAt(srcIt->second, def.stmts[edge.src], pr.first);
        int64_t b = evalAt(dstIt->second, def.stmts[edge.dst], pr.second);
        if (a != b) {
          return false;
        }
      }
      continue;
    }
    poly::AffineExpr fa = srcIt->second.withPrefix("a.");
    poly::AffineExpr fb = dstIt->second.withPrefix("b.");
    for (const auto& base : poly::edgeOrderSystems(def, deps, edge)) {
      {
        poly::LinearSystem sys = base;
        sys.addGe(fa - fb - poly::AffineExpr::constant(1));
        if (!sys.isEmpty()) {
          return false;
        }
      }
      {
        poly::LinearSystem sys = base;
        sys.addGe(fb - fa - poly::AffineExpr::constant(1));
        if (!sys.isEmpty()) {
          return false;
        }
      }
    }
  }
  return true;
}

NodePtr makeStmtBand(
    const sem::SpecializedDef& def,
    const poly::Dependences& deps,
    size_t stmtIdx) {
  const auto& cs = def.stmts[stmtIdx];
  auto band = makeNode(NodeKind::Band);
  band->permutable = true;
  std::set<size_t> self = {stmtIdx};
  for (const auto& iter : cs.iterators) {
    BandMember m;
    m.fn[stmtIdx] = poly::AffineExpr::var(iter);
    m.coincident = memberCoincident(deps, def, self, m.fn);
    band->members.push_back(std::move(m));
  }
  return band;
}

NodePtr buildCanonicalTree(const sem::SpecializedDef& def, const poly::Dependences& deps) {
  auto domain = makeNode(NodeKind::Domain);
  for (size_t s = 0; s < def.stmts.size(); ++s) {
    domain->stmts.insert(s);
  }
  auto seq = makeNode(NodeKind::Sequence);
  for (size_t s = 0; s < def.stmts.size(); ++s) {
    auto filter = makeNode(NodeKind::Filter);
    filter->stmts.insert(s);
    auto band = makeStmtBand(def, deps, s);
    if (!band->members.empty()) {
      filter->children.push_back(band);
    }
    seq->children.push_back(filter);
  }
  domain->children.push_back(seq);
  NodePtr root = domain;
  simplify(root, domain->stmts);
  return root;
}

} // namespace sched
} // namespace tc
