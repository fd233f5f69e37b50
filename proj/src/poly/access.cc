/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/poly/access.h"

#include <functional>

#include "tc/support/diagnostics.h"

namespace tc {
namespace poly {

namespace {

using lang::Expr;
using lang::ExprKind;
using lang::ExprPtr;

} // namespace

std::optional<AffineExpr> linearizeSubscript(
    const ExprPtr& e,
    const sem::SpecializedDef& def,
    const sem::ConcreteStmt& cs) {
  switch (e->kind) {
    case ExprKind::IntConst:
      return AffineExpr::constant(e->intValue);
    case ExprKind::Ident: {
      if (cs.ranges.count(e->name)) {
        return AffineExpr::var(e->name);
      }
      auto it = def.sizes.find(e->name);
      if (it == def.sizes.end()) {
        return std::nullopt;
      }
      return AffineExpr::constant(it->second);
    }
    case ExprKind::DimOf: {
      auto it = def.shapes.find(e->name);
      if (it == def.shapes.end() || e->dim < 0 || e->dim >= (int)it->second.size()) {
        return std::nullopt;
      }
      return AffineExpr::constant(it->second[e->dim]);
    }
    case ExprKind::Unary: {
      if (e->op != "-") {
        return std::nullopt;
      }
      auto sub = linearizeSubscript(e->args[0], def, cs);
      if (!sub) {
        return std::nullopt;
      }
      return sub->scaled(-1);
    }
    case ExprKind::Binary: {
      auto l = linearizeSubscript(e->args[0], def, cs);
      auto r = linearizeSubscript(e->args[1], def, cs);
      if (!l || !r) {
        return std::nullopt;
      }
      if (e->op == "+") {
        return *l + *r;
      }
      if (e->op == "-") {
        return *l - *r;
      }
      if (e->op == "*") {
        if (r->coeffs.empty()) {
          return l->scaled(r->cst);
        }
        if (l->coeffs.empty()) {
          return r->scaled(l->cst);
        }
        return std::nullopt;
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

std::vector<StmtAccesses> buildAccesses(const sem::SpecializedDef& def) {
  std::vector<StmtAccesses> out;
  for (const auto& cs : def.stmts) {
    StmtAccesses sa;

    auto lower = [&](const std::string& tensor,
                     const std::vector<ExprPtr>& subs,
                     bool write,
                     bool lhs,
                     SourceLoc loc) {
      AffineAccess acc;
      acc.tensor = tensor;
      acc.write = write;
      acc.lhs = lhs;
      acc.loc = loc;
      for (const auto& s : subs) {
        acc.subs.push_back(linearizeSubscript(s, def, cs));
        if (!acc.subs.back()) {
          acc.exact = false;
        }
      }
      sa.all.push_back(std::move(acc));
    };

    lower(cs.stmt.lhsTensor, cs.stmt.lhsIndices, /*write=*/true, /*lhs=*/true, cs.stmt.loc);
    if (lang::isReduction(cs.stmt.op)) {
      lower(cs.stmt.lhsTensor, cs.stmt.lhsIndices, /*write=*/false, /*lhs=*/true, cs.stmt.loc);
    }

    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
      if (!e) {
        return;
      }
      if (e->kind == ExprKind::Access && !e->isBuiltinCall) {
        lower(e->name, e->args, /*write=*/false, /*lhs=*/false, e->loc);
      }
      for (const auto& a : e->args) {
        walk(a);
      }
    };
    walk(cs.stmt.rhs);

    out.push_back(std::move(sa));
  }
  return out;
}

} // namespace poly
} // namespace tc
