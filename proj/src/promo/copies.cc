/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/promo/copies.h"

#include "tc/support/diagnostics.h"

namespace tc {
namespace promo {

namespace {

lang::ExprPtr bin(const std::string& op, lang::ExprPtr a, lang::ExprPtr b) {
  auto e = std::make_shared<lang::Expr>();
  e->kind = lang::ExprKind::Binary;
  e->op = op;
  e->args = {std::move(a), std::move(b)};
  return e;
}

const char* threadIdent(int dim) {
  static const char* names[3] = {"@tx", "@ty", "@tz"};
  TC_CHECK(dim >= 0 && dim < 3, "thread dimension out of range");
  return names[dim];
}

/* Local coordinate of one buffer dimension given the raw global-side
 * expression (original subscript or bound iterator). */
lang::ExprPtr localize(lang::ExprPtr raw, const sched::BufferDim& d) {
  lang::ExprPtr local = std::move(raw);
  if (!(d.offset.coeffs.empty() && d.offset.cst == 0)) {
    local = bin("-", local, affineToAst(d.offset));
  }
  if (d.threadDim >= 0) {
    local = bin("/", bin("-", local, lang::makeIdent(threadIdent(d.threadDim))),
                lang::makeIntConst(d.threadExtent));
  }
  return local;
}

std::vector<lang::ExprPtr> localizeSubs(
    const std::vector<lang::ExprPtr>& subs,
    const sched::PromotedGroup& group) {
  TC_CHECK(subs.size() == group.dims.size(), "buffer rank mismatch");
  std::vector<lang::ExprPtr> local;
  for (size_t dim = 0; dim < subs.size(); ++dim) {
    const auto& expansion = group.dims[dim];
    if (expansion.size() == 1 && !expansion[0].indirect) {
      local.push_back(localize(cloneExpr(subs[dim]), expansion[0]));
      continue;
    }
    // Data-dependent dimension: one buffer coordinate per iterator of the
    // subscript; the subscript expression itself is cached per cell.
    for (const auto& d : expansion) {
      local.push_back(localize(lang::makeIdent(d.iter), d));
    }
  }
  return local;
}

lang::ExprPtr rewriteExpr(const lang::ExprPtr& e, const sched::PromotedGroup& group) {
  auto copy = std::make_shared<lang::Expr>(*e);
  for (auto& arg : copy->args) {
    arg = rewriteExpr(arg, group);
  }
  if (copy->kind == lang::ExprKind::Access && copy->name == group.tensor &&
      !copy->isBuiltinCall) {
    // Rewrite against the original subscripts, not the recursed copies:
    // nested accesses inside an indirect dimension are dropped here anyway.
    return lang::makeAccess(group.buffer, localizeSubs(e->args, group), e->loc);
  }
  return copy;
}

} // namespace

lang::ExprPtr cloneExpr(const lang::ExprPtr& e) {
  TC_CHECK(e != nullptr, "cloning a null expression");
  auto copy = std::make_shared<lang::Expr>(*e);
  for (auto& arg : copy->args) {
    arg = cloneExpr(arg);
  }
  return copy;
}

lang::ExprPtr affineToAst(const poly::AffineExpr& e) {
  lang::ExprPtr acc;
  for (const auto& kv : e.coeffs) {
    if (kv.second == 0) {
      continue;
    }
    lang::ExprPtr term = lang::makeIdent(kv.first);
    if (kv.second == -1) {
      auto neg = std::make_shared<lang::Expr>();
      neg->kind = lang::ExprKind::Unary;
      neg->op = "-";
      neg->args = {term};
      term = neg;
    } else if (kv.second != 1) {
      term = bin("*", lang::makeIntConst(kv.second), term);
    }
    acc = acc ? bin("+", acc, term) : term;
  }
  if (e.cst != 0 || !acc) {
    auto c = lang::makeIntConst(e.cst);
    acc = acc ? bin("+", acc, c) : c;
  }
  return acc;
}

void rewriteStmtAccesses(sem::ConcreteStmt& cs, const sched::PromotedGroup& group) {
  if (cs.stmt.lhsTensor == group.tensor) {
    auto local = localizeSubs(cs.stmt.lhsIndices, group);
    cs.stmt.lhsTensor = group.buffer;
    cs.stmt.lhsIndices = local;
  }
  cs.stmt.rhs = rewriteExpr(cs.stmt.rhs, group);
}

void insertExtension(sched::NodePtr& filter, std::vector<sched::PromotedGroup> groups) {
  if (groups.empty()) {
    return;
  }
  auto ext = sched::makeNode(sched::NodeKind::Extension);
  ext->copies = std::move(groups);
  ext->children = filter->children;
  filter->children.clear();
  filter->children.push_back(ext);
}

namespace {

bool exprTouches(const lang::ExprPtr& e, const std::string& tensor) {
  if (e->kind == lang::ExprKind::Access && e->name == tensor && !e->isBuiltinCall) {
    return true;
  }
  for (const auto& arg : e->args) {
    if (exprTouches(arg, tensor)) {
      return true;
    }
  }
  return false;
}

bool stmtTouches(const sem::ConcreteStmt& cs, const std::string& tensor) {
  if (cs.stmt.lhsTensor == tensor) {
    return true;
  }
  return exprTouches(cs.stmt.rhs, tensor);
}

} // namespace

void markBarriers(
    sched::NodePtr& node,
    const sem::SpecializedDef& def,
    const std::vector<sched::PromotedGroup>& groups) {
  if (node->kind == sched::NodeKind::Sequence && node->children.size() > 1) {
    node->barrierAfter.assign(node->children.size(), false);
    std::set<size_t> all;
    for (size_t s = 0; s < def.stmts.size(); ++s) {
      all.insert(s);
    }
    std::vector<std::set<size_t>> childStmts;
    for (const auto& child : node->children) {
      childStmts.push_back(sched::subtreeStmts(child, all));
    }
    for (const auto& g : groups) {
      if (!g.shared || !g.hasWrites) {
        continue;
      }
      std::vector<bool> touches(node->children.size(), false);
      for (size_t i = 0; i < childStmts.size(); ++i) {
        for (size_t s : childStmts[i]) {
          if (stmtTouches(def.stmts[s], g.tensor) ||
              stmtTouches(def.stmts[s], g.buffer)) {
            touches[i] = true;
            break;
          }
        }
      }
      for (size_t i = 0; i + 1 < node->children.size(); ++i) {
        bool before = false;
        for (size_t j = 0; j <= i; ++j) {
          before = before || touches[j];
        }
        bool after = false;
        for (size_t j = i + 1; j < node->children.size(); ++j) {
          after = after || touches[j];
        }
        if (before && after) {
          node->barrierAfter[i] = true;
        }
      }
    }
  }
  for (auto& child : node->children) {
    markBarriers(child, def, groups);
  }
}

} // namespace promo
} // namespace tc
