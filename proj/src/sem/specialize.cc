/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sem/specialize.h"

#include <cmath>
#include <limits>

#include "tc/support/diagnostics.h"

namespace tc {
namespace sem {

const ConcreteRange& ConcreteStmt::range(const std::string& iter) const {
  auto it = ranges.find(iter);
  TC_CHECK(it != ranges.end(), "no concrete range for iterator '" << iter << "'");
  return it->second;
}

namespace {

double neutralElement(lang::AssignOp op) {
  switch (op) {
    case lang::AssignOp::PlusEqBang:
      return 0.0;
    case lang::AssignOp::TimesEqBang:
      return 1.0;
    case lang::AssignOp::MinEqBang:
      return std::numeric_limits<double>::infinity();
    case lang::AssignOp::MaxEqBang:
      return -std::numeric_limits<double>::infinity();
    default:
      TC_CHECK(false, "operator has no neutral element");
      return 0.0;
  }
}

} // namespace

SpecializedDef specialize(
    const lang::ValidatedDef& vdef,
    const InferredRanges& inferred,
    const std::map<std::string, int64_t>& sizes) {
  SpecializedDef out;
  out.vdef = vdef;
  out.sym = inferred;

  // Int scalar parameters may appear in subscripts (e.g. a stride) and then
  // show up in inferred bounds; they need compile-time values just like the
  // declared size symbols do.
  std::set<std::string> needed = inferred.sizeSymbols;
  for (const auto& [tensor, dims] : inferred.shapes) {
    (void)tensor;
    for (const auto& d : dims) {
      d.collectSymbols(needed);
    }
  }
  for (const auto& sr : inferred.stmts) {
    for (const auto& [iter, r] : sr.ranges) {
      (void)iter;
      r.lo.collectSymbols(needed);
      r.hi.collectSymbols(needed);
    }
  }

  for (const auto& sym : needed) {
    auto it = sizes.find(sym);
    if (it == sizes.end()) {
      throwError(ErrorKind::Name, "size symbol '" + sym + "' was not bound", vdef.def.loc);
    }
    if (it->second < 1) {
      throwError(
          ErrorKind::Name,
          "size symbol '" + sym + "' must be at least 1, got " + std::to_string(it->second),
          vdef.def.loc);
    }
    out.sizes[sym] = it->second;
  }

  for (const auto& [tensor, dims] : inferred.shapes) {
    std::vector<int64_t> concrete;
    for (const auto& d : dims) {
      int64_t v = d.evaluate(out.sizes);
      if (v < 1) {
        throwError(
            ErrorKind::EmptyRange,
            "dimension " + d.str() + " of tensor '" + tensor + "' is empty at these sizes",
            vdef.def.loc);
      }
      concrete.push_back(v);
    }
    out.shapes[tensor] = std::move(concrete);
  }

  for (size_t s = 0; s < vdef.def.stmts.size(); ++s) {
    const lang::Stmt& src = vdef.def.stmts[s];
    const StmtRanges& sr = inferred.stmts[s];

    std::map<std::string, ConcreteRange> ranges;
    for (const auto& iter : sr.iterators) {
      const SymRange& r = sr.at(iter);
      ConcreteRange cr{r.lo.evaluate(out.sizes), r.hi.evaluate(out.sizes)};
      if (cr.extent() <= 0) {
        throwError(
            ErrorKind::EmptyRange,
            "range of iterator '" + iter + "' is empty at these sizes",
            src.loc);
      }
      ranges[iter] = cr;
    }

    if (lang::hasInit(src.op)) {
      // Desugar `op=!` into a neutral-element store followed by the plain
      // reduction. The store spans exactly the reduction's output box.
      ConcreteStmt init;
      init.stmt.lhsTensor = src.lhsTensor;
      init.stmt.lhsIndices = src.lhsIndices;
      init.stmt.op = lang::AssignOp::Assign;
      auto neutral = std::make_shared<lang::Expr>();
      neutral->kind = lang::ExprKind::FloatConst;
      neutral->floatValue = neutralElement(src.op);
      neutral->loc = src.loc;
      init.stmt.rhs = neutral;
      init.stmt.loc = src.loc;
      for (const auto& idx : src.lhsIndices) {
        init.iterators.push_back(idx->name);
        init.ranges[idx->name] = ranges.at(idx->name);
      }
      init.origIndex = s;
      init.isSyntheticInit = true;
      out.stmts.push_back(std::move(init));
    }

    ConcreteStmt cs;
    cs.stmt = src;
    cs.stmt.op = lang::withoutInit(src.op);
    cs.iterators = sr.iterators;
    cs.ranges = std::move(ranges);
    cs.origIndex = s;
    out.stmts.push_back(std::move(cs));
  }

  return out;
}

} // namespace sem
} // namespace tc
