/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sem/checks.h"

#include <functional>
#include <sstream>
#include <vector>

#include "tc/lang/printer.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace sem {

namespace {

using lang::Expr;
using lang::ExprKind;
using lang::ExprPtr;

// Cell-precise initialization tracking enumerates statement iteration
// boxes; statements larger than this are accepted on the strength of the
// symbolic check alone.
constexpr int64_t kInitEnumerationCap = 1 << 20;

std::string subscriptKey(const std::vector<ExprPtr>& subs) {
  std::ostringstream os;
  for (const auto& s : subs) {
    os << lang::printExpr(*s) << ";";
  }
  return os.str();
}

void forEachAccess(
    const ExprPtr& e,
    const std::function<void(const Expr&)>& fn) {
  if (!e) {
    return;
  }
  if (e->kind == ExprKind::Access && !e->isBuiltinCall) {
    fn(*e);
  }
  for (const auto& a : e->args) {
    forEachAccess(a, fn);
  }
}

// Linear form of a subscript with all symbols concrete; nullopt for
// data-dependent or otherwise non-affine subscripts.
struct ConcreteLin {
  std::map<std::string, int64_t> coeffs;
  int64_t cst = 0;
};

std::optional<ConcreteLin> linearizeConcrete(
    const ExprPtr& e,
    const SpecializedDef& def,
    const ConcreteStmt& cs) {
  switch (e->kind) {
    case ExprKind::IntConst:
      return ConcreteLin{{}, e->intValue};
    case ExprKind::Ident: {
      if (cs.ranges.count(e->name)) {
        ConcreteLin lin;
        lin.coeffs[e->name] = 1;
        return lin;
      }
      auto it = def.sizes.find(e->name);
      if (it == def.sizes.end()) {
        return std::nullopt;
      }
      return ConcreteLin{{}, it->second};
    }
    case ExprKind::DimOf: {
      auto it = def.shapes.find(e->name);
      if (it == def.shapes.end() || e->dim < 0 || e->dim >= (int)it->second.size()) {
        return std::nullopt;
      }
      return ConcreteLin{{}, it->second[e->dim]};
    }
    case ExprKind::Unary: {
      if (e->op != "-") {
        return std::nullopt;
      }
      auto sub = linearizeConcrete(e->args[0], def, cs);
      if (!sub) {
        return std::nullopt;
      }
      for (auto& [iter, c] : sub->coeffs) {
        (void)iter;
        c = -c;
      }
      sub->cst = -sub->cst;
      return sub;
    }
    case ExprKind::Binary: {
      auto l = linearizeConcrete(e->args[0], def, cs);
      auto r = linearizeConcrete(e->args[1], def, cs);
      if (!l || !r) {
        return std::nullopt;
      }
      if (e->op == "+" || e->op == "-") {
        int64_t sign = e->op == "-" ? -1 : 1;
        for (const auto& [iter, c] : r->coeffs) {
          l->coeffs[iter] += sign * c;
          if (l->coeffs[iter] == 0) {
            l->coeffs.erase(iter);
          }
        }
        l->cst += sign * r->cst;
        return l;
      }
      if (e->op == "*") {
        const ConcreteLin* scalar = r->coeffs.empty() ? &*r : (l->coeffs.empty() ? &*l : nullptr);
        const ConcreteLin* vec = r->coeffs.empty() ? &*l : &*r;
        if (!scalar) {
          return std::nullopt;
        }
        ConcreteLin lin;
        for (const auto& [iter, c] : vec->coeffs) {
          if (c * scalar->cst != 0) {
            lin.coeffs[iter] = c * scalar->cst;
          }
        }
        lin.cst = vec->cst * scalar->cst;
        return lin;
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

// Min and max of a concrete linear form over the statement's box.
std::pair<int64_t, int64_t> linExtrema(const ConcreteLin& lin, const ConcreteStmt& cs) {
  int64_t lo = lin.cst;
  int64_t hi = lin.cst;
  for (const auto& [iter, c] : lin.coeffs) {
    const ConcreteRange& r = cs.range(iter);
    if (c > 0) {
      lo += c * r.lo;
      hi += c * (r.hi - 1);
    } else {
      lo += c * (r.hi - 1);
      hi += c * r.lo;
    }
  }
  return {lo, hi};
}

bool isTemporary(const SpecializedDef& def, const std::string& tensor) {
  auto it = def.vdef.tensors.find(tensor);
  return it != def.vdef.tensors.end() && it->second.role == lang::TensorRole::Temporary;
}

} // namespace

void checkInPlace(const lang::ValidatedDef& vdef) {
  for (const auto& stmt : vdef.def.stmts) {
    std::string lhsKey = subscriptKey(stmt.lhsIndices);
    forEachAccess(stmt.rhs, [&](const Expr& acc) {
      if (acc.name != stmt.lhsTensor) {
        return;
      }
      if (subscriptKey(acc.args) != lhsKey) {
        throwError(
            ErrorKind::LivenessInterference,
            "statement reads '" + acc.name + "' at subscripts other than the ones it writes",
            acc.loc);
      }
    });
  }
}

void checkSymbolicInit(const lang::ValidatedDef& vdef) {
  std::set<std::string> written;
  for (const auto& stmt : vdef.def.stmts) {
    auto requireWritten = [&](const std::string& tensor, SourceLoc loc) {
      auto info = vdef.tensors.find(tensor);
      if (info == vdef.tensors.end() || info->second.role != lang::TensorRole::Temporary) {
        return; // inputs and returns carry incoming values
      }
      if (!written.count(tensor)) {
        throwError(
            ErrorKind::UninitializedRead,
            "temporary '" + tensor + "' is read before any statement writes it",
            loc);
      }
    };
    forEachAccess(stmt.rhs, [&](const Expr& acc) { requireWritten(acc.name, acc.loc); });
    if (lang::isReduction(stmt.op) && !lang::hasInit(stmt.op)) {
      // A plain reduction reads the accumulator it updates.
      requireWritten(stmt.lhsTensor, stmt.loc);
    }
    written.insert(stmt.lhsTensor);
  }
}

void checkConcreteInit(const SpecializedDef& def) {
  // Per-temporary bitmap of initialized cells, updated in textual order.
  std::map<std::string, std::vector<bool>> covered;
  auto cellCount = [&](const std::string& tensor) {
    int64_t cells = 1;
    for (int64_t d : def.shapes.at(tensor)) {
      cells *= d;
    }
    return cells;
  };

  for (const auto& cs : def.stmts) {
    int64_t points = 1;
    for (const auto& [iter, r] : cs.ranges) {
      (void)iter;
      points *= r.extent();
    }
    bool enumerable = points <= kInitEnumerationCap;

    // Reads first: a statement observes the state left by its predecessors.
    auto checkRead = [&](const Expr& acc) {
      if (!isTemporary(def, acc.name) || !enumerable) {
        return;
      }
      auto it = covered.find(acc.name);
      const auto& dims = def.shapes.at(acc.name);
      std::vector<ConcreteLin> lins;
      for (const auto& sub : acc.args) {
        auto lin = linearizeConcrete(sub, def, cs);
        if (!lin) {
          return; // data-dependent; checked at run time
        }
        lins.push_back(std::move(lin.value()));
      }
      // Enumerate the statement box and probe each accessed cell.
      std::vector<std::string> iters(cs.iterators);
      std::vector<int64_t> point(iters.size());
      std::function<void(size_t)> walk = [&](size_t depth) {
        if (depth == iters.size()) {
          int64_t flat = 0;
          for (size_t d = 0; d < lins.size(); ++d) {
            int64_t v = lins[d].cst;
            for (const auto& [iter, c] : lins[d].coeffs) {
              for (size_t k = 0; k < iters.size(); ++k) {
                if (iters[k] == iter) {
                  v += c * point[k];
                }
              }
            }
            flat = flat * dims[d] + v;
          }
          if (it == covered.end() || !(*it).second[flat]) {
            throwError(
                ErrorKind::UninitializedRead,
                "statement reads an uninitialized cell of temporary '" + acc.name + "'",
                acc.loc);
          }
          return;
        }
        const ConcreteRange& r = cs.range(iters[depth]);
        for (int64_t v = r.lo; v < r.hi; ++v) {
          point[depth] = v;
          walk(depth + 1);
        }
      };
      walk(0);
    };

    forEachAccess(cs.stmt.rhs, checkRead);
    if (lang::isReduction(cs.stmt.op)) {
      Expr selfRead;
      selfRead.kind = ExprKind::Access;
      selfRead.name = cs.stmt.lhsTensor;
      selfRead.args = cs.stmt.lhsIndices;
      selfRead.loc = cs.stmt.loc;
      checkRead(selfRead);
    }

    // Then record this statement's writes.
    if (isTemporary(def, cs.stmt.lhsTensor)) {
      auto& bits = covered[cs.stmt.lhsTensor];
      if (bits.empty()) {
        bits.assign(cellCount(cs.stmt.lhsTensor), false);
      }
      const auto& dims = def.shapes.at(cs.stmt.lhsTensor);
      if (!enumerable) {
        // Over-large statement: assume full coverage of its output box, the
        // same grain the symbolic check reasons at.
        bits.assign(bits.size(), true);
        continue;
      }
      std::vector<int64_t> point(cs.stmt.lhsIndices.size());
      std::function<void(size_t)> mark = [&](size_t depth) {
        if (depth == point.size()) {
          int64_t flat = 0;
          for (size_t d = 0; d < point.size(); ++d) {
            flat = flat * dims[d] + point[d];
          }
          bits[flat] = true;
          return;
        }
        const ConcreteRange& r = cs.range(cs.stmt.lhsIndices[depth]->name);
        for (int64_t v = r.lo; v < r.hi; ++v) {
          point[depth] = v;
          mark(depth + 1);
        }
      };
      mark(0);
    }
  }
}

void checkBounds(const SpecializedDef& def) {
  for (const auto& cs : def.stmts) {
    auto checkAccess = [&](const Expr& acc) {
      auto shapeIt = def.shapes.find(acc.name);
      if (shapeIt == def.shapes.end()) {
        return;
      }
      const auto& dims = shapeIt->second;
      for (size_t d = 0; d < acc.args.size() && d < dims.size(); ++d) {
        auto lin = linearizeConcrete(acc.args[d], def, cs);
        if (!lin) {
          continue; // data-dependent; checked at run time
        }
        auto [lo, hi] = linExtrema(*lin, cs);
        if (lo < 0 || hi >= dims[d]) {
          std::ostringstream os;
          os << "subscript " << lang::printExpr(*acc.args[d]) << " of '" << acc.name
             << "' spans [" << lo << ", " << hi << "] but dimension " << d << " has extent "
             << dims[d];
          throwError(ErrorKind::OutOfBounds, os.str(), acc.loc);
        }
      }
    };
    Expr lhs;
    lhs.kind = ExprKind::Access;
    lhs.name = cs.stmt.lhsTensor;
    lhs.args = cs.stmt.lhsIndices;
    lhs.loc = cs.stmt.loc;
    checkAccess(lhs);
    forEachAccess(cs.stmt.rhs, checkAccess);
  }
}

} // namespace sem
} // namespace tc
