/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/lang/validate.h"

#include <algorithm>

namespace tc {
namespace lang {
namespace {

struct BuiltinSpec {
  const char* name;
  int arity;
};

constexpr BuiltinSpec kBuiltins[] = {
    {"fmaxf", 2},
    {"fminf", 2},
    {"exp", 1},
    {"log", 1},
    {"tanh", 1},
    {"sigmoid", 1},
    {"abs", 1},
};

class Validator {
 public:
  Validator(const TcDef& def, const Program* siblings)
      : result_{def, {}, {}, {}, {}}, siblings_(siblings) {}

  ValidatedDef run() {
    collectDeclarations();
    for (size_t i = 0; i < result_.def.stmts.size(); ++i) {
      validateStmt(result_.def.stmts[i]);
    }
    finalizeTensors();
    return std::move(result_);
  }

 private:
  void collectDeclarations() {
    const TcDef& def = result_.def;
    std::set<std::string> seen;
    for (const Param& p : def.params) {
      if (!seen.insert(p.name).second) {
        throwError(ErrorKind::Name, "duplicate parameter '" + p.name + "'", p.loc);
      }
      if (p.isScalar()) {
        result_.scalars[p.name] = {p.elemKind};
      } else {
        TensorInfo info;
        info.elemKind = p.elemKind;
        info.rank = static_cast<int>(p.dims.size());
        info.declaredDims = p.dims;
        info.role = TensorRole::Input;
        result_.tensors[p.name] = info;
        for (const auto& d : p.dims) {
          result_.sizeSymbols.insert(d);
        }
      }
    }
    for (const std::string& r : def.returns) {
      if (!seen.insert(r).second) {
        throwError(ErrorKind::Name, "return '" + r + "' shadows a parameter", def.loc);
      }
      TensorInfo info;
      info.elemKind = ElemKind::Float; // outputs are always float
      info.rank = -1; // fixed at first use
      info.role = TensorRole::Output;
      result_.tensors[r] = info;
    }
  }

  bool isSizeSymbol(const std::string& name) const {
    return result_.sizeSymbols.count(name) != 0;
  }
  bool isScalar(const std::string& name) const {
    return result_.scalars.count(name) != 0;
  }
  bool isTensor(const std::string& name) const {
    return result_.tensors.count(name) != 0;
  }

  TensorInfo& tensorAt(const std::string& name, SourceLoc loc) {
    auto it = result_.tensors.find(name);
    if (it == result_.tensors.end()) {
      if (siblings_ && siblings_->find(name)) {
        throwError(
            ErrorKind::UnsupportedCall,
            "'" + name + "' is another def; defs cannot call other defs, inline the computation instead",
            loc);
      }
      throwError(ErrorKind::Name, "unknown tensor '" + name + "'", loc);
    }
    return it->second;
  }

  // Register a use of tensor `name` with `rank` subscripts. Outputs and
  // temporaries adopt the rank of their first use.
  void noteTensorUse(const std::string& name, int rank, bool isWrite, SourceLoc loc) {
    TensorInfo& info = tensorAt(name, loc);
    if (info.rank < 0) {
      info.rank = rank;
    } else if (info.rank != rank) {
      std::ostringstream ss;
      ss << "tensor '" << name << "' used with " << rank << " subscripts but has rank "
         << info.rank;
      throwError(ErrorKind::Name, ss.str(), loc);
    }
    if (isWrite) {
      if (info.role == TensorRole::Input) {
        throwError(ErrorKind::Name, "cannot write to input parameter '" + name + "'", loc);
      }
      info.written = true;
    } else {
      info.read = true;
    }
  }

  void validateStmt(Stmt& stmt) {
    StmtInfo sinfo;
    if (stmt.isDefCall) {
      throwError(
          ErrorKind::UnsupportedCall,
          "defs cannot call other defs; '" + (stmt.rhs ? stmt.rhs->name : std::string("?")) +
              "' must be inlined",
          stmt.loc);
    }

    // The LHS tensor: create a temporary on first write if unknown.
    if (!isTensor(stmt.lhsTensor)) {
      if (isScalar(stmt.lhsTensor) || isSizeSymbol(stmt.lhsTensor)) {
        throwError(
            ErrorKind::Name, "'" + stmt.lhsTensor + "' is not a tensor", stmt.loc);
      }
      TensorInfo info;
      info.elemKind = ElemKind::Float;
      info.rank = -1;
      info.role = TensorRole::Temporary;
      result_.tensors[stmt.lhsTensor] = info;
    }

    auto useIterator = [&](const std::string& name) {
      if (std::find(sinfo.iterators.begin(), sinfo.iterators.end(), name) ==
          sinfo.iterators.end()) {
        sinfo.iterators.push_back(name);
      }
    };

    std::set<std::string> lhsIters;
    for (const ExprPtr& idx : stmt.lhsIndices) {
      if (idx->kind != ExprKind::Ident) {
        throwError(
            ErrorKind::Name,
            "left-hand side subscripts must be plain iterators",
            idx->loc);
      }
      if (isScalar(idx->name) || isSizeSymbol(idx->name) || isTensor(idx->name)) {
        throwError(
            ErrorKind::Name,
            "left-hand side subscript '" + idx->name + "' is not an iterator",
            idx->loc);
      }
      useIterator(idx->name);
      lhsIters.insert(idx->name);
    }
    noteTensorUse(stmt.lhsTensor, static_cast<int>(stmt.lhsIndices.size()), /*isWrite=*/true, stmt.loc);

    validateExpr(*stmt.rhs, /*inSubscript=*/false, sinfo, useIterator);

    for (const RangeConstraint& rc : stmt.where) {
      if (std::find(sinfo.iterators.begin(), sinfo.iterators.end(), rc.var) ==
          sinfo.iterators.end()) {
        throwError(
            ErrorKind::Name,
            "where clause constrains '" + rc.var + "' which is not used in the statement",
            rc.loc);
      }
      validateWhereBound(*rc.lo);
      validateWhereBound(*rc.hi);
    }

    for (const std::string& it : sinfo.iterators) {
      if (!lhsIters.count(it)) {
        sinfo.reductionIters.push_back(it);
      }
    }
    result_.stmtInfo.push_back(std::move(sinfo));
  }

  template <typename UseIter>
  void validateExpr(Expr& e, bool inSubscript, StmtInfo& sinfo, UseIter useIterator) {
    switch (e.kind) {
      case ExprKind::IntConst:
      case ExprKind::FloatConst:
        return;
      case ExprKind::Ident: {
        if (isTensor(e.name)) {
          throwError(
              ErrorKind::Name,
              "tensor '" + e.name + "' used without subscripts",
              e.loc);
        }
        if (isScalar(e.name)) {
          if (inSubscript && result_.scalars[e.name].elemKind != ElemKind::Int) {
            throwError(
                ErrorKind::Name,
                "float scalar '" + e.name + "' cannot appear in a subscript",
                e.loc);
          }
          return;
        }
        if (isSizeSymbol(e.name)) {
          return;
        }
        useIterator(e.name);
        return;
      }
      case ExprKind::Access: {
        if (isBuiltin(e.name)) {
          if (isTensor(e.name)) {
            // Shadowing a builtin with a tensor would be ambiguous.
            throwError(
                ErrorKind::Name,
                "'" + e.name + "' is both a tensor and a builtin",
                e.loc);
          }
          e.isBuiltinCall = true;
          int want = builtinArity(e.name);
          if (static_cast<int>(e.args.size()) != want) {
            std::ostringstream ss;
            ss << "builtin '" << e.name << "' takes " << want << " argument(s), got "
               << e.args.size();
            throwError(ErrorKind::Name, ss.str(), e.loc);
          }
          for (ExprPtr& a : e.args) {
            validateExpr(*a, /*inSubscript=*/false, sinfo, useIterator);
          }
          return;
        }
        noteTensorUse(e.name, static_cast<int>(e.args.size()), /*isWrite=*/false, e.loc);
        for (ExprPtr& a : e.args) {
          validateExpr(*a, /*inSubscript=*/true, sinfo, useIterator);
        }
        return;
      }
      case ExprKind::Unary:
        validateExpr(*e.args[0], inSubscript, sinfo, useIterator);
        return;
      case ExprKind::Binary:
        validateExpr(*e.args[0], inSubscript, sinfo, useIterator);
        validateExpr(*e.args[1], inSubscript, sinfo, useIterator);
        return;
      case ExprKind::Ternary:
        for (ExprPtr& a : e.args) {
          validateExpr(*a, inSubscript, sinfo, useIterator);
        }
        return;
      case ExprKind::DimOf: {
        TensorInfo& info = tensorAt(e.name, e.loc);
        if (info.rank >= 0 && (e.dim < 0 || e.dim >= info.rank)) {
          std::ostringstream ss;
          ss << "dimension " << e.dim << " out of range for rank-" << info.rank
             << " tensor '" << e.name << "'";
          throwError(ErrorKind::Name, ss.str(), e.loc);
        }
        return;
      }
    }
  }

  // Range bounds may reference only constants, size symbols, dimension
  // extents and int scalar parameters — never iterators.
  void validateWhereBound(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntConst:
        return;
      case ExprKind::Ident:
        if (isSizeSymbol(e.name)) {
          return;
        }
        if (isScalar(e.name)) {
          if (result_.scalars.at(e.name).elemKind != ElemKind::Int) {
            throwError(
                ErrorKind::Name,
                "float scalar '" + e.name + "' cannot bound a range",
                e.loc);
          }
          return;
        }
        throwError(
            ErrorKind::Name,
            "range bounds may only use size symbols and constants, not '" + e.name + "'",
            e.loc);
      case ExprKind::DimOf:
        return;
      case ExprKind::Binary:
        if (e.op == "+" || e.op == "-" || e.op == "*" || e.op == "/") {
          validateWhereBound(*e.args[0]);
          validateWhereBound(*e.args[1]);
          return;
        }
        break;
      case ExprKind::Unary:
        if (e.op == "-") {
          validateWhereBound(*e.args[0]);
          return;
        }
        break;
      default:
        break;
    }
    throwError(ErrorKind::Name, "unsupported expression in range bound", e.loc);
  }

  void finalizeTensors() {
    for (auto& [name, info] : result_.tensors) {
      if (info.role == TensorRole::Output && !info.written && !info.read) {
        throwError(
            ErrorKind::Name,
            "return '" + name + "' is never defined or used",
            result_.def.loc);
      }
      if (info.role == TensorRole::Temporary && !info.written) {
        throwError(
            ErrorKind::Name, "temporary '" + name + "' is read but never defined",
            result_.def.loc);
      }
    }
  }

  ValidatedDef result_;
  const Program* siblings_;
};

} // namespace

bool isBuiltin(const std::string& name) {
  for (const auto& b : kBuiltins) {
    if (name == b.name) {
      return true;
    }
  }
  return false;
}

int builtinArity(const std::string& name) {
  for (const auto& b : kBuiltins) {
    if (name == b.name) {
      return b.arity;
    }
  }
  return -1;
}

ValidatedDef validateNames(const TcDef& def, const Program* siblings) {
  return Validator(def, siblings).run();
}

} // namespace lang
} // namespace tc
