/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/lang/printer.h"

#include <cmath>

namespace tc {
namespace lang {
namespace {

// Larger binds tighter. Mirrors the parser's precedence ladder.
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Ternary:
      return 1;
    case ExprKind::Binary:
      if (e.op == "||") {
        return 2;
      }
      if (e.op == "&&") {
        return 3;
      }
      if (e.op == "==" || e.op == "!=") {
        return 4;
      }
      if (e.op == "<" || e.op == ">" || e.op == "<=" || e.op == ">=") {
        return 5;
      }
      if (e.op == "+" || e.op == "-") {
        return 6;
      }
      return 7; // * /
    case ExprKind::Unary:
      return 8;
    default:
      return 9;
  }
}

void printExprRec(std::ostream& os, const Expr& e, int parentPrec) {
  int prec = precedence(e);
  bool parens = prec < parentPrec;
  if (parens) {
    os << "(";
  }
  switch (e.kind) {
    case ExprKind::IntConst:
      os << e.intValue;
      break;
    case ExprKind::FloatConst: {
      double v = e.floatValue;
      if (v == std::floor(v) && std::abs(v) < 1e15) {
        os << v << ".0";
      } else {
        os << v;
      }
      break;
    }
    case ExprKind::Ident:
      os << e.name;
      break;
    case ExprKind::Access: {
      os << e.name << "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) {
          os << ", ";
        }
        printExprRec(os, *e.args[i], 0);
      }
      os << ")";
      break;
    }
    case ExprKind::Unary:
      os << e.op;
      printExprRec(os, *e.args[0], prec);
      break;
    case ExprKind::Binary:
      printExprRec(os, *e.args[0], prec);
      os << " " << e.op << " ";
      // Right child needs parens at equal precedence to reproduce the
      // parser's left associativity.
      printExprRec(os, *e.args[1], prec + 1);
      break;
    case ExprKind::Ternary:
      printExprRec(os, *e.args[0], prec + 1);
      os << " ? ";
      printExprRec(os, *e.args[1], prec + 1);
      os << " : ";
      printExprRec(os, *e.args[2], prec); // right-nested
      break;
    case ExprKind::DimOf:
      os << e.name << "." << e.dim;
      break;
  }
  if (parens) {
    os << ")";
  }
}

} // namespace

std::string printExpr(const Expr& expr) {
  std::ostringstream os;
  printExprRec(os, expr, 0);
  return os.str();
}

std::string printStmt(const Stmt& stmt) {
  std::ostringstream os;
  if (stmt.isDefCall) {
    if (stmt.defCallResults.size() > 1) {
      os << "(";
      for (size_t i = 0; i < stmt.defCallResults.size(); ++i) {
        os << (i ? ", " : "") << stmt.defCallResults[i];
      }
      os << ")";
    } else {
      os << stmt.defCallResults.front();
    }
    os << " = " << printExpr(*stmt.rhs);
    return os.str();
  }
  os << stmt.lhsTensor << "(";
  for (size_t i = 0; i < stmt.lhsIndices.size(); ++i) {
    if (i) {
      os << ", ";
    }
    os << printExpr(*stmt.lhsIndices[i]);
  }
  os << ") " << assignOpToken(stmt.op) << " " << printExpr(*stmt.rhs);
  if (!stmt.where.empty()) {
    os << " where ";
    for (size_t i = 0; i < stmt.where.size(); ++i) {
      if (i) {
        os << ", ";
      }
      const auto& rc = stmt.where[i];
      os << rc.var << " in " << printExpr(*rc.lo) << ":" << printExpr(*rc.hi);
    }
  }
  return os.str();
}

std::string printDef(const TcDef& def) {
  std::ostringstream os;
  os << "def " << def.name << "(";
  for (size_t i = 0; i < def.params.size(); ++i) {
    if (i) {
      os << ", ";
    }
    const Param& p = def.params[i];
    os << elemKindName(p.elemKind);
    if (!p.dims.empty()) {
      os << "(";
      for (size_t d = 0; d < p.dims.size(); ++d) {
        os << (d ? "," : "") << p.dims[d];
      }
      os << ")";
    }
    os << " " << p.name;
  }
  os << ") -> (";
  for (size_t i = 0; i < def.returns.size(); ++i) {
    os << (i ? ", " : "") << def.returns[i];
  }
  os << ") {\n";
  for (const auto& s : def.stmts) {
    os << "  " << printStmt(s) << "\n";
  }
  os << "}\n";
  return os.str();
}

std::string printProgram(const Program& program) {
  std::string out;
  for (const auto& d : program.defs) {
    out += printDef(d);
  }
  return out;
}

} // namespace lang
} // namespace tc
