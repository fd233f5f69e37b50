/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tc/support/diagnostics.h"

namespace tc {
namespace lang {

// Expression nodes. The grammar cannot distinguish a tensor access from a
// call at parse time (both are id '(' exp_list ')'), so both parse to
// Access and validation reclassifies builtin calls.
enum class ExprKind {
  IntConst,
  FloatConst,
  Ident, // iterator or scalar parameter, resolved during validation
  Access, // tensor access or (after validation) builtin call
  Unary, // -e, !e
  Binary,
  Ternary, // cond ? a : b, right-nested
  DimOf, // id.num — extent of a tensor dimension
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  ExprKind kind;
  SourceLoc loc;

  int64_t intValue = 0; // IntConst
  double floatValue = 0; // FloatConst
  std::string name; // Ident, Access (callee/tensor), DimOf (tensor)
  std::string op; // Unary ("-","!"), Binary ("+","-","*","/","<",...)
  std::vector<ExprPtr> args; // Access args, Unary/Binary/Ternary operands
  int dim = 0; // DimOf
  bool isBuiltinCall = false; // set on Access by validation
};

ExprPtr makeIntConst(int64_t v, SourceLoc loc = {});
ExprPtr makeIdent(const std::string& name, SourceLoc loc = {});
ExprPtr makeAccess(const std::string& tensor, std::vector<ExprPtr> args, SourceLoc loc = {});

// Assignment operators. The Bang variants initialize the accumulator with
// the reduction's neutral element before any update.
enum class AssignOp {
  Assign, // =
  PlusEq, // +=
  PlusEqBang, // +=!
  TimesEq, // *=
  TimesEqBang, // *=!
  MinEq, // min=
  MinEqBang, // min=!
  MaxEq, // max=
  MaxEqBang, // max=!
};

bool isReduction(AssignOp op);
bool hasInit(AssignOp op);
AssignOp withoutInit(AssignOp op);
const char* assignOpToken(AssignOp op);

// `id in lo : hi` (half-open) attached to a statement via `where`.
struct RangeConstraint {
  std::string var;
  ExprPtr lo;
  ExprPtr hi;
  SourceLoc loc;
};

struct Stmt {
  std::string lhsTensor;
  std::vector<ExprPtr> lhsIndices;
  AssignOp op = AssignOp::Assign;
  ExprPtr rhs;
  std::vector<RangeConstraint> where;
  SourceLoc loc;

  // Set by the parser for the unsupported `(a,b) = f(...)` def-call form so
  // validation can emit a dedicated diagnostic.
  bool isDefCall = false;
  std::vector<std::string> defCallResults;
};

enum class ElemKind { Float, Int };

const char* elemKindName(ElemKind kind);
size_t elemKindSize(ElemKind kind);

// A parameter: scalar (`float a`, `int sh`) when dims is empty, tensor
// (`float(N,M) A`) otherwise. Tensor dimensions are size symbols.
struct Param {
  ElemKind elemKind = ElemKind::Float;
  std::vector<std::string> dims;
  std::string name;
  SourceLoc loc;

  bool isScalar() const {
    return dims.empty();
  }
};

struct TcDef {
  std::string name;
  std::vector<Param> params;
  std::vector<std::string> returns;
  std::vector<Stmt> stmts;
  SourceLoc loc;

  const Param* findParam(const std::string& name) const;
  bool isReturn(const std::string& name) const;
};

// A parsed source file; the grammar admits several defs per buffer.
struct Program {
  std::vector<TcDef> defs;

  const TcDef& only() const;
  const TcDef* find(const std::string& name) const;
};

} // namespace lang
} // namespace tc
