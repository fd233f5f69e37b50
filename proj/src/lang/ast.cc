/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/lang/ast.h"

namespace tc {
namespace lang {

ExprPtr makeIntConst(int64_t v, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::IntConst;
  e->intValue = v;
  e->loc = loc;
  return e;
}

ExprPtr makeIdent(const std::string& name, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ident;
  e->name = name;
  e->loc = loc;
  return e;
}

ExprPtr makeAccess(const std::string& tensor, std::vector<ExprPtr> args, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Access;
  e->name = tensor;
  e->args = std::move(args);
  e->loc = loc;
  return e;
}

bool isReduction(AssignOp op) {
  return op != AssignOp::Assign;
}

bool hasInit(AssignOp op) {
  switch (op) {
    case AssignOp::PlusEqBang:
    case AssignOp::TimesEqBang:
    case AssignOp::MinEqBang:
    case AssignOp::MaxEqBang:
      return true;
    default:
      return false;
  }
}

AssignOp withoutInit(AssignOp op) {
  switch (op) {
    case AssignOp::PlusEqBang:
      return AssignOp::PlusEq;
    case AssignOp::TimesEqBang:
      return AssignOp::TimesEq;
    case AssignOp::MinEqBang:
      return AssignOp::MinEq;
    case AssignOp::MaxEqBang:
      return AssignOp::MaxEq;
    default:
      return op;
  }
}

const char* assignOpToken(AssignOp op) {
  switch (op) {
    case AssignOp::Assign:
      return "=";
    case AssignOp::PlusEq:
      return "+=";
    case AssignOp::PlusEqBang:
      return "+=!";
    case AssignOp::TimesEq:
      return "*=";
    case AssignOp::TimesEqBang:
      return "*=!";
    case AssignOp::MinEq:
      return "min=";
    case AssignOp::MinEqBang:
      return "min=!";
    case AssignOp::MaxEq:
      return "max=";
    case AssignOp::MaxEqBang:
      return "max=!";
  }
  return "?";
}

const char* elemKindName(ElemKind kind) {
  return kind == ElemKind::Float ? "float" : "int";
}

size_t elemKindSize(ElemKind kind) {
  (void)kind;
  return 4; // float32 and int32
}

const Param* TcDef::findParam(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) {
      return &p;
    }
  }
  return nullptr;
}

bool TcDef::isReturn(const std::string& name) const {
  for (const auto& r : returns) {
    if (r == name) {
      return true;
    }
  }
  return false;
}

const TcDef& Program::only() const {
  TC_CHECK(defs.size() == 1, "expected exactly one def, got " << defs.size());
  return defs.front();
}

const TcDef* Program::find(const std::string& name) const {
  for (const auto& d : defs) {
    if (d.name == name) {
      return &d;
    }
  }
  return nullptr;
}

} // namespace lang
} // namespace tc
