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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tc/lang/ast.h"

namespace tc {
namespace lang {

enum class TensorRole { Input, Output, Temporary };

struct TensorInfo {
  ElemKind elemKind = ElemKind::Float;
  int rank = 0;
  std::vector<std::string> declaredDims; // empty for outputs/temporaries
  TensorRole role = TensorRole::Input;
  bool written = false;
  bool read = false;
};

struct ScalarInfo {
  ElemKind elemKind = ElemKind::Float;
};

struct StmtInfo {
  // All index variables of the statement in first-use order (left-hand
  // side first), including where-constrained ones.
  std::vector<std::string> iterators;
  // Index variables that appear only on the right-hand side; stores reduce
  // (or repeat, for plain '=') over these.
  std::vector<std::string> reductionIters;
};

// A def whose names have been resolved: every Access is classified as a
// tensor access or builtin call, every identifier as tensor / scalar /
// size symbol / iterator. Expr nodes are annotated in place.
struct ValidatedDef {
  TcDef def;
  std::map<std::string, TensorInfo> tensors;
  std::map<std::string, ScalarInfo> scalars;
  std::set<std::string> sizeSymbols; // symbols appearing in parameter dims
  std::vector<StmtInfo> stmtInfo; // parallel to def.stmts
};

// True for the fixed builtin table: fmaxf, fminf, exp, log, tanh, sigmoid,
// abs.
bool isBuiltin(const std::string& name);
int builtinArity(const std::string& name);

// Name/shape validation. `siblings` supplies the other defs of the parsed
// buffer so calls to them get the dedicated unsupported-call diagnostic.
// Throws Error(Name) or Error(UnsupportedCall).
ValidatedDef validateNames(const TcDef& def, const Program* siblings = nullptr);

} // namespace lang
} // namespace tc
