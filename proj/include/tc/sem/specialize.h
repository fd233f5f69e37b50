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
#include <string>
#include <vector>

#include "tc/lang/validate.h"
#include "tc/sem/ranges.h"

namespace tc {
namespace sem {

struct ConcreteRange {
  int64_t lo = 0;
  int64_t hi = 0; // exclusive

  int64_t extent() const {
    return hi - lo;
  }
};

// One statement with every iterator bound to a concrete interval. The
// self-initializing reductions (`+=!` and friends) are desugared here: a
// synthetic statement writing the reduction's neutral element precedes the
// plain reduction.
struct ConcreteStmt {
  lang::Stmt stmt;
  std::vector<std::string> iterators; // canonical loop order, LHS first
  std::map<std::string, ConcreteRange> ranges;
  size_t origIndex = 0; // index into the source def's statements
  bool isSyntheticInit = false;

  const ConcreteRange& range(const std::string& iter) const;
};

struct SpecializedDef {
  lang::ValidatedDef vdef;
  InferredRanges sym;
  std::map<std::string, int64_t> sizes; // every size symbol, all >= 1
  std::map<std::string, std::vector<int64_t>> shapes;
  std::vector<ConcreteStmt> stmts;
};

/*
 * Binds size symbols to concrete values and evaluates every inferred range
 * and shape. Throws Error(Name) when a symbol is unbound or bound below 1
 * and Error(EmptyRange) when a concrete iteration range comes out empty.
 */
SpecializedDef specialize(
    const lang::ValidatedDef& vdef,
    const InferredRanges& inferred,
    const std::map<std::string, int64_t>& sizes);

} // namespace sem
} // namespace tc
