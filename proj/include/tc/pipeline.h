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
#include <memory>
#include <string>

#include "tc/backend/kernel_ir.h"
#include "tc/lang/ast.h"
#include "tc/lang/validate.h"
#include "tc/sched/tree.h"
#include "tc/sem/ranges.h"
#include "tc/sem/specialize.h"
#include "tc/tuner/options.h"

namespace tc {
namespace pipeline {

/* Front-end result every verb shares: resolved names plus symbolic
 * ranges, with the in-place and initialization checks already enforced. */
struct Checked {
  lang::ValidatedDef vdef;
  sem::InferredRanges ranges;
};

/* Picks a def out of a parsed buffer: the named one, or the only one when
 * `defName` is empty. Throws Error(Name) when the choice is ambiguous or
 * absent. */
const lang::TcDef& selectDef(const lang::Program& program, const std::string& defName);

/* validateNames + in-place/initialization checks + range inference. The
 * sibling defs of the buffer (when given) improve call diagnostics. */
Checked check(const lang::TcDef& def, const lang::Program* siblings = nullptr);

/* Binds size symbols, desugars initializing reductions into explicit
 * neutral-element writes, and runs the concrete bounds/initialization
 * checks. Unbound size symbols throw Error(MissingBinding). */
sem::SpecializedDef specialize(
    const Checked& checked,
    const std::map<std::string, int64_t>& sizes);

struct Compiled {
  // The statements the kernel was generated from, before promotion
  // inserted copies; this is what the reference interpreter should run.
  std::shared_ptr<const sem::SpecializedDef> reference;
  // Promotion-rewritten definition the IR refers to.
  std::shared_ptr<const sem::SpecializedDef> promoted;
  sched::NodePtr tree;
  backend::KernelIR ir;
  std::string kernelText;
};

/* The code-generation pipeline: fuse, tile, sink point loops, map to the
 * grid, promote, lower, emit — every stage driven by the options vector,
 * which is validated up front. */
Compiled compile(
    std::shared_ptr<const sem::SpecializedDef> def,
    const tuner::MappingOptions& options);

} // namespace pipeline
} // namespace tc
