/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/pipeline.h"

#include "tc/backend/cuda_text.h"
#include "tc/backend/lower.h"
#include "tc/poly/dependence.h"
#include "tc/promo/promotion.h"
#include "tc/sched/build.h"
#include "tc/sched/transforms.h"
#include "tc/sem/checks.h"

namespace tc {
namespace pipeline {

const lang::TcDef& selectDef(
    const lang::Program& program,
    const std::string& defName) {
  if (defName.empty()) {
    return program.only();
  }
  const lang::TcDef* def = program.find(defName);
  if (def == nullptr) {
    throwError(ErrorKind::Name, "no def named '" + defName + "' in buffer");
  }
  return *def;
}

Checked check(const lang::TcDef& def, const lang::Program* siblings) {
  Checked out;
  out.vdef = lang::validateNames(def, siblings);
  sem::checkInPlace(out.vdef);
  sem::checkSymbolicInit(out.vdef);
  out.ranges = sem::inferRanges(out.vdef);
  return out;
}

sem::SpecializedDef specialize(
    const Checked& checked,
    const std::map<std::string, int64_t>& sizes) {
  for (const auto& symbol : checked.ranges.sizeSymbols) {
    auto it = sizes.find(symbol);
    if (it == sizes.end()) {
      throwError(
          ErrorKind::MissingBinding,
          "size symbol '" + symbol + "' has no binding");
    }
    if (it->second < 1) {
      throwError(
          ErrorKind::MissingBinding,
          "size symbol '" + symbol + "' bound to non-positive " +
              std::to_string(it->second));
    }
  }
  sem::SpecializedDef def =
      sem::specialize(checked.vdef, checked.ranges, sizes);
  sem::checkBounds(def);
  sem::checkConcreteInit(def);
  return def;
}

Compiled compile(
    std::shared_ptr<const sem::SpecializedDef> def,
    const tuner::MappingOptions& options) {
  options.validate();

  poly::Dependences deps = poly::computeDependences(*def);
  sched::NodePtr tree = sched::buildCanonicalTree(*def, deps);
  sched::fuseTree(tree, *def, deps, options.fusionStrategy);
  sched::tileTree(tree, options.tileSizes);
  sched::sinkPointLoops(tree);
  sched::mapToGpu(tree, *def, deps, options.blockShape, options.threadShape);

  // Promotion appends copy statements; it works on its own copy so the
  // pre-promotion definition stays available as the reference program.
  auto promoted = std::make_shared<sem::SpecializedDef>(*def);
  promo::PromotionOptions popts;
  popts.useShared = options.useShared;
  popts.usePrivate = options.usePrivate;
  popts.sharedBudget = options.sharedMemoryBudget;
  promo::promote(tree, *promoted, popts);

  backend::LoweringOptions lopts;
  lopts.unrollFactor = options.unrollFactor;
  lopts.unrollCopyShared = options.unrollCopyShared;

  Compiled out;
  out.reference = std::move(def);
  out.promoted = promoted;
  out.tree = tree;
  out.ir = backend::lower(tree, promoted, lopts);
  out.kernelText = backend::emitCudaText(out.ir);
  return out;
}

} // namespace pipeline
} // namespace tc
