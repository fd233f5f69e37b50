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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tc/sched/transforms.h"

namespace tc {
namespace tuner {

/*
 * The tunable knob vector of one compilation: tile sizes (consumed
 * depth-first by tiling, one entry per band member), grid and block
 * shapes, fusion strategy, promotion switches and the unroll budget. The
 * shared-memory budget and the rng seed ride along for reproducibility
 * but are configuration, not search dimensions.
 */
struct MappingOptions {
  std::vector<int64_t> tileSizes;
  // Grid extents: how many blocks along x, y, z.
  std::array<int64_t, 3> blockShape{{1, 1, 1}};
  // Threads per block along x, y, z.
  std::array<int64_t, 3> threadShape{{1, 1, 1}};
  sched::FusionStrategy fusionStrategy = sched::FusionStrategy::Max;
  bool useShared = false;
  bool usePrivate = false;
  bool unrollCopyShared = false;
  int64_t unrollFactor = 1;
  int64_t sharedMemoryBudget = 48 * 1024;
  uint64_t rngSeed = 0;

  /*
   * Throws Error(MappingInvalid) unless every extent (tile, grid, block)
   * is >= 1, the thread product respects the 1024-thread machine limit,
   * the unroll factor is a power of two no larger than 4096 and the
   * shared budget is positive.
   */
  void validate() const;

  /* Single-line JSON with sorted keys; fromJson rejects unknown fields
   * (Error(CorruptStore)) so stored genomes stay version-checked. */
  std::string toJson() const;
  static MappingOptions fromJson(const std::string& text);

  /* Stable content hash, identical across processes for equal options. */
  std::string digest() const;

  bool operator==(const MappingOptions& other) const;
  bool operator!=(const MappingOptions& other) const {
    return !(*this == other);
  }
};

/*
 * Hand-tuned presets in the spirit of the classic library's shipped
 * defaults: a 32-cubed tiled shared+private configuration for
 * contraction-like defs, a flat pointwise mapping, and a small cubic
 * mapping that keeps three parallel dimensions. Tuning seeds start from
 * these; configurations a program cannot support simply score as failed
 * candidates.
 */
std::vector<MappingOptions> baselineOptions();

} // namespace tuner
} // namespace tc
