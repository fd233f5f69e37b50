/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/tuner/options.h"

#include <cstdio>
#include <set>

#include "json.hpp"

#include "tc/support/diagnostics.h"

namespace tc {
namespace tuner {

namespace {

using nlohmann::json;

bool isPowerOfTwo(int64_t v) {
  return v > 0 && (v & (v - 1)) == 0;
}

void requireExtents(const char* label, const int64_t* v, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (v[i] < 1) {
      throwError(
          ErrorKind::MappingInvalid,
          std::string(label) + " extent " + std::to_string(v[i]) +
              " is below 1");
    }
  }
}

std::array<int64_t, 3> shapeFromJson(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) {
    throwError(
        ErrorKind::CorruptStore,
        std::string("mapping options field '") + field +
            "' must be a 3-element array");
  }
  std::array<int64_t, 3> out{{1, 1, 1}};
  for (size_t i = 0; i < 3; ++i) {
    out[i] = j[i].get<int64_t>();
  }
  return out;
}

} // namespace

void MappingOptions::validate() const {
  requireExtents("tile", tileSizes.data(), tileSizes.size());
  requireExtents("grid", blockShape.data(), blockShape.size());
  requireExtents("block", threadShape.data(), threadShape.size());
  int64_t threads = threadShape[0] * threadShape[1] * threadShape[2];
  if (threads > 1024) {
    throwError(
        ErrorKind::MappingInvalid,
        "thread product " + std::to_string(threads) +
            " exceeds the 1024-thread machine limit");
  }
  if (!isPowerOfTwo(unrollFactor) || unrollFactor > 4096) {
    throwError(
        ErrorKind::MappingInvalid,
        "unroll factor " + std::to_string(unrollFactor) +
            " is not a power of two within 4096");
  }
  if (sharedMemoryBudget <= 0) {
    throwError(
        ErrorKind::MappingInvalid,
        "shared memory budget " + std::to_string(sharedMemoryBudget) +
            " must be positive");
  }
}

std::string MappingOptions::toJson() const {
  json j;
  j["tile_sizes"] = tileSizes;
  j["block_shape"] = blockShape;
  j["thread_shape"] = threadShape;
  j["fusion_strategy"] = sched::fusionStrategyToString(fusionStrategy);
  j["use_shared"] = useShared;
  j["use_private"] = usePrivate;
  j["unroll_copy_shared"] = unrollCopyShared;
  j["unroll_factor"] = unrollFactor;
  j["shared_memory_budget"] = sharedMemoryBudget;
  j["rng_seed"] = rngSeed;
  return j.dump();
}

MappingOptions MappingOptions::fromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throwError(
        ErrorKind::CorruptStore,
        std::string("malformed mapping options: ") + e.what());
  }
  if (!j.is_object()) {
    throwError(ErrorKind::CorruptStore, "mapping options must be an object");
  }
  static const std::set<std::string> kKnown = {
      "tile_sizes",
      "block_shape",
      "thread_shape",
      "fusion_strategy",
      "use_shared",
      "use_private",
      "unroll_copy_shared",
      "unroll_factor",
      "shared_memory_budget",
      "rng_seed",
  };
  for (const auto& item : j.items()) {
    if (kKnown.count(item.key()) == 0) {
      throwError(
          ErrorKind::CorruptStore,
          "unknown mapping options field '" + item.key() +
              "' (written by a newer version?)");
    }
  }
  for (const auto& key : kKnown) {
    if (j.count(key) == 0) {
      throwError(
          ErrorKind::CorruptStore,
          "mapping options missing field '" + key + "'");
    }
  }
  try {
    MappingOptions o;
    o.tileSizes = j["tile_sizes"].get<std::vector<int64_t>>();
    o.blockShape = shapeFromJson(j["block_shape"], "block_shape");
    o.threadShape = shapeFromJson(j["thread_shape"], "thread_shape");
    o.fusionStrategy =
        sched::fusionStrategyFromString(j["fusion_strategy"].get<std::string>());
    o.useShared = j["use_shared"].get<bool>();
    o.usePrivate = j["use_private"].get<bool>();
    o.unrollCopyShared = j["unroll_copy_shared"].get<bool>();
    o.unrollFactor = j["unroll_factor"].get<int64_t>();
    o.sharedMemoryBudget = j["shared_memory_budget"].get<int64_t>();
    o.rngSeed = j["rng_seed"].get<uint64_t>();
    return o;
  } catch (const json::exception& e) {
    throwError(
        ErrorKind::CorruptStore,
        std::string("ill-typed mapping options: ") + e.what());
  }
}

std::string MappingOptions::digest() const {
  char buf[17];
  std::snprintf(
      buf,
      sizeof(buf),
      "%016llx",
      static_cast<unsigned long long>(fnv1a64(toJson())));
  return buf;
}

bool MappingOptions::operator==(const MappingOptions& other) const {
  return tileSizes == other.tileSizes && blockShape == other.blockShape &&
      threadShape == other.threadShape &&
      fusionStrategy == other.fusionStrategy && useShared == other.useShared &&
      usePrivate == other.usePrivate &&
      unrollCopyShared == other.unrollCopyShared &&
      unrollFactor == other.unrollFactor &&
      sharedMemoryBudget == other.sharedMemoryBudget &&
      rngSeed == other.rngSeed;
}

std::vector<MappingOptions> baselineOptions() {
  std::vector<MappingOptions> out;

  MappingOptions contraction;
  contraction.tileSizes = {32, 32, 32};
  contraction.blockShape = {{8, 8, 1}};
  contraction.threadShape = {{16, 16, 1}};
  contraction.fusionStrategy = sched::FusionStrategy::Max;
  contraction.useShared = true;
  contraction.usePrivate = true;
  contraction.unrollCopyShared = true;
  contraction.unrollFactor = 4;
  out.push_back(contraction);

  MappingOptions pointwise;
  pointwise.tileSizes = {};
  pointwise.blockShape = {{64, 1, 1}};
  pointwise.threadShape = {{64, 1, 1}};
  pointwise.fusionStrategy = sched::FusionStrategy::Max;
  out.push_back(pointwise);

  MappingOptions cubic;
  cubic.tileSizes = {4, 4, 4};
  cubic.blockShape = {{4, 4, 4}};
  cubic.threadShape = {{4, 4, 4}};
  cubic.fusionStrategy = sched::FusionStrategy::PreserveThreeParallel;
  cubic.useShared = true;
  out.push_back(cubic);

  return out;
}

} // namespace tuner
} // namespace tc
