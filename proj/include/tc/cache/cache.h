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

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tc/lang/validate.h"
#include "tc/tuner/options.h"

namespace tc {
namespace cache {

/*
 * Positional renaming so identifier choices cannot defeat a lookup: the
 * def becomes `f`, parameters / returns / first-written temporaries
 * become T0, T1, ... in that order, size symbols become S0, S1, ... in
 * declaration order, and each statement's iterators become i0, i1, ...
 * in first-use order. The renamed definition is pretty-printed
 * deterministically.
 */
std::string canonicalize(const lang::ValidatedDef& vdef);

/* Machine descriptor baked into every key. It carries the emulator's
 * semantic version, so emulator behavior changes orphan old entries
 * instead of resurrecting them. */
std::string targetDescriptor();

struct CacheKey {
  std::string canonicalTc;
  // Per input parameter, in declaration order; scalars contribute an
  // empty extent list.
  std::vector<std::vector<int64_t>> inputShapes;
  std::string target;
  std::string optionsDigest;

  /* Lookups deliberately ignore the options digest: the store keeps the
   * best known version per (program, shapes, target). */
  std::string lookupKey() const;

  bool operator==(const CacheKey& other) const;
};

/* Builds the key for a definition about to be compiled or tuned. */
CacheKey makeKey(
    const lang::ValidatedDef& vdef,
    const std::map<std::string, std::vector<int64_t>>& shapes,
    const tuner::MappingOptions& options);

enum class EntryOrigin { Tuned, Injected, Baseline };

const char* entryOriginName(EntryOrigin origin);
EntryOrigin entryOriginFromString(const std::string& s);

struct CacheEntry {
  CacheKey key;
  tuner::MappingOptions options;
  std::string kernelText;
  int64_t cost = 0;
  int64_t createdAt = 0; // unix seconds
  EntryOrigin origin = EntryOrigin::Tuned;
};

struct HistoryRecord {
  CacheKey key;
  tuner::MappingOptions options;
  int64_t cost = 0;
  std::string sessionId;
};

/*
 * Persistent best-version store. Every mutating or reading operation
 * takes the store's single-writer critical section, so concurrent
 * updaters cannot lose the minimum and readers never observe a
 * worse-than-previous best. Serialization is versioned length-prefixed
 * text — a "TCCACHE <version> <bytes>" header, a canonical sorted-keys
 * JSON payload, and a trailing FNV-1a64 checksum line; any unknown field
 * or checksum/version mismatch loads as Error(CorruptStore).
 */
class Cache {
 public:
  Cache() = default;
  Cache(const Cache&) = delete;
  Cache& operator=(const Cache&) = delete;

  /* Best entry for the key's program/shapes/target, options ignored. */
  std::optional<CacheEntry> lookup(const CacheKey& key) const;

  /* Min-update: stores iff the slot is empty or the cost is strictly
   * lower (ties keep the incumbent). A history record is appended either
   * way. Returns whether the entry was stored. */
  bool update(const CacheEntry& entry, const std::string& sessionId = "");

  std::vector<CacheEntry> entries() const; // sorted by lookup key
  std::vector<HistoryRecord> history() const;
  size_t size() const;
  void purge();

  std::string serialize() const;
  void deserialize(const std::string& text); // replaces the contents

  void save(const std::string& path) const;
  void load(const std::string& path); // Error(Io) when unreadable

  /* When set, every history record is also appended to this file as one
   * line-delimited JSON record at update time. */
  void setHistoryPath(const std::string& path);

 private:
  mutable std::mutex mu_;
  std::map<std::string, CacheEntry> entries_;
  std::vector<HistoryRecord> history_;
  std::string historyPath_;
};

/* Default file names next to which tuning sessions persist results. */
extern const char* const kDefaultCacheFile; // "tc-cache.json"
extern const char* const kDefaultHistoryFile; // "tc-history.log"

} // namespace cache
} // namespace tc
