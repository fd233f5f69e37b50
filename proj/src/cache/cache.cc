/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/cache/cache.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "tc/lang/printer.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace cache {

namespace {

using nlohmann::json;

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

lang::ExprPtr cloneExpr(const lang::ExprPtr& e) {
  if (e == nullptr) {
    return nullptr;
  }
  auto copy = std::make_shared<lang::Expr>(*e);
  for (auto& arg : copy->args) {
    arg = cloneExpr(arg);
  }
  return copy;
}

/* Rewrites every identifier of a cloned def through the positional maps.
 * Builtin callee names stay; everything else a program can choose freely
 * gets its positional replacement. */
class Renamer {
 public:
  explicit Renamer(const lang::ValidatedDef& vdef) : vdef_(vdef) {
    size_t tensorIdx = 0;
    auto claim = [&](const std::string& name) {
      if (!name.empty() && global_.count(name) == 0) {
        global_[name] = "T" + std::to_string(tensorIdx++);
      }
    };
    for (const auto& param : vdef.def.params) {
      claim(param.name);
    }
    for (const auto& ret : vdef.def.returns) {
      claim(ret);
    }
    for (const auto& stmt : vdef.def.stmts) {
      claim(stmt.lhsTensor); // first-written temporaries
    }
    size_t sizeIdx = 0;
    for (const auto& param : vdef.def.params) {
      for (const auto& dim : param.dims) {
        if (global_.count(dim) == 0) {
          global_[dim] = "S" + std::to_string(sizeIdx++);
        }
      }
    }
  }

  lang::TcDef run() {
    lang::TcDef out = vdef_.def;
    out.name = "f";
    for (auto& param : out.params) {
      for (auto& dim : param.dims) {
        dim = mapped(dim);
      }
      param.name = mapped(param.name);
    }
    for (auto& ret : out.returns) {
      ret = mapped(ret);
    }
    for (size_t s = 0; s < out.stmts.size(); ++s) {
      std::map<std::string, std::string> iters;
      const auto& order = vdef_.stmtInfo[s].iterators;
      for (size_t i = 0; i < order.size(); ++i) {
        iters[order[i]] = "i" + std::to_string(i);
      }
      auto& stmt = out.stmts[s];
      stmt.lhsTensor = mapped(stmt.lhsTensor);
      for (auto& idx : stmt.lhsIndices) {
        idx = cloneExpr(idx);
        renameExpr(idx, iters);
      }
      stmt.rhs = cloneExpr(stmt.rhs);
      renameExpr(stmt.rhs, iters);
      for (auto& rc : stmt.where) {
        auto it = iters.find(rc.var);
        if (it != iters.end()) {
          rc.var = it->second;
        }
        rc.lo = cloneExpr(rc.lo);
        renameExpr(rc.lo, iters);
        rc.hi = cloneExpr(rc.hi);
        renameExpr(rc.hi, iters);
      }
    }
    return out;
  }

 private:
  std::string mapped(const std::string& name) const {
    auto it = global_.find(name);
    return it == global_.end() ? name : it->second;
  }

  void renameExpr(
      lang::ExprPtr& e,
      const std::map<std::string, std::string>& iters) {
    if (e == nullptr) {
      return;
    }
    switch (e->kind) {
      case lang::ExprKind::Ident: {
        auto it = iters.find(e->name);
        e->name = it != iters.end() ? it->second : mapped(e->name);
        break;
      }
      case lang::ExprKind::Access:
        if (!e->isBuiltinCall) {
          e->name = mapped(e->name);
        }
        break;
      case lang::ExprKind::DimOf:
        e->name = mapped(e->name);
        break;
      default:
        break;
    }
    for (auto& arg : e->args) {
      renameExpr(arg, iters);
    }
  }

  const lang::ValidatedDef& vdef_;
  std::map<std::string, std::string> global_;
};

json keyToJson(const CacheKey& key) {
  json j;
  j["canonical_tc"] = key.canonicalTc;
  j["input_shapes"] = key.inputShapes;
  j["target"] = key.target;
  j["options_digest"] = key.optionsDigest;
  return j;
}

void rejectUnknownFields(
    const json& j,
    const std::set<std::string>& known,
    const char* what) {
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) {
      throwError(
          ErrorKind::CorruptStore,
          std::string(what) + " has unknown field '" + item.key() +
              "' (written by a newer store version?)");
    }
  }
  for (const auto& key : known) {
    if (j.count(key) == 0) {
      throwError(
          ErrorKind::CorruptStore,
          std::string(what) + " is missing field '" + key + "'");
    }
  }
}

CacheKey keyFromJson(const json& j) {
  if (!j.is_object()) {
    throwError(ErrorKind::CorruptStore, "cache key is not an object");
  }
  rejectUnknownFields(
      j,
      {"canonical_tc", "input_shapes", "target", "options_digest"},
      "cache key");
  CacheKey key;
  key.canonicalTc = j["canonical_tc"].get<std::string>();
  key.inputShapes = j["input_shapes"].get<std::vector<std::vector<int64_t>>>();
  key.target = j["target"].get<std::string>();
  key.optionsDigest = j["options_digest"].get<std::string>();
  return key;
}

json entryToJson(const CacheEntry& entry) {
  json j;
  j["key"] = keyToJson(entry.key);
  j["options"] = json::parse(entry.options.toJson());
  j["kernel_text"] = entry.kernelText;
  j["cost"] = entry.cost;
  j["created_at"] = entry.createdAt;
  j["origin"] = entryOriginName(entry.origin);
  return j;
}

CacheEntry entryFromJson(const json& j) {
  if (!j.is_object()) {
    throwError(ErrorKind::CorruptStore, "cache entry is not an object");
  }
  rejectUnknownFields(
      j,
      {"key", "options", "kernel_text", "cost", "created_at", "origin"},
      "cache entry");
  CacheEntry entry;
  entry.key = keyFromJson(j["key"]);
  entry.options = tuner::MappingOptions::fromJson(j["options"].dump());
  entry.kernelText = j["kernel_text"].get<std::string>();
  entry.cost = j["cost"].get<int64_t>();
  entry.createdAt = j["created_at"].get<int64_t>();
  entry.origin = entryOriginFromString(j["origin"].get<std::string>());
  return entry;
}

constexpr int kStoreVersion = 1;

} // namespace

std::string canonicalize(const lang::ValidatedDef& vdef) {
  return lang::printDef(Renamer(vdef).run());
}

std::string targetDescriptor() {
  // Semantic version of the execution model: bump when emulator behavior
  // (interleaving, narrowing, race accounting) changes meaning.
  return "tc-emulator/1 threads=1024 shared=49152";
}

std::string CacheKey::lookupKey() const {
  std::ostringstream os;
  os << canonicalTc << "\x1f";
  for (const auto& shape : inputShapes) {
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) {
      os << (i > 0 ? "x" : "") << shape[i];
    }
    os << ")";
  }
  os << "\x1f" << target;
  return os.str();
}

bool CacheKey::operator==(const CacheKey& other) const {
  return canonicalTc == other.canonicalTc &&
      inputShapes == other.inputShapes && target == other.target &&
      optionsDigest == other.optionsDigest;
}

CacheKey makeKey(
    const lang::ValidatedDef& vdef,
    const std::map<std::string, std::vector<int64_t>>& shapes,
    const tuner::MappingOptions& options) {
  CacheKey key;
  key.canonicalTc = canonicalize(vdef);
  for (const auto& param : vdef.def.params) {
    if (param.isScalar()) {
      key.inputShapes.emplace_back();
      continue;
    }
    auto it = shapes.find(param.name);
    TC_CHECK(it != shapes.end(), "no shape for input " + param.name);
    key.inputShapes.push_back(it->second);
  }
  key.target = targetDescriptor();
  key.optionsDigest = options.digest();
  return key;
}

const char* entryOriginName(EntryOrigin origin) {
  switch (origin) {
    case EntryOrigin::Tuned:
      return "tuned";
    case EntryOrigin::Injected:
      return "injected";
    case EntryOrigin::Baseline:
      return "baseline";
  }
  return "tuned";
}

EntryOrigin entryOriginFromString(const std::string& s) {
  if (s == "tuned") {
    return EntryOrigin::Tuned;
  }
  if (s == "injected") {
    return EntryOrigin::Injected;
  }
  if (s == "baseline") {
    return EntryOrigin::Baseline;
  }
  throwError(ErrorKind::CorruptStore, "unknown cache entry origin '" + s + "'");
}

std::optional<CacheEntry> Cache::lookup(const CacheKey& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key.lookupKey());
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

bool Cache::update(const CacheEntry& entry, const std::string& sessionId) {
  std::lock_guard<std::mutex> lock(mu_);
  history_.push_back({entry.key, entry.options, entry.cost, sessionId});
  if (!historyPath_.empty()) {
    json line;
    line["key"] = keyToJson(entry.key);
    line["genome"] = json::parse(entry.options.toJson());
    line["cost"] = entry.cost;
    line["session"] = sessionId;
    std::ofstream os(historyPath_, std::ios::app);
    if (!os || !(os << line.dump() << "\n")) {
      throwError(ErrorKind::Io, "cannot append to history '" + historyPath_ + "'");
    }
  }
  std::string slot = entry.key.lookupKey();
  auto it = entries_.find(slot);
  if (it != entries_.end() && it->second.cost <= entry.cost) {
    return false;
  }
  entries_[slot] = entry;
  return true;
}

std::vector<CacheEntry> Cache::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<CacheEntry> out;
  out.reserve(entries_.size());
  for (const auto& kv : entries_) {
    out.push_back(kv.second);
  }
  return out;
}

std::vector<HistoryRecord> Cache::history() const {
  std::lock_guard<std::mutex> lock(mu_);
  return history_;
}

size_t Cache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

void Cache::purge() {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.clear();
}

std::string Cache::serialize() const {
  std::lock_guard<std::mutex> lock(mu_);
  json payload;
  payload["entries"] = json::array();
  for (const auto& kv : entries_) {
    payload["entries"].push_back(entryToJson(kv.second));
  }
  std::string body = payload.dump();
  std::ostringstream os;
  os << "TCCACHE " << kStoreVersion << " " << body.size() << "\n"
     << body << "\n"
     << "FNV1A64 " << hex64(fnv1a64(body)) << "\n";
  return os.str();
}

void Cache::deserialize(const std::string& text) {
  size_t headerEnd = text.find('\n');
  if (headerEnd == std::string::npos) {
    throwError(ErrorKind::CorruptStore, "store has no header line");
  }
  std::istringstream header(text.substr(0, headerEnd));
  std::string magic;
  long long version = -1;
  unsigned long long bodySize = 0;
  header >> magic >> version >> bodySize;
  if (!header || magic != "TCCACHE") {
    throwError(ErrorKind::CorruptStore, "not a cache store (bad magic)");
  }
  if (version != kStoreVersion) {
    throwError(
        ErrorKind::CorruptStore,
        "unsupported store version " + std::to_string(version) +
            " (this build reads version " + std::to_string(kStoreVersion) +
            ")");
  }
  size_t bodyStart = headerEnd + 1;
  if (text.size() < bodyStart + bodySize + 1 ||
      text[bodyStart + bodySize] != '\n') {
    throwError(ErrorKind::CorruptStore, "store body is truncated");
  }
  std::string body = text.substr(bodyStart, bodySize);
  std::istringstream tail(text.substr(bodyStart + bodySize + 1));
  std::string tag, sum;
  tail >> tag >> sum;
  if (tag != "FNV1A64" || sum != hex64(fnv1a64(body))) {
    throwError(ErrorKind::CorruptStore, "store checksum mismatch");
  }
  json payload;
  try {
    payload = json::parse(body);
  } catch (const json::exception& e) {
    throwError(
        ErrorKind::CorruptStore,
        std::string("store payload is not valid JSON: ") + e.what());
  }
  if (!payload.is_object()) {
    throwError(ErrorKind::CorruptStore, "store payload is not an object");
  }
  rejectUnknownFields(payload, {"entries"}, "store payload");
  if (!payload["entries"].is_array()) {
    throwError(ErrorKind::CorruptStore, "store entry list is not an array");
  }
  std::map<std::string, CacheEntry> loaded;
  for (const auto& j : payload["entries"]) {
    CacheEntry entry = entryFromJson(j);
    std::string slot = entry.key.lookupKey();
    if (loaded.count(slot) != 0) {
      throwError(ErrorKind::CorruptStore, "store holds duplicate entries");
    }
    loaded.emplace(std::move(slot), std::move(entry));
  }
  std::lock_guard<std::mutex> lock(mu_);
  entries_ = std::move(loaded);
  history_.clear();
}

void Cache::save(const std::string& path) const {
  std::string text = serialize();
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os || !os.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throwError(ErrorKind::Io, "cannot write cache store '" + path + "'");
  }
}

void Cache::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throwError(ErrorKind::Io, "cannot read cache store '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << is.rdbuf();
  deserialize(buffer.str());
}

void Cache::setHistoryPath(const std::string& path) {
  std::lock_guard<std::mutex> lock(mu_);
  historyPath_ = path;
}

const char* const kDefaultCacheFile = "tc-cache.json";
const char* const kDefaultHistoryFile = "tc-history.log";

} // namespace cache
} // namespace tc
