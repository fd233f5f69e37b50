/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/backend/emulator.h"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "tc/backend/interpreter.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace backend {

namespace {

const char* kThreadVars[3] = {"@tx", "@ty", "@tz"};

int64_t floorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int64_t modPos(int64_t a, int64_t b) {
  int64_t r = a % b;
  return r < 0 ? r + b : r;
}

struct Action {
  const IrNode* node = nullptr;
  std::map<std::string, int64_t> env;
};

struct Phase {
  std::vector<Action> actions;
  int endBarrier = -1; // -1: kernel end
};

/* Per-phase conflict table. Two reader slots make write-after-read sound:
 * a third distinct reader cannot hide, because a writer can match at most
 * one of the stored two. */
struct PhaseEntry {
  int writer = -1;
  int reader1 = -1;
  int reader2 = -1;
  bool reported = false;
};

struct CrossEntry {
  int writerBlock = -1;
  int reader1 = -1;
  int reader2 = -1;
  bool reported = false;
};

class RaceTracker {
 public:
  explicit RaceTracker(std::vector<RaceRecord>& out) : out_(out) {}

  void beginPhase(int phase, const std::array<int64_t, 3>& blockCoord, int blockLinear) {
    phase_ = phase;
    blockCoord_ = blockCoord;
    blockLinear_ = blockLinear;
    table_.clear();
  }

  void onAccess(int spaceId, const std::string& space, int64_t linear, int thread, bool write) {
    uint64_t key = (static_cast<uint64_t>(spaceId) << 42) | static_cast<uint64_t>(linear);
    PhaseEntry& e = table_[key];
    int conflicting = -1;
    if (write) {
      if (e.writer != -1 && e.writer != thread) {
        conflicting = e.writer;
      } else if (e.reader1 != -1 && e.reader1 != thread) {
        conflicting = e.reader1;
      } else if (e.reader2 != -1 && e.reader2 != thread) {
        conflicting = e.reader2;
      }
      if (e.writer == -1) {
        e.writer = thread;
      }
    } else {
      if (e.writer != -1 && e.writer != thread) {
        conflicting = e.writer;
      }
      if (e.reader1 == -1 || e.reader1 == thread) {
        e.reader1 = thread;
      } else if (e.reader2 == -1 || e.reader2 == thread) {
        e.reader2 = thread;
      }
    }
    if (conflicting != -1 && !e.reported) {
      e.reported = true;
      RaceRecord r;
      r.space = space;
      r.index = linear;
      r.writer = write ? thread : conflicting;
      r.other = write ? conflicting : thread;
      r.phase = phase_;
      r.block = blockCoord_;
      out_.push_back(std::move(r));
    }
  }

  void onGlobalAccess(int spaceId, const std::string& space, int64_t linear, bool write) {
    uint64_t key = (static_cast<uint64_t>(spaceId) << 42) | static_cast<uint64_t>(linear);
    CrossEntry& e = cross_[key];
    int conflicting = -1;
    if (write) {
      if (e.writerBlock != -1 && e.writerBlock != blockLinear_) {
        conflicting = e.writerBlock;
      } else if (e.reader1 != -1 && e.reader1 != blockLinear_) {
        conflicting = e.reader1;
      } else if (e.reader2 != -1 && e.reader2 != blockLinear_) {
        conflicting = e.reader2;
      }
      if (e.writerBlock == -1) {
        e.writerBlock = blockLinear_;
      }
    } else {
      if (e.writerBlock != -1 && e.writerBlock != blockLinear_) {
        conflicting = e.writerBlock;
      }
      if (e.reader1 == -1 || e.reader1 == blockLinear_) {
        e.reader1 = blockLinear_;
      } else if (e.reader2 == -1 || e.reader2 == blockLinear_) {
        e.reader2 = blockLinear_;
      }
    }
    if (conflicting != -1 && !e.reported) {
      e.reported = true;
      RaceRecord r;
      r.space = space;
      r.index = linear;
      r.writer = write ? blockLinear_ : conflicting;
      r.other = write ? conflicting : blockLinear_;
      r.phase = phase_;
      r.block = blockCoord_;
      r.crossBlock = true;
      out_.push_back(std::move(r));
    }
  }

 private:
  std::vector<RaceRecord>& out_;
  std::unordered_map<uint64_t, PhaseEntry> table_;
  std::unordered_map<uint64_t, CrossEntry> cross_;
  int phase_ = 0;
  std::array<int64_t, 3> blockCoord_{{0, 0, 0}};
  int blockLinear_ = 0;
};

/* Routes names to global storage, the block's shared buffers, or the
 * current thread's private buffers, with bounds checks and race
 * bookkeeping on every access. */
class EmuMemory : public MemoryModel {
 public:
  EmuMemory(TensorMap& global, RaceTracker& tracker) : global_(global), tracker_(tracker) {
    for (auto& [name, t] : global_) {
      (void)t;
      spaceIds_[name] = nextId_++;
    }
  }

  void addShared(const std::string& name, TensorData buf) {
    shared_[name] = std::move(buf);
    if (spaceIds_.count(name) == 0) {
      spaceIds_[name] = nextId_++;
    }
  }

  void addPrivate(const std::string& name, const TensorData& proto, int threads) {
    private_[name].assign(static_cast<size_t>(threads), proto);
  }

  void resetBlockBuffers() {
    for (auto& [name, buf] : shared_) {
      (void)name;
      std::fill(buf.f.begin(), buf.f.end(), 0.0f);
      std::fill(buf.i.begin(), buf.i.end(), 0);
    }
    for (auto& [name, bufs] : private_) {
      (void)name;
      for (auto& buf : bufs) {
        std::fill(buf.f.begin(), buf.f.end(), 0.0f);
        std::fill(buf.i.begin(), buf.i.end(), 0);
      }
    }
  }

  void setThread(int thread) {
    thread_ = thread;
  }

  double load(const std::string& space, const std::vector<int64_t>& idx, const SourceLoc& loc)
      override {
    TensorData& t = resolve(space, loc);
    int64_t lin = linear(t, space, idx, loc);
    track(space, lin, /*write=*/false);
    return t.load(lin);
  }

  void store(const std::string& space, const std::vector<int64_t>& idx, double v, const SourceLoc& loc)
      override {
    TensorData& t = resolve(space, loc);
    int64_t lin = linear(t, space, idx, loc);
    track(space, lin, /*write=*/true);
    t.store(lin, v);
  }

 private:
  TensorData& resolve(const std::string& space, const SourceLoc& loc) {
    auto sit = shared_.find(space);
    if (sit != shared_.end()) {
      return sit->second;
    }
    auto pit = private_.find(space);
    if (pit != private_.end()) {
      return pit->second[static_cast<size_t>(thread_)];
    }
    auto git = global_.find(space);
    if (git != global_.end()) {
      return git->second;
    }
    throwError(ErrorKind::Internal, "no storage for '" + space + "'", loc);
  }

  int64_t linear(
      const TensorData& t,
      const std::string& space,
      const std::vector<int64_t>& idx,
      const SourceLoc& loc) {
    for (size_t d = 0; d < idx.size(); ++d) {
      if (idx[d] < 0 || idx[d] >= t.shape[d]) {
        throwError(
            ErrorKind::IndexOutOfRange,
            "index " + std::to_string(idx[d]) + " escapes dimension " + std::to_string(d) +
                " of '" + space + "' (extent " + std::to_string(t.shape[d]) + ")",
            loc);
      }
    }
    return t.linearize(idx);
  }

  void track(const std::string& space, int64_t lin, bool write) {
    if (private_.count(space) != 0) {
      return; // per-thread storage cannot race
    }
    int id = spaceIds_.at(space);
    tracker_.onAccess(id, space, lin, thread_, write);
    if (shared_.count(space) == 0) {
      tracker_.onGlobalAccess(id, space, lin, write);
    }
  }

  TensorMap& global_;
  RaceTracker& tracker_;
  std::map<std::string, TensorData> shared_;
  std::map<std::string, std::vector<TensorData>> private_;
  std::map<std::string, int> spaceIds_;
  int nextId_ = 0;
  int thread_ = 0;
};

bool condsHold(const std::vector<IrCond>& conds, const std::map<std::string, int64_t>& env) {
  for (const auto& c : conds) {
    int64_t v = modPos(floorDiv(c.lhs.eval(env), c.divisor), c.modulus);
    int64_t rhs = c.rhsVar.empty() ? c.rhsConst : env.at(c.rhsVar);
    if (v != rhs) {
      return false;
    }
  }
  return true;
}

/* Collects one thread's barrier-delimited phases: control flow (loops,
 * residue conditionals, iterator reconstruction) resolves here, memory is
 * untouched until execution. */
class TraceBuilder {
 public:
  TraceBuilder(const sem::SpecializedDef& def, std::map<std::string, int64_t> env)
      : def_(def), env_(std::move(env)) {
    phases_.emplace_back();
  }

  std::vector<Phase> run(const std::vector<IrPtr>& body) {
    walkBody(body);
    return std::move(phases_);
  }

 private:
  void walkBody(const std::vector<IrPtr>& body) {
    for (const auto& n : body) {
      walk(n);
    }
  }

  void walk(const IrPtr& n) {
    switch (n->kind) {
      case IrKind::Loop: {
        int64_t lo = n->lo.eval(env_);
        for (int64_t v = lo; v < n->hi; v += n->step) {
          env_[n->var] = v;
          walkBody(n->body);
        }
        env_.erase(n->var);
        return;
      }
      case IrKind::Cond:
        if (condsHold(n->conds, env_)) {
          walkBody(n->body);
        }
        return;
      case IrKind::Compute: {
        const auto& cs = def_.stmts[n->stmt];
        Action a;
        a.node = n.get();
        a.env = env_;
        for (const auto& [iter, vars] : n->iterSum) {
          int64_t v = 0;
          for (const auto& var : vars) {
            v += env_.at(var);
          }
          const auto& r = cs.range(iter);
          if (v < r.lo || v >= r.hi) {
            return; // hull-loop overshoot: not an instance of this statement
          }
          a.env[iter] = v;
        }
        phases_.back().actions.push_back(std::move(a));
        return;
      }
      case IrKind::Copy: {
        Action a;
        a.node = n.get();
        a.env = env_;
        phases_.back().actions.push_back(std::move(a));
        return;
      }
      case IrKind::Barrier:
        phases_.back().endBarrier = n->barrierId;
        phases_.emplace_back();
        return;
    }
  }

  const sem::SpecializedDef& def_;
  std::map<std::string, int64_t> env_;
  std::vector<Phase> phases_;
};

/* Executes one copy cell: reconstructs the global coordinates from the
 * group's buffer dimensions, skips cells whose box over-approximates the
 * tensor (affine dimensions) or whose iterator value falls outside its
 * window (indirect dimensions), and faults on out-of-range data-dependent
 * indices. */
void executeCopy(
    const Action& a,
    const sem::SpecializedDef& def,
    const ScalarMap& scalars,
    EmuMemory& mem) {
  const IrNode& n = *a.node;
  const sched::PromotedGroup& g = *n.group;
  const auto& tensorShape = def.shapes.at(g.tensor);

  std::vector<int64_t> locals;
  locals.reserve(n.copyVars.size());
  for (const auto& v : n.copyVars) {
    locals.push_back(a.env.at(v));
  }

  EvalEnv env;
  env.ints = a.env;
  env.scalars = &scalars;
  env.def = &def;

  std::vector<int64_t> global(g.dims.size(), 0);
  size_t flat = 0;
  for (size_t d = 0; d < g.dims.size(); ++d) {
    const auto& parts = g.dims[d];
    if (parts.size() == 1 && !parts[0].indirect) {
      const auto& b = parts[0];
      int64_t local = locals[flat++];
      int64_t raw;
      if (b.threadDim >= 0) {
        int64_t t = a.env.at(kThreadVars[b.threadDim]);
        int64_t within = local * b.threadExtent + t;
        if (within >= b.extent) {
          return; // ceil-sliced tail beyond the tile
        }
        raw = b.offset.eval(a.env) + within;
      } else {
        raw = b.offset.eval(a.env) + local;
      }
      if (raw < 0 || raw >= tensorShape[d]) {
        return; // box over-approximation at the tensor edge
      }
      global[d] = raw;
      continue;
    }
    // Indirect: bind each expansion iterator and re-evaluate the original
    // subscript; the index arrays involved are read-only by construction.
    for (const auto& b : parts) {
      int64_t iterVal = b.offset.eval(a.env) + locals[flat++];
      if (iterVal < b.lo || iterVal >= b.hi) {
        return; // tile window exceeds the iterator's range
      }
      env.ints[b.iter] = iterVal;
    }
    int64_t idx = evalIndex(*g.subs[d], env, mem);
    if (idx < 0 || idx >= tensorShape[d]) {
      throwError(
          ErrorKind::IndexOutOfRange,
          "index " + std::to_string(idx) + " escapes dimension " + std::to_string(d) +
              " of tensor '" + g.tensor + "' (extent " + std::to_string(tensorShape[d]) + ")",
          g.subs[d]->loc);
    }
    global[d] = idx;
  }

  SourceLoc loc = g.subs.empty() ? SourceLoc{} : g.subs[0]->loc;
  if (n.copyIn) {
    double v = mem.load(g.tensor, global, loc);
    mem.store(g.buffer, locals, v, loc);
  } else {
    double v = mem.load(g.buffer, locals, loc);
    mem.store(g.tensor, global, v, loc);
  }
}

} // namespace

std::string RaceRecord::str() const {
  std::ostringstream os;
  os << (crossBlock ? "cross-block race" : "race") << " on " << space << "[" << index << "] "
     << (crossBlock ? "blocks " : "threads ") << writer << " and " << other << ", phase " << phase
     << ", block (" << block[0] << ", " << block[1] << ", " << block[2] << ")";
  return os.str();
}

EmulationResult emulate(const KernelIR& ir, const TensorMap& inputs, const ScalarMap& scalars) {
  TC_CHECK(ir.def != nullptr, "kernel carries no definition");
  const sem::SpecializedDef& def = *ir.def;

  for (size_t d = 0; d < 3; ++d) {
    if (ir.grid[d] < 1 || ir.block[d] < 1) {
      throwError(ErrorKind::MappingInvalid, "grid and block extents must be positive");
    }
  }
  int64_t threads64 = ir.block[0] * ir.block[1] * ir.block[2];
  if (threads64 > 1024) {
    throwError(
        ErrorKind::MappingInvalid,
        "block shape asks for " + std::to_string(threads64) + " threads, the machine caps at 1024");
  }
  int threads = static_cast<int>(threads64);

  EmulationResult result;
  result.storage = initialStorage(def, inputs);
  RaceTracker tracker(result.races);
  EmuMemory mem(result.storage, tracker);
  for (const auto& b : ir.sharedBufs) {
    mem.addShared(b.name, TensorData::zeros(b.elemKind, b.shape));
  }
  for (const auto& b : ir.privateBufs) {
    mem.addPrivate(b.name, TensorData::zeros(b.elemKind, b.shape), threads);
  }

  std::map<std::string, int64_t> baseEnv;
  for (const auto& [sym, v] : def.sizes) {
    baseEnv[sym] = v;
  }

  int blockLinear = 0;
  for (int64_t bz = 0; bz < ir.grid[2]; ++bz) {
    for (int64_t by = 0; by < ir.grid[1]; ++by) {
      for (int64_t bx = 0; bx < ir.grid[0]; ++bx, ++blockLinear) {
        mem.resetBlockBuffers();
        std::array<int64_t, 3> blockCoord{{bx, by, bz}};

        // Per-thread traces, then a uniform-barrier check.
        std::vector<std::vector<Phase>> traces;
        traces.reserve(static_cast<size_t>(threads));
        for (int64_t tz = 0; tz < ir.block[2]; ++tz) {
          for (int64_t ty = 0; ty < ir.block[1]; ++ty) {
            for (int64_t tx = 0; tx < ir.block[0]; ++tx) {
              auto env = baseEnv;
              env["@bx"] = bx;
              env["@by"] = by;
              env["@bz"] = bz;
              env["@tx"] = tx;
              env["@ty"] = ty;
              env["@tz"] = tz;
              TraceBuilder tb(def, std::move(env));
              traces.push_back(tb.run(ir.body));
            }
          }
        }
        for (int t = 1; t < threads; ++t) {
          bool same = traces[t].size() == traces[0].size();
          for (size_t p = 0; same && p < traces[0].size(); ++p) {
            same = traces[t][p].endBarrier == traces[0][p].endBarrier;
          }
          if (!same) {
            throwError(
                ErrorKind::BarrierDivergence,
                "threads of block " + std::to_string(blockLinear) +
                    " reach different barrier sequences");
          }
        }

        int64_t work = 0;
        int64_t crossings = 0;
        for (size_t p = 0; p < traces[0].size(); ++p) {
          tracker.beginPhase(static_cast<int>(p), blockCoord, blockLinear);
          size_t maxLen = 0;
          for (int t = 0; t < threads; ++t) {
            maxLen = std::max(maxLen, traces[t][p].actions.size());
          }
          // Round-robin across threads, one IR statement at a time.
          for (size_t k = 0; k < maxLen; ++k) {
            for (int t = 0; t < threads; ++t) {
              const auto& actions = traces[t][p].actions;
              if (k >= actions.size()) {
                continue;
              }
              mem.setThread(t);
              const Action& a = actions[k];
              if (a.node->kind == IrKind::Compute) {
                EvalEnv env;
                env.ints = a.env;
                env.scalars = &scalars;
                env.def = &def;
                executeStmtInstance(def, a.node->stmt, env, mem);
              } else {
                executeCopy(a, def, scalars, mem);
              }
              ++work;
            }
          }
          if (traces[0][p].endBarrier >= 0) {
            ++crossings;
          }
        }
        result.totalStatements += work;
        result.totalBarrierCrossings += crossings;
        result.cost = std::max(result.cost, work + 32 * crossings);
      }
    }
  }
  return result;
}

} // namespace backend
} // namespace tc
