/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/backend/interpreter.h"

#include <cmath>

#include "tc/support/diagnostics.h"

namespace tc {
namespace backend {

namespace {

double evalBuiltin(const std::string& name, const std::vector<double>& args, const SourceLoc& loc) {
  if (name == "fmaxf") {
    return std::fmax(args[0], args[1]);
  }
  if (name == "fminf") {
    return std::fmin(args[0], args[1]);
  }
  if (name == "exp") {
    return std::exp(args[0]);
  }
  if (name == "log") {
    return std::log(args[0]);
  }
  if (name == "tanh") {
    return std::tanh(args[0]);
  }
  if (name == "sigmoid") {
    return 1.0 / (1.0 + std::exp(-args[0]));
  }
  if (name == "abs") {
    return std::fabs(args[0]);
  }
  throwError(ErrorKind::Internal, "unknown builtin '" + name + "'", loc);
}

std::vector<int64_t> evalSubscripts(
    const std::vector<lang::ExprPtr>& subs,
    const EvalEnv& env,
    MemoryModel& mem) {
  std::vector<int64_t> idx;
  idx.reserve(subs.size());
  for (const auto& s : subs) {
    idx.push_back(evalIndex(*s, env, mem));
  }
  return idx;
}

double combine(lang::AssignOp op, double cur, double v, const SourceLoc& loc) {
  switch (op) {
    case lang::AssignOp::PlusEq:
      return cur + v;
    case lang::AssignOp::TimesEq:
      return cur * v;
    case lang::AssignOp::MinEq:
      return std::fmin(cur, v);
    case lang::AssignOp::MaxEq:
      return std::fmax(cur, v);
    default:
      throwError(ErrorKind::Internal, "unexpected assignment operator at execution", loc);
  }
}

} // namespace

double evalValue(const lang::Expr& e, const EvalEnv& env, MemoryModel& mem) {
  switch (e.kind) {
    case lang::ExprKind::IntConst:
      return static_cast<double>(e.intValue);
    case lang::ExprKind::FloatConst:
      return e.floatValue;
    case lang::ExprKind::Ident: {
      auto it = env.ints.find(e.name);
      if (it != env.ints.end()) {
        return static_cast<double>(it->second);
      }
      if (env.scalars != nullptr) {
        auto sit = env.scalars->find(e.name);
        if (sit != env.scalars->end()) {
          return sit->second;
        }
      }
      throwError(ErrorKind::Name, "no value bound for '" + e.name + "'", e.loc);
    }
    case lang::ExprKind::Access: {
      if (e.isBuiltinCall) {
        std::vector<double> args;
        args.reserve(e.args.size());
        for (const auto& a : e.args) {
          args.push_back(evalValue(*a, env, mem));
        }
        return evalBuiltin(e.name, args, e.loc);
      }
      return mem.load(e.name, evalSubscripts(e.args, env, mem), e.loc);
    }
    case lang::ExprKind::Unary: {
      double v = evalValue(*e.args[0], env, mem);
      if (e.op == "-") {
        return -v;
      }
      return v == 0.0 ? 1.0 : 0.0; // "!"
    }
    case lang::ExprKind::Binary: {
      double a = evalValue(*e.args[0], env, mem);
      double b = evalValue(*e.args[1], env, mem);
      if (e.op == "+") {
        return a + b;
      }
      if (e.op == "-") {
        return a - b;
      }
      if (e.op == "*") {
        return a * b;
      }
      if (e.op == "/") {
        return a / b;
      }
      if (e.op == "<") {
        return a < b ? 1.0 : 0.0;
      }
      if (e.op == ">") {
        return a > b ? 1.0 : 0.0;
      }
      if (e.op == "<=") {
        return a <= b ? 1.0 : 0.0;
      }
      if (e.op == ">=") {
        return a >= b ? 1.0 : 0.0;
      }
      if (e.op == "==") {
        return a == b ? 1.0 : 0.0;
      }
      if (e.op == "!=") {
        return a != b ? 1.0 : 0.0;
      }
      if (e.op == "&&") {
        return (a != 0.0 && b != 0.0) ? 1.0 : 0.0;
      }
      if (e.op == "||") {
        return (a != 0.0 || b != 0.0) ? 1.0 : 0.0;
      }
      throwError(ErrorKind::Internal, "unknown binary operator '" + e.op + "'", e.loc);
    }
    case lang::ExprKind::Ternary:
      return evalValue(*e.args[0], env, mem) != 0.0 ? evalValue(*e.args[1], env, mem)
                                                    : evalValue(*e.args[2], env, mem);
    case lang::ExprKind::DimOf: {
      TC_CHECK(env.def != nullptr, "dimension-of outside a specialized definition");
      const auto& shape = env.def->shapes.at(e.name);
      return static_cast<double>(shape.at(static_cast<size_t>(e.dim)));
    }
  }
  throwError(ErrorKind::Internal, "unhandled expression kind", e.loc);
}

int64_t evalIndex(const lang::Expr& e, const EvalEnv& env, MemoryModel& mem) {
  switch (e.kind) {
    case lang::ExprKind::IntConst:
      return e.intValue;
    case lang::ExprKind::Ident: {
      auto it = env.ints.find(e.name);
      if (it != env.ints.end()) {
        return it->second;
      }
      throwError(ErrorKind::Name, "no integer value bound for '" + e.name + "'", e.loc);
    }
    case lang::ExprKind::Access: {
      TC_CHECK(!e.isBuiltinCall, "builtin call in a subscript");
      double v = mem.load(e.name, evalSubscripts(e.args, env, mem), e.loc);
      return static_cast<int64_t>(v); // int tensors are exact in double
    }
    case lang::ExprKind::Unary: {
      TC_CHECK(e.op == "-", "unsupported unary operator in a subscript");
      return -evalIndex(*e.args[0], env, mem);
    }
    case lang::ExprKind::Binary: {
      int64_t a = evalIndex(*e.args[0], env, mem);
      int64_t b = evalIndex(*e.args[1], env, mem);
      if (e.op == "+") {
        return a + b;
      }
      if (e.op == "-") {
        return a - b;
      }
      if (e.op == "*") {
        return a * b;
      }
      if (e.op == "/") {
        if (b == 0) {
          throwError(ErrorKind::IndexOutOfRange, "division by zero in a subscript", e.loc);
        }
        return a / b;
      }
      throwError(
          ErrorKind::Internal, "unsupported binary operator '" + e.op + "' in a subscript", e.loc);
    }
    case lang::ExprKind::Ternary:
      return evalValue(*e.args[0], env, mem) != 0.0 ? evalIndex(*e.args[1], env, mem)
                                                    : evalIndex(*e.args[2], env, mem);
    case lang::ExprKind::DimOf: {
      TC_CHECK(env.def != nullptr, "dimension-of outside a specialized definition");
      return env.def->shapes.at(e.name).at(static_cast<size_t>(e.dim));
    }
    default:
      throwError(ErrorKind::Internal, "unsupported expression in a subscript", e.loc);
  }
}

void executeStmtInstance(
    const sem::SpecializedDef& def,
    size_t stmtIdx,
    const EvalEnv& env,
    MemoryModel& mem) {
  const auto& cs = def.stmts[stmtIdx];
  const auto& st = cs.stmt;
  std::vector<int64_t> lhs = evalSubscripts(st.lhsIndices, env, mem);
  double rhs = evalValue(*st.rhs, env, mem);
  if (st.op == lang::AssignOp::Assign) {
    mem.store(st.lhsTensor, lhs, rhs, st.loc);
    return;
  }
  double cur = mem.load(st.lhsTensor, lhs, st.loc);
  mem.store(st.lhsTensor, lhs, combine(st.op, cur, rhs, st.loc), st.loc);
}

TensorMap initialStorage(const sem::SpecializedDef& def, const TensorMap& inputs) {
  TensorMap storage;
  for (const auto& [name, info] : def.vdef.tensors) {
    const auto& shape = def.shapes.at(name);
    auto it = inputs.find(name);
    if (it != inputs.end()) {
      if (it->second.shape != shape || it->second.elemKind != info.elemKind) {
        throwError(
            ErrorKind::Io,
            "tensor '" + name + "' does not match the shape inferred at these sizes");
      }
      storage.emplace(name, it->second);
      continue;
    }
    if (info.role == lang::TensorRole::Input) {
      throwError(ErrorKind::Io, "input tensor '" + name + "' was not provided");
    }
    storage.emplace(name, TensorData::zeros(info.elemKind, shape));
  }
  return storage;
}

namespace {

class GlobalMemory : public MemoryModel {
 public:
  explicit GlobalMemory(TensorMap& storage) : storage_(storage) {}

  double load(const std::string& space, const std::vector<int64_t>& idx, const SourceLoc& loc)
      override {
    return at(space, loc).load(linear(space, idx, loc));
  }

  void store(const std::string& space, const std::vector<int64_t>& idx, double v, const SourceLoc& loc)
      override {
    at(space, loc).store(linear(space, idx, loc), v);
  }

 private:
  TensorData& at(const std::string& space, const SourceLoc& loc) {
    auto it = storage_.find(space);
    if (it == storage_.end()) {
      throwError(ErrorKind::Internal, "no storage for tensor '" + space + "'", loc);
    }
    return it->second;
  }

  int64_t linear(const std::string& space, const std::vector<int64_t>& idx, const SourceLoc& loc) {
    const auto& t = at(space, loc);
    for (size_t d = 0; d < idx.size(); ++d) {
      if (idx[d] < 0 || idx[d] >= t.shape[d]) {
        throwError(
            ErrorKind::IndexOutOfRange,
            "index " + std::to_string(idx[d]) + " escapes dimension " + std::to_string(d) +
                " of tensor '" + space + "' (extent " + std::to_string(t.shape[d]) + ")",
            loc);
      }
    }
    return t.linearize(idx);
  }

  TensorMap& storage_;
};

} // namespace

TensorMap interpretReference(
    const sem::SpecializedDef& def,
    const TensorMap& inputs,
    const ScalarMap& scalars) {
  TensorMap storage = initialStorage(def, inputs);
  GlobalMemory mem(storage);

  EvalEnv env;
  env.scalars = &scalars;
  env.def = &def;
  for (const auto& [sym, v] : def.sizes) {
    env.ints[sym] = v;
  }

  for (size_t s = 0; s < def.stmts.size(); ++s) {
    const auto& cs = def.stmts[s];
    size_t n = cs.iterators.size();
    std::vector<int64_t> point(n);
    for (size_t k = 0; k < n; ++k) {
      point[k] = cs.range(cs.iterators[k]).lo;
    }
    // Odometer over the canonical loop nest; empty nests run once.
    while (true) {
      for (size_t k = 0; k < n; ++k) {
        env.ints[cs.iterators[k]] = point[k];
      }
      executeStmtInstance(def, s, env, mem);
      bool done = (n == 0);
      size_t k = n;
      while (k > 0) {
        --k;
        if (++point[k] < cs.range(cs.iterators[k]).hi) {
          break;
        }
        point[k] = cs.range(cs.iterators[k]).lo;
        if (k == 0) {
          done = true;
        }
      }
      if (done) {
        break;
      }
    }
    for (size_t k = 0; k < n; ++k) {
      env.ints.erase(cs.iterators[k]);
    }
  }
  return storage;
}

} // namespace backend
} // namespace tc
