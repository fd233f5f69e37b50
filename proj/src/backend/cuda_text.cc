/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/backend/cuda_text.h"

#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tc/lang/validate.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace backend {

namespace {

const char* kBlockCoord[3] = {"@bx", "@by", "@bz"};
const char* kThreadCoord[3] = {"@tx", "@ty", "@tz"};
const char* kBlockName[3] = {"bx", "by", "bz"};
const char* kThreadName[3] = {"tx", "ty", "tz"};
const char* kDimSuffix[3] = {"x", "y", "z"};

struct RenderCtx {
  const KernelIR* ir = nullptr;
  const sem::SpecializedDef* def = nullptr;
  // Variables with a known constant value: size symbols, coordinates of
  // extent-1 grid/block dimensions, and textually expanded loop variables.
  std::map<std::string, int64_t> constVals;
  // Affine value of a variable over display atoms (bx, tx, c0, ...); this
  // is what lets reconstructed iterators simplify back to loop variables.
  std::map<std::string, poly::AffineExpr> varAffine;
  std::set<std::string> buffers;
  std::ostringstream out;
  int indent = 1;

  void line(const std::string& s) {
    for (int i = 0; i < indent; ++i) {
      out << "  ";
    }
    out << s << "\n";
  }
};

/* Scoped save/restore for one variable's bindings. */
class Binding {
 public:
  Binding(RenderCtx& ctx, const std::string& name) : ctx_(ctx), name_(name) {
    auto a = ctx.varAffine.find(name);
    if (a != ctx.varAffine.end()) {
      oldAffine_ = a->second;
    }
    auto c = ctx.constVals.find(name);
    if (c != ctx.constVals.end()) {
      oldConst_ = c->second;
    }
    ctx.varAffine.erase(name);
    ctx.constVals.erase(name);
  }

  ~Binding() {
    ctx_.varAffine.erase(name_);
    ctx_.constVals.erase(name_);
    if (oldAffine_) {
      ctx_.varAffine[name_] = *oldAffine_;
    }
    if (oldConst_) {
      ctx_.constVals[name_] = *oldConst_;
    }
  }

  Binding(const Binding&) = delete;
  Binding& operator=(const Binding&) = delete;

 private:
  RenderCtx& ctx_;
  std::string name_;
  std::optional<poly::AffineExpr> oldAffine_;
  std::optional<int64_t> oldConst_;
};

bool lookupConst(const RenderCtx& ctx, const std::string& v, int64_t* out) {
  auto it = ctx.constVals.find(v);
  if (it != ctx.constVals.end()) {
    *out = it->second;
    return true;
  }
  auto s = ctx.def->sizes.find(v);
  if (s != ctx.def->sizes.end()) {
    *out = s->second;
    return true;
  }
  return false;
}

/* Rewrites an affine expression over environment variables into one over
 * display atoms, folding constants. */
poly::AffineExpr displayAffine(const poly::AffineExpr& e, const RenderCtx& ctx) {
  poly::AffineExpr out = poly::AffineExpr::constant(e.cst);
  for (const auto& [v, c] : e.coeffs) {
    if (c == 0) {
      continue;
    }
    int64_t cv = 0;
    if (lookupConst(ctx, v, &cv)) {
      out.cst += c * cv;
      continue;
    }
    auto it = ctx.varAffine.find(v);
    TC_CHECK(it != ctx.varAffine.end(), "no rendering for variable '" << v << "'");
    const poly::AffineExpr& sub = it->second;
    out.cst += c * sub.cst;
    for (const auto& [a, k] : sub.coeffs) {
      out.coeffs[a] += c * k;
    }
  }
  for (auto it = out.coeffs.begin(); it != out.coeffs.end();) {
    it = it->second == 0 ? out.coeffs.erase(it) : std::next(it);
  }
  return out;
}

/* Pretty-prints an affine form over display atoms. */
std::string affineText(const poly::AffineExpr& e) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : e.coeffs) {
    if (c == 0) {
      continue;
    }
    int64_t m = c;
    if (first) {
      if (m < 0) {
        os << "-";
        m = -m;
      }
    } else {
      os << (m < 0 ? " - " : " + ");
      m = m < 0 ? -m : m;
    }
    if (m != 1) {
      os << m << " * ";
    }
    os << v;
    first = false;
  }
  if (first) {
    return std::to_string(e.cst);
  }
  if (e.cst > 0) {
    os << " + " << e.cst;
  } else if (e.cst < 0) {
    os << " - " << -e.cst;
  }
  return os.str();
}

std::string renderAffine(const poly::AffineExpr& e, const RenderCtx& ctx) {
  return affineText(displayAffine(e, ctx));
}

/* Wraps multi-token texts so they compose safely inside larger terms. */
std::string atom(const std::string& s) {
  if (s.find(' ') == std::string::npos) {
    return s;
  }
  return "(" + s + ")";
}

std::string fmtFloat(double v) {
  if (std::isinf(v)) {
    return v < 0 ? "-INFINITY" : "INFINITY";
  }
  std::ostringstream os;
  os << std::setprecision(9) << v;
  std::string s = os.str();
  if (s.find_first_of(".e") == std::string::npos) {
    s += ".0";
  }
  return s + "f";
}

/* A rendered expression: affine values stay symbolic so that arithmetic on
 * them keeps simplifying; everything else is final text. */
struct RVal {
  std::optional<poly::AffineExpr> aff;
  std::string text;

  std::string str() const {
    return aff ? affineText(*aff) : text;
  }
};

RVal affVal(poly::AffineExpr e) {
  return RVal{std::move(e), ""};
}

RVal textVal(std::string s) {
  return RVal{std::nullopt, std::move(s)};
}

std::string joinComma(const std::vector<std::string>& parts) {
  std::string s;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) {
      s += ", ";
    }
    s += parts[i];
  }
  return s;
}

/* Row-major linearized access to a global tensor. */
std::string renderGlobalAccess(
    const std::string& tensor,
    const std::vector<std::string>& idx,
    const RenderCtx& ctx) {
  const auto& shape = ctx.def->shapes.at(tensor);
  TC_CHECK(shape.size() == idx.size(), "rank mismatch rendering '" << tensor << "'");
  std::vector<int64_t> stride(shape.size(), 1);
  for (size_t d = shape.size(); d-- > 1;) {
    stride[d - 1] = stride[d] * shape[d];
  }
  std::string s;
  for (size_t d = 0; d < idx.size(); ++d) {
    if (d) {
      s += " + ";
    }
    s += "(" + idx[d] + ")";
    if (stride[d] != 1) {
      s += " * " + std::to_string(stride[d]);
    }
  }
  if (s.empty()) {
    s = "0";
  }
  return tensor + "[" + s + "]";
}

std::string renderBufferAccess(const std::string& buffer, const std::vector<std::string>& idx) {
  std::string s = buffer;
  for (const auto& i : idx) {
    s += "[" + i + "]";
  }
  return s;
}

RVal evalExpr(const lang::Expr& e, const RenderCtx& ctx);

std::string renderBuiltin(const lang::Expr& e, const RenderCtx& ctx) {
  std::vector<std::string> args;
  args.reserve(e.args.size());
  for (const auto& a : e.args) {
    args.push_back(evalExpr(*a, ctx).str());
  }
  if (e.name == "sigmoid") {
    return "(1.0f / (1.0f + expf(-(" + args[0] + "))))";
  }
  static const std::map<std::string, std::string> kNames = {
      {"fmaxf", "fmaxf"},
      {"fminf", "fminf"},
      {"exp", "expf"},
      {"log", "logf"},
      {"tanh", "tanhf"},
      {"abs", "fabsf"},
  };
  auto it = kNames.find(e.name);
  TC_CHECK(it != kNames.end(), "unknown builtin '" << e.name << "'");
  return it->second + "(" + joinComma(args) + ")";
}

RVal evalExpr(const lang::Expr& e, const RenderCtx& ctx) {
  switch (e.kind) {
    case lang::ExprKind::IntConst:
      return affVal(poly::AffineExpr::constant(e.intValue));
    case lang::ExprKind::FloatConst:
      return textVal(fmtFloat(e.floatValue));
    case lang::ExprKind::Ident: {
      int64_t cv = 0;
      if (lookupConst(ctx, e.name, &cv)) {
        return affVal(poly::AffineExpr::constant(cv));
      }
      auto it = ctx.varAffine.find(e.name);
      if (it != ctx.varAffine.end()) {
        return affVal(it->second);
      }
      // Runtime scalar: stays a kernel parameter.
      return textVal(e.name);
    }
    case lang::ExprKind::DimOf:
      return affVal(poly::AffineExpr::constant(ctx.def->shapes.at(e.name).at(e.dim)));
    case lang::ExprKind::Access: {
      if (e.isBuiltinCall) {
        return textVal(renderBuiltin(e, ctx));
      }
      std::vector<std::string> idx;
      idx.reserve(e.args.size());
      for (const auto& a : e.args) {
        idx.push_back(evalExpr(*a, ctx).str());
      }
      if (ctx.buffers.count(e.name)) {
        return textVal(renderBufferAccess(e.name, idx));
      }
      return textVal(renderGlobalAccess(e.name, idx, ctx));
    }
    case lang::ExprKind::Unary: {
      RVal a = evalExpr(*e.args[0], ctx);
      if (e.op == "-" && a.aff) {
        return affVal(a.aff->scaled(-1));
      }
      return textVal("(" + e.op + atom(a.str()) + ")");
    }
    case lang::ExprKind::Binary: {
      RVal a = evalExpr(*e.args[0], ctx);
      RVal b = evalExpr(*e.args[1], ctx);
      if (a.aff && b.aff) {
        if (e.op == "+" || e.op == "-") {
          poly::AffineExpr r = *a.aff;
          int64_t sign = e.op == "+" ? 1 : -1;
          r.cst += sign * b.aff->cst;
          for (const auto& [v, c] : b.aff->coeffs) {
            r.coeffs[v] += sign * c;
            if (r.coeffs[v] == 0) {
              r.coeffs.erase(v);
            }
          }
          return affVal(std::move(r));
        }
        if (e.op == "*" && b.aff->coeffs.empty()) {
          return affVal(a.aff->scaled(b.aff->cst));
        }
        if (e.op == "*" && a.aff->coeffs.empty()) {
          return affVal(b.aff->scaled(a.aff->cst));
        }
        if (e.op == "/" && b.aff->coeffs.empty() && b.aff->cst != 0) {
          int64_t d = b.aff->cst;
          bool divides = a.aff->cst % d == 0;
          for (const auto& [v, c] : a.aff->coeffs) {
            (void)v;
            divides = divides && c % d == 0;
          }
          if (divides) {
            poly::AffineExpr r = *a.aff;
            r.cst /= d;
            for (auto& [v, c] : r.coeffs) {
              (void)v;
              c /= d;
            }
            return affVal(std::move(r));
          }
          return textVal(atom(a.str()) + " / " + std::to_string(d));
        }
      }
      return textVal("(" + a.str() + " " + e.op + " " + b.str() + ")");
    }
    case lang::ExprKind::Ternary:
      return textVal(
          "(" + evalExpr(*e.args[0], ctx).str() + " ? " + evalExpr(*e.args[1], ctx).str() +
          " : " + evalExpr(*e.args[2], ctx).str() + ")");
  }
  TC_CHECK(false, "unhandled expression kind");
  return textVal("");
}

/* Renders a residue predicate; nullopt when it is statically true. */
std::optional<std::string> renderCond(const IrCond& c, const RenderCtx& ctx) {
  std::string rhs;
  if (c.rhsVar.empty()) {
    rhs = std::to_string(c.rhsConst);
  } else {
    int64_t cv = 0;
    rhs = lookupConst(ctx, c.rhsVar, &cv) ? std::to_string(cv)
                                          : affineText(ctx.varAffine.at(c.rhsVar));
  }
  if (c.modulus == 1) {
    // lhs / divisor mod 1 is always zero.
    if (rhs == "0") {
      return std::nullopt;
    }
    return "(0 == " + rhs + ")";
  }
  std::string l = renderAffine(c.lhs, ctx);
  if (c.divisor != 1) {
    l = atom(l) + " / " + std::to_string(c.divisor);
    l = atom(l);
  } else {
    l = atom(l);
  }
  return "(" + l + " % " + std::to_string(c.modulus) + " == " + rhs + ")";
}

std::string joinAnd(const std::vector<std::string>& conds) {
  std::string s;
  for (size_t i = 0; i < conds.size(); ++i) {
    if (i) {
      s += " && ";
    }
    s += conds[i];
  }
  return s;
}

void renderNodes(const std::vector<IrPtr>& nodes, RenderCtx& ctx);

void renderStmt(size_t stmtIdx, RenderCtx& ctx) {
  const auto& cs = ctx.def->stmts[stmtIdx];
  const lang::Stmt& st = cs.stmt;

  std::vector<std::string> idx;
  idx.reserve(st.lhsIndices.size());
  for (const auto& a : st.lhsIndices) {
    idx.push_back(evalExpr(*a, ctx).str());
  }
  std::string lhs = ctx.buffers.count(st.lhsTensor)
      ? renderBufferAccess(st.lhsTensor, idx)
      : renderGlobalAccess(st.lhsTensor, idx, ctx);
  std::string rhs = evalExpr(*st.rhs, ctx).str();

  switch (st.op) {
    case lang::AssignOp::Assign:
      ctx.line(lhs + " = " + rhs + ";");
      break;
    case lang::AssignOp::PlusEq:
      ctx.line(lhs + " = " + lhs + " + " + atom(rhs) + ";");
      break;
    case lang::AssignOp::TimesEq:
      ctx.line(lhs + " = " + lhs + " * " + atom(rhs) + ";");
      break;
    case lang::AssignOp::MinEq:
      ctx.line(lhs + " = fminf(" + lhs + ", " + rhs + ");");
      break;
    case lang::AssignOp::MaxEq:
      ctx.line(lhs + " = fmaxf(" + lhs + ", " + rhs + ");");
      break;
    default:
      TC_CHECK(false, "initializing reduction survived specialization");
  }
}

void renderCompute(const IrNode& n, RenderCtx& ctx) {
  std::vector<std::unique_ptr<Binding>> bound;
  for (const auto& [iter, vars] : n.iterSum) {
    poly::AffineExpr sum = poly::AffineExpr::constant(0);
    for (const auto& v : vars) {
      poly::AffineExpr part = displayAffine(poly::AffineExpr::var(v), ctx);
      sum.cst += part.cst;
      for (const auto& [a, k] : part.coeffs) {
        sum.coeffs[a] += k;
      }
    }
    bound.push_back(std::make_unique<Binding>(ctx, iter));
    if (sum.coeffs.empty()) {
      ctx.constVals[iter] = sum.cst;
    } else {
      ctx.varAffine[iter] = std::move(sum);
    }
  }
  renderStmt(n.stmt, ctx);
}

void addAffine(poly::AffineExpr& a, const poly::AffineExpr& b) {
  a.cst += b.cst;
  for (const auto& [v, c] : b.coeffs) {
    a.coeffs[v] += c;
    if (a.coeffs[v] == 0) {
      a.coeffs.erase(v);
    }
  }
}

/* Adds `scale * local` where local is a loop-variable atom or a constant
 * text (a copy loop expanded or collapsed to its bound). */
void addTerm(poly::AffineExpr& a, const std::string& local, int64_t scale) {
  if (!local.empty() &&
      (std::isdigit(static_cast<unsigned char>(local[0])) || local[0] == '-')) {
    a.cst += std::stoll(local) * scale;
    return;
  }
  a.coeffs[local] += scale;
  if (a.coeffs[local] == 0) {
    a.coeffs.erase(local);
  }
}

void renderCopy(const IrNode& n, RenderCtx& ctx) {
  const sched::PromotedGroup& g = *n.group;
  const auto& shape = ctx.def->shapes.at(g.tensor);

  std::vector<std::string> bufIdx;
  bufIdx.reserve(n.copyVars.size());
  for (const auto& v : n.copyVars) {
    bufIdx.push_back(renderAffine(poly::AffineExpr::var(v), ctx));
  }

  std::vector<std::string> guards;
  std::vector<std::string> globalIdx(g.dims.size());
  std::vector<std::unique_ptr<Binding>> bound;

  size_t flat = 0;
  for (size_t d = 0; d < g.dims.size(); ++d) {
    const auto& parts = g.dims[d];
    if (parts.size() == 1 && !parts[0].indirect) {
      const auto& b = parts[0];
      const std::string& local = bufIdx[flat++];
      poly::AffineExpr raw = displayAffine(b.offset, ctx);
      if (b.threadDim >= 0) {
        poly::AffineExpr within = poly::AffineExpr::constant(0);
        addTerm(within, local, b.threadExtent);
        addAffine(within, displayAffine(poly::AffineExpr::var(kThreadCoord[b.threadDim]), ctx));
        if (b.extent % b.threadExtent != 0) {
          // Ceil-sliced tail: the last per-thread cell may fall past the tile.
          guards.push_back("(" + affineText(within) + " < " + std::to_string(b.extent) + ")");
        }
        addAffine(raw, within);
      } else {
        addTerm(raw, local, 1);
      }
      std::string rawText = affineText(raw);
      bool wholeDim = b.offset.coeffs.empty() && b.offset.cst == 0 && b.threadDim < 0 &&
          b.extent == shape[d];
      if (!wholeDim) {
        guards.push_back(
            "(0 <= " + rawText + " && " + rawText + " < " + std::to_string(shape[d]) + ")");
      }
      globalIdx[d] = rawText;
      continue;
    }
    // Indirect: bind the expansion iterators, then re-render the original
    // subscript expression; no bounds guard (a bad index is a runtime fault).
    for (const auto& b : parts) {
      const std::string& local = bufIdx[flat++];
      poly::AffineExpr iv = displayAffine(b.offset, ctx);
      addTerm(iv, local, 1);
      bool wholeWindow =
          b.offset.coeffs.empty() && b.offset.cst == b.lo && b.offset.cst + b.extent == b.hi;
      if (!wholeWindow) {
        std::string t = affineText(iv);
        guards.push_back(
            "(" + std::to_string(b.lo) + " <= " + t + " && " + t + " < " +
            std::to_string(b.hi) + ")");
      }
      bound.push_back(std::make_unique<Binding>(ctx, b.iter));
      ctx.varAffine[b.iter] = std::move(iv);
    }
    globalIdx[d] = evalExpr(*g.subs[d], ctx).str();
  }

  std::string bufA = renderBufferAccess(g.buffer, bufIdx);
  std::string tenA = renderGlobalAccess(g.tensor, globalIdx, ctx);
  std::string assign = n.copyIn ? bufA + " = " + tenA + ";" : tenA + " = " + bufA + ";";

  if (guards.empty()) {
    ctx.line(assign);
  } else {
    ctx.line("if (" + joinAnd(guards) + ") {");
    ++ctx.indent;
    ctx.line(assign);
    --ctx.indent;
    ctx.line("}");
  }
}

std::string loopVarName(const std::string& var) {
  TC_CHECK(!var.empty(), "unnamed loop variable");
  return var[0] == '@' ? var.substr(1) : var;
}

/* True when the loop bound folds to a constant under the current scope. */
bool tryEvalAffine(const poly::AffineExpr& e, const RenderCtx& ctx, int64_t* out) {
  int64_t acc = e.cst;
  for (const auto& [v, c] : e.coeffs) {
    if (c == 0) {
      continue;
    }
    int64_t cv = 0;
    if (!lookupConst(ctx, v, &cv)) {
      return false;
    }
    acc += c * cv;
  }
  *out = acc;
  return true;
}

void renderLoop(const IrNode& n, RenderCtx& ctx) {
  std::string name = loopVarName(n.var);
  int64_t loConst = 0;
  bool constLo = tryEvalAffine(n.lo, ctx, &loConst);

  if (constLo && n.unroll) {
    // Textual expansion: emit one copy of the body per trip.
    for (int64_t v = loConst; v < n.hi; v += n.step) {
      Binding b(ctx, n.var);
      ctx.constVals[n.var] = v;
      renderNodes(n.body, ctx);
    }
    return;
  }

  if (!constLo && n.hi <= n.step) {
    // Strided loop with at most one trip per coordinate: bind the variable
    // to its lower bound; guard unless every coordinate takes the trip.
    poly::AffineExpr lo = displayAffine(n.lo, ctx);
    std::string loText = affineText(lo);
    Binding b(ctx, n.var);
    ctx.varAffine[n.var] = std::move(lo);
    if (n.hi == n.step) {
      renderNodes(n.body, ctx);
    } else {
      ctx.line("if (" + loText + " < " + std::to_string(n.hi) + ") {");
      ++ctx.indent;
      renderNodes(n.body, ctx);
      --ctx.indent;
      ctx.line("}");
    }
    return;
  }

  if (n.unroll) {
    ctx.line("#pragma unroll");
  }
  std::string lo = constLo ? std::to_string(loConst) : renderAffine(n.lo, ctx);
  ctx.line(
      "for (int " + name + " = " + lo + "; " + name + " <= " + std::to_string(n.hi - 1) + "; " +
      name + " += " + std::to_string(n.step) + ") {");
  Binding b(ctx, n.var);
  ctx.varAffine[n.var] = poly::AffineExpr::var(name);
  ++ctx.indent;
  renderNodes(n.body, ctx);
  --ctx.indent;
  ctx.line("}");
}

void renderNode(const IrNode& n, RenderCtx& ctx) {
  switch (n.kind) {
    case IrKind::Barrier:
      ctx.line("__syncthreads();");
      return;
    case IrKind::Loop:
      renderLoop(n, ctx);
      return;
    case IrKind::Cond: {
      std::vector<std::string> conds;
      for (const auto& c : n.conds) {
        if (auto t = renderCond(c, ctx)) {
          conds.push_back(*t);
        }
      }
      if (conds.empty()) {
        renderNodes(n.body, ctx);
        return;
      }
      ctx.line("if (" + joinAnd(conds) + ") {");
      ++ctx.indent;
      renderNodes(n.body, ctx);
      --ctx.indent;
      ctx.line("}");
      return;
    }
    case IrKind::Compute:
      renderCompute(n, ctx);
      return;
    case IrKind::Copy:
      renderCopy(n, ctx);
      return;
  }
}

void renderNodes(const std::vector<IrPtr>& nodes, RenderCtx& ctx) {
  for (const auto& n : nodes) {
    renderNode(*n, ctx);
  }
}

std::string pointerParam(const std::string& name, lang::ElemKind kind, bool readOnly) {
  std::string s = readOnly ? "const " : "";
  s += kind == lang::ElemKind::Int ? "int" : "float";
  s += "* __restrict__ " + name;
  return s;
}

std::string bufferDecl(const BufferDecl& b) {
  std::string s = b.sharedMem ? "__shared__ " : "";
  s += b.elemKind == lang::ElemKind::Int ? "int " : "float ";
  s += b.name;
  for (int64_t e : b.shape) {
    s += "[" + std::to_string(e) + "]";
  }
  return s + ";";
}

} // namespace

std::string emitCudaText(const KernelIR& ir) {
  TC_CHECK(ir.def != nullptr, "kernel carries no definition");
  const sem::SpecializedDef& def = *ir.def;
  const lang::ValidatedDef& vdef = def.vdef;

  RenderCtx ctx;
  ctx.ir = &ir;
  ctx.def = &def;
  for (const auto& b : ir.sharedBufs) {
    ctx.buffers.insert(b.name);
  }
  for (const auto& b : ir.privateBufs) {
    ctx.buffers.insert(b.name);
  }

  // Parameter list: outputs, temporaries, inputs, runtime scalars. Size
  // symbols and integer scalars are baked into the specialized body.
  std::vector<std::string> params;
  for (const auto& r : vdef.def.returns) {
    params.push_back(pointerParam(r, vdef.tensors.at(r).elemKind, false));
  }
  for (const auto& [name, info] : vdef.tensors) {
    if (info.role == lang::TensorRole::Temporary) {
      params.push_back(pointerParam(name, info.elemKind, false));
    }
  }
  for (const auto& p : vdef.def.params) {
    if (!p.isScalar()) {
      if (vdef.tensors.at(p.name).role == lang::TensorRole::Input) {
        params.push_back(pointerParam(p.name, p.elemKind, true));
      }
      continue;
    }
    if (p.elemKind == lang::ElemKind::Float) {
      params.push_back("float " + p.name);
    } else if (!def.sizes.count(p.name)) {
      params.push_back("int " + p.name);
    }
  }

  std::ostringstream head;
  head << "// grid (" << ir.grid[0] << ", " << ir.grid[1] << ", " << ir.grid[2] << "), block ("
       << ir.block[0] << ", " << ir.block[1] << ", " << ir.block[2] << ")\n";
  head << "__global__ void " << ir.name << "(" << joinComma(params) << ") {\n";

  for (int d = 0; d < 3; ++d) {
    if (ir.grid[d] > 1) {
      ctx.varAffine[kBlockCoord[d]] = poly::AffineExpr::var(kBlockName[d]);
      ctx.line(std::string("int ") + kBlockName[d] + " = blockIdx." + kDimSuffix[d] + ";");
    } else {
      ctx.constVals[kBlockCoord[d]] = 0;
    }
    if (ir.block[d] > 1) {
      ctx.varAffine[kThreadCoord[d]] = poly::AffineExpr::var(kThreadName[d]);
      ctx.line(std::string("int ") + kThreadName[d] + " = threadIdx." + kDimSuffix[d] + ";");
    } else {
      ctx.constVals[kThreadCoord[d]] = 0;
    }
  }
  for (const auto& b : ir.sharedBufs) {
    ctx.line(bufferDecl(b));
  }
  for (const auto& b : ir.privateBufs) {
    ctx.line(bufferDecl(b));
  }

  renderNodes(ir.body, ctx);

  return head.str() + ctx.out.str() + "}\n";
}

} // namespace backend
} // namespace tc
