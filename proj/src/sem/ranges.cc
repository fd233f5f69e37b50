/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sem/ranges.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "tc/support/diagnostics.h"

namespace tc {
namespace sem {

const SymRange& StmtRanges::at(const std::string& iter) const {
  auto it = ranges.find(iter);
  TC_CHECK(it != ranges.end(), "no range for iterator '" << iter << "'");
  return it->second;
}

namespace {

using lang::Expr;
using lang::ExprKind;
using lang::ExprPtr;
using lang::TensorRole;

// Guarded arithmetic: SizeExpr supports affine+affine, min/max plus affine,
// and floordiv plus affine when the fold stays exact; anything else yields
// nullopt so the caller can report the subscript instead of asserting.
std::optional<SizeExpr> tryAdd(const SizeExpr& a, const SizeExpr& b) {
  if (a.isAffine() && b.isAffine()) {
    return a + b;
  }
  const SizeExpr& shaped = a.isAffine() ? b : a;
  const SizeExpr& affine = a.isAffine() ? a : b;
  if (!a.isAffine() && !b.isAffine()) {
    return std::nullopt;
  }
  if (shaped.kind() == SizeExpr::Kind::Min || shaped.kind() == SizeExpr::Kind::Max) {
    return shaped + affine;
  }
  // FloorDiv: foldable when the addend is constant or the divisor is.
  if (affine.isConstant() || shaped.args()[1].isConstant()) {
    return shaped + affine;
  }
  return std::nullopt;
}

std::optional<SizeExpr> tryMul(const SizeExpr& a, const SizeExpr& b) {
  if (a.isConstant()) {
    int64_t f = a.constValue();
    if (b.isAffine() || f == 0 || f == 1) {
      return b.scaled(f);
    }
    if (f > 1 && b.kind() != SizeExpr::Kind::FloorDiv) {
      return b.scaled(f);
    }
    return std::nullopt;
  }
  if (b.isConstant()) {
    return tryMul(b, a);
  }
  return std::nullopt;
}

std::optional<SizeExpr> tryNeg(const SizeExpr& a) {
  return tryMul(SizeExpr::constant(-1), a);
}

// A subscript decomposed as sum(coeffs[iter] * iter) + cst. Coefficients
// may involve int scalar parameters (e.g. a stride), the constant part may
// involve size symbols.
struct LinForm {
  std::map<std::string, SizeExpr> coeffs;
  SizeExpr cst;
};

struct AccessSite {
  std::string tensor;
  const std::vector<ExprPtr>* subs;
  SourceLoc loc;
};

struct IncInterval {
  SizeExpr lo;
  SizeExpr hi; // inclusive
};

class Inference {
 public:
  explicit Inference(const lang::ValidatedDef& vdef) : vdef_(vdef) {
    size_t n = vdef_.def.stmts.size();
    resolved_.resize(n);
    iterSets_.resize(n);
    accesses_.resize(n);
    for (size_t s = 0; s < n; ++s) {
      const auto& info = vdef_.stmtInfo[s];
      iterSets_[s].insert(info.iterators.begin(), info.iterators.end());
      const auto& stmt = vdef_.def.stmts[s];
      accesses_[s].push_back({stmt.lhsTensor, &stmt.lhsIndices, stmt.loc});
      collectReads(stmt.rhs, s);
      writers_[stmt.lhsTensor].push_back(s);
    }
  }

  InferredRanges run();

 private:
  void collectReads(const ExprPtr& e, size_t s);
  std::optional<LinForm> linearize(const ExprPtr& e, size_t s) const;
  int signOf(const SizeExpr& c, SourceLoc loc) const;
  std::optional<IncInterval> restInterval(
      const LinForm& lf,
      const std::string& skip,
      size_t s) const;
  SymRange solveSubscript(
      const LinForm& lf,
      const std::string& u,
      const SizeExpr& extent,
      size_t s,
      SourceLoc loc) const;
  std::optional<SymRange> whereRange(const lang::RangeConstraint& rc, size_t s) const;
  void checkNonEmpty(const SymRange& r, const std::string& iter, SourceLoc loc) const;

  const lang::ValidatedDef& vdef_;
  std::map<std::string, std::vector<SizeExpr>> shapes_;
  std::vector<std::map<std::string, SymRange>> resolved_;
  std::vector<std::set<std::string>> iterSets_;
  std::vector<std::vector<AccessSite>> accesses_;
  std::map<std::string, std::vector<size_t>> writers_;
  std::set<std::string> synthesized_;
};

void Inference::collectReads(const ExprPtr& e, size_t s) {
  if (!e) {
    return;
  }
  if (e->kind == ExprKind::Access && !e->isBuiltinCall) {
    accesses_[s].push_back({e->name, &e->args, e->loc});
  }
  for (const auto& a : e->args) {
    collectReads(a, s);
  }
}

std::optional<LinForm> Inference::linearize(const ExprPtr& e, size_t s) const {
  switch (e->kind) {
    case ExprKind::IntConst: {
      LinForm lf;
      lf.cst = SizeExpr::constant(e->intValue);
      return lf;
    }
    case ExprKind::Ident: {
      LinForm lf;
      if (iterSets_[s].count(e->name)) {
        lf.coeffs[e->name] = SizeExpr::constant(1);
      } else {
        lf.cst = SizeExpr::symbol(e->name);
      }
      return lf;
    }
    case ExprKind::DimOf: {
      auto it = shapes_.find(e->name);
      if (it == shapes_.end()) {
        return std::nullopt; // shape not known yet; retry next round
      }
      if (e->dim < 0 || e->dim >= (int)it->second.size()) {
        throwError(
            ErrorKind::Name,
            "dimension " + std::to_string(e->dim) + " out of range for tensor '" + e->name + "'",
            e->loc);
      }
      LinForm lf;
      lf.cst = it->second[e->dim];
      return lf;
    }
    case ExprKind::Unary: {
      if (e->op != "-") {
        return std::nullopt;
      }
      auto sub = linearize(e->args[0], s);
      if (!sub) {
        return std::nullopt;
      }
      LinForm lf;
      for (const auto& [it, c] : sub->coeffs) {
        lf.coeffs[it] = c.scaled(-1);
      }
      auto neg = tryNeg(sub->cst);
      if (!neg) {
        return std::nullopt;
      }
      lf.cst = *neg;
      return lf;
    }
    case ExprKind::Binary: {
      auto l = linearize(e->args[0], s);
      auto r = linearize(e->args[1], s);
      if (!l || !r) {
        return std::nullopt;
      }
      if (e->op == "+" || e->op == "-") {
        LinForm lf = *l;
        for (const auto& [it, c] : r->coeffs) {
          SizeExpr rc = e->op == "-" ? c.scaled(-1) : c;
          auto fit = lf.coeffs.find(it);
          if (fit == lf.coeffs.end()) {
            lf.coeffs[it] = rc;
          } else {
            auto sum = tryAdd(fit->second, rc);
            if (!sum) {
              return std::nullopt;
            }
            if (sum->isConstant() && sum->constValue() == 0) {
              lf.coeffs.erase(fit);
            } else {
              fit->second = *sum;
            }
          }
        }
        auto rc = e->op == "-" ? tryNeg(r->cst) : std::optional<SizeExpr>(r->cst);
        if (!rc) {
          return std::nullopt;
        }
        auto cst = tryAdd(lf.cst, *rc);
        if (!cst) {
          return std::nullopt;
        }
        lf.cst = *cst;
        return lf;
      }
      if (e->op == "*") {
        // One side must be iterator-free.
        const LinForm* scalar = r->coeffs.empty() ? &*r : (l->coeffs.empty() ? &*l : nullptr);
        const LinForm* vec = r->coeffs.empty() ? &*l : &*r;
        if (!scalar) {
          return std::nullopt;
        }
        LinForm lf;
        for (const auto& [it, c] : vec->coeffs) {
          auto prod = tryMul(c, scalar->cst);
          if (!prod) {
            return std::nullopt;
          }
          if (!(prod->isConstant() && prod->constValue() == 0)) {
            lf.coeffs[it] = *prod;
          }
        }
        auto cst = tryMul(vec->cst, scalar->cst);
        if (!cst) {
          return std::nullopt;
        }
        lf.cst = *cst;
        return lf;
      }
      return std::nullopt;
    }
    default:
      return std::nullopt; // accesses, ternaries, float constants
  }
}

int Inference::signOf(const SizeExpr& c, SourceLoc loc) const {
  if (c.isConstant()) {
    if (c.constValue() > 0) {
      return 1;
    }
    if (c.constValue() < 0) {
      return -1;
    }
  } else {
    auto lb = c.lowerBoundSymbolsGE1();
    if (lb && *lb >= 1) {
      return 1;
    }
    auto ub = c.upperBoundSymbolsGE1();
    if (ub && *ub <= -1) {
      return -1;
    }
  }
  throwError(
      ErrorKind::Ambiguous,
      "cannot decide the sign of subscript coefficient " + c.str(),
      loc);
  return 0;
}

std::optional<IncInterval> Inference::restInterval(
    const LinForm& lf,
    const std::string& skip,
    size_t s) const {
  IncInterval iv{lf.cst, lf.cst};
  for (const auto& [iter, c] : lf.coeffs) {
    if (iter == skip) {
      continue;
    }
    const SymRange& r = resolved_[s].at(iter);
    SizeExpr hiIncl = r.hi - 1;
    int sg = signOf(c, SourceLoc{});
    const SizeExpr& loFactor = sg > 0 ? r.lo : hiIncl;
    const SizeExpr& hiFactor = sg > 0 ? hiIncl : r.lo;
    auto loTerm = tryMul(c, loFactor);
    auto hiTerm = tryMul(c, hiFactor);
    if (!loTerm || !hiTerm) {
      return std::nullopt;
    }
    auto nlo = tryAdd(iv.lo, *loTerm);
    auto nhi = tryAdd(iv.hi, *hiTerm);
    if (!nlo || !nhi) {
      return std::nullopt;
    }
    iv.lo = *nlo;
    iv.hi = *nhi;
  }
  return iv;
}

SymRange Inference::solveSubscript(
    const LinForm& lf,
    const std::string& u,
    const SizeExpr& extent,
    size_t s,
    SourceLoc loc) const {
  auto rest = restInterval(lf, u, s);
  if (!rest) {
    throwError(
        ErrorKind::Ambiguous,
        "subscript is too complex to bound iterator '" + u + "'",
        loc);
  }
  SizeExpr c = lf.coeffs.at(u);
  int sg = signOf(c, loc);
  if (sg < 0) {
    // Rewrite -|c|*u + rest in [0, extent-1] as |c|*u relations.
    auto nc = tryNeg(c);
    TC_CHECK(nc, "negation of affine coefficient cannot fail");
    c = *nc;
  }

  // With positive c: c*u + rest >= 0 for all rest means c*u >= -rest_lo, and
  // c*u + rest <= extent-1 means c*u <= extent-1-rest_hi. For negative c the
  // two sides swap (handled by flipping which rest bound feeds which side).
  const SizeExpr& loSide = sg > 0 ? rest->lo : rest->hi;
  const SizeExpr& hiSide = sg > 0 ? rest->hi : rest->lo;

  SizeExpr lo;
  bool loTrivial = false;
  if (sg > 0) {
    auto lb = loSide.lowerBoundSymbolsGE1();
    loTrivial = lb && *lb >= 0; // clamp to zero wins anyway
  }
  if (loTrivial) {
    lo = SizeExpr::constant(0);
  } else {
    std::optional<SizeExpr> num;
    if (sg > 0) {
      num = tryNeg(loSide); // u >= ceil(-rest_lo / c)
    } else {
      // -c*u + rest <= extent-1  =>  u >= ceil((rest_lo - extent + 1) / c)
      auto negExt = tryNeg(extent);
      if (negExt) {
        auto tmp = tryAdd(loSide, *negExt);
        if (tmp) {
          num = tryAdd(*tmp, SizeExpr::constant(1));
        }
      }
    }
    if (!num) {
      throwError(
          ErrorKind::Ambiguous,
          "subscript is too complex to bound iterator '" + u + "'",
          loc);
    }
    lo = SizeExpr::makeMax(SizeExpr::constant(0), SizeExpr::makeCeilDiv(*num, c));
  }

  std::optional<SizeExpr> hiNum;
  if (sg > 0) {
    // u <= floor((extent-1-rest_hi) / c)
    auto negHi = tryNeg(hiSide);
    if (negHi) {
      auto tmp = tryAdd(extent, SizeExpr::constant(-1));
      if (tmp) {
        hiNum = tryAdd(*tmp, *negHi);
      }
    }
  } else {
    // -c*u + rest >= 0  =>  u <= floor(rest_hi / c)
    hiNum = hiSide;
  }
  if (!hiNum) {
    throwError(
        ErrorKind::Ambiguous,
        "subscript is too complex to bound iterator '" + u + "'",
        loc);
  }
  SizeExpr hi = SizeExpr::makeFloorDiv(*hiNum, c) + 1;
  return {lo, hi};
}

std::optional<SymRange> Inference::whereRange(
    const lang::RangeConstraint& rc,
    size_t s) const {
  auto lo = linearize(rc.lo, s);
  auto hi = linearize(rc.hi, s);
  if (!lo || !hi) {
    return std::nullopt; // e.g. a DimOf whose tensor is not shaped yet
  }
  TC_CHECK(
      lo->coeffs.empty() && hi->coeffs.empty(),
      "where bounds must not reference iterators");
  return SymRange{SizeExpr::makeMax(SizeExpr::constant(0), lo->cst), hi->cst};
}

void Inference::checkNonEmpty(const SymRange& r, const std::string& iter, SourceLoc loc) const {
  if (!r.lo.isAffine()) {
    return; // undecidable symbolically; specialization checks concretely
  }
  auto ext = tryAdd(r.hi, *tryNeg(r.lo));
  if (!ext) {
    return;
  }
  bool empty = false;
  if (ext->isConstant()) {
    empty = ext->constValue() <= 0;
  } else {
    auto ub = ext->upperBoundSymbolsGE1();
    empty = ub && *ub <= 0;
  }
  if (empty) {
    throwError(
        ErrorKind::EmptyRange,
        "inferred range " + r.str() + " of iterator '" + iter + "' is empty",
        loc);
  }
}

InferredRanges Inference::run() {
  // Seed input shapes from declared dimensions; returns that are read but
  // never written behave as opaque inputs with synthesized extents.
  for (const auto& [name, info] : vdef_.tensors) {
    if (info.role == TensorRole::Input) {
      std::vector<SizeExpr> dims;
      for (const auto& d : info.declaredDims) {
        bool numeric = !d.empty() && std::all_of(d.begin(), d.end(), [](unsigned char ch) {
                         return std::isdigit(ch);
                       });
        dims.push_back(numeric ? SizeExpr::constant(std::stoll(d)) : SizeExpr::symbol(d));
      }
      shapes_[name] = std::move(dims);
    } else if (info.role == TensorRole::Output && info.read && !info.written) {
      std::vector<SizeExpr> dims;
      for (int d = 0; d < info.rank; ++d) {
        std::string sym = name + "__" + std::to_string(d);
        synthesized_.insert(sym);
        dims.push_back(SizeExpr::symbol(sym));
      }
      shapes_[name] = std::move(dims);
    }
  }

  size_t n = vdef_.def.stmts.size();
  while (true) {
    std::vector<std::map<std::string, SymRange>> proposals(n);
    auto propose = [&](size_t s, const std::string& u, const SymRange& r) {
      auto [it, fresh] = proposals[s].emplace(u, r);
      if (!fresh) {
        it->second = intersect(it->second, r);
      }
    };

    for (size_t s = 0; s < n; ++s) {
      const auto& stmt = vdef_.def.stmts[s];
      for (const auto& rc : stmt.where) {
        if (resolved_[s].count(rc.var)) {
          continue;
        }
        if (auto r = whereRange(rc, s)) {
          propose(s, rc.var, *r);
        }
      }
      for (const auto& acc : accesses_[s]) {
        auto shIt = shapes_.find(acc.tensor);
        if (shIt == shapes_.end()) {
          continue;
        }
        const auto& dims = shIt->second;
        for (size_t d = 0; d < acc.subs->size() && d < dims.size(); ++d) {
          auto lf = linearize((*acc.subs)[d], s);
          if (!lf) {
            continue; // data-dependent or non-affine subscript
          }
          std::string unresolved;
          int count = 0;
          for (const auto& [iter, c] : lf->coeffs) {
            (void)c;
            if (!resolved_[s].count(iter)) {
              unresolved = iter;
              ++count;
            }
          }
          if (count != 1) {
            continue;
          }
          propose(
              s,
              unresolved,
              solveSubscript(*lf, unresolved, dims[d], s, (*acc.subs)[d]->loc));
        }
      }
    }

    bool progress = false;
    for (size_t s = 0; s < n; ++s) {
      for (const auto& [iter, r] : proposals[s]) {
        checkNonEmpty(r, iter, vdef_.def.stmts[s].loc);
        resolved_[s].emplace(iter, r);
        progress = true;
      }
    }

    // A written tensor's shape is fixed by the first writer whose whole
    // left-hand side resolved; same-round writers must agree.
    for (const auto& [tensor, ws] : writers_) {
      if (shapes_.count(tensor)) {
        continue;
      }
      const std::vector<SizeExpr>* settled = nullptr;
      std::vector<SizeExpr> candidate;
      for (size_t w : ws) {
        const auto& stmt = vdef_.def.stmts[w];
        bool complete = true;
        std::vector<SizeExpr> dims;
        for (const auto& idx : stmt.lhsIndices) {
          auto it = resolved_[w].find(idx->name);
          if (it == resolved_[w].end()) {
            complete = false;
            break;
          }
          dims.push_back(it->second.hi);
        }
        if (!complete) {
          continue;
        }
        if (!settled) {
          candidate = std::move(dims);
          settled = &candidate;
        } else if (!(candidate == dims)) {
          throwError(
              ErrorKind::Ambiguous,
              "writers of tensor '" + tensor + "' disagree on its shape",
              stmt.loc);
        }
      }
      if (settled) {
        shapes_[tensor] = candidate;
        progress = true;
      }
    }

    if (!progress) {
      break;
    }
  }

  for (size_t s = 0; s < n; ++s) {
    for (const auto& iter : vdef_.stmtInfo[s].iterators) {
      if (!resolved_[s].count(iter)) {
        throwError(
            ErrorKind::UnderConstrained,
            "cannot infer the range of iterator '" + iter + "'",
            vdef_.def.stmts[s].loc);
      }
    }
  }

  InferredRanges result;
  result.shapes = std::move(shapes_);
  result.sizeSymbols = vdef_.sizeSymbols;
  result.sizeSymbols.insert(synthesized_.begin(), synthesized_.end());
  for (size_t s = 0; s < n; ++s) {
    StmtRanges sr;
    sr.iterators = vdef_.stmtInfo[s].iterators;
    sr.ranges = std::move(resolved_[s]);
    result.stmts.push_back(std::move(sr));
  }
  return result;
}

} // namespace

InferredRanges inferRanges(const lang::ValidatedDef& vdef) {
  return Inference(vdef).run();
}

} // namespace sem
} // namespace tc
