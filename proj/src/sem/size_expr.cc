/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sem/size_expr.h"

#include <sstream>

#include "tc/support/diagnostics.h"

namespace tc {
namespace sem {

void SizeExpr::normalizeAffine() {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (it->second == 0) {
      it = coeffs_.erase(it);
    } else {
      ++it;
    }
  }
}

SizeExpr SizeExpr::constant(int64_t v) {
  SizeExpr e;
  e.const_ = v;
  return e;
}

SizeExpr SizeExpr::symbol(const std::string& name) {
  SizeExpr e;
  e.coeffs_[name] = 1;
  return e;
}

bool SizeExpr::isConstant() const {
  return kind_ == Kind::Affine && coeffs_.empty();
}

int64_t SizeExpr::constValue() const {
  TC_CHECK(isConstant(), "constValue() on non-constant " << str());
  return const_;
}

SizeExpr SizeExpr::operator+(const SizeExpr& other) const {
  if (kind_ == Kind::Affine && other.kind_ == Kind::Affine) {
    SizeExpr r = *this;
    for (const auto& [s, c] : other.coeffs_) {
      r.coeffs_[s] += c;
    }
    r.const_ += other.const_;
    r.normalizeAffine();
    return r;
  }
  // Push an affine addend inside min/max; fold it into a floordiv using
  // floor(a/d) + e == floor((a + e*d)/d) whenever e*d stays affine.
  if (kind_ != Kind::Affine && other.kind_ == Kind::Affine) {
    if (other.isConstant() && other.const_ == 0) {
      return *this;
    }
    if (kind_ == Kind::Min || kind_ == Kind::Max) {
      SizeExpr r = *this;
      for (auto& a : r.args_) {
        a = a + other;
      }
      return r;
    }
    if (kind_ == Kind::FloorDiv) {
      const SizeExpr& num = args_[0];
      const SizeExpr& den = args_[1];
      if (other.isConstant() && den.kind_ == Kind::Affine) {
        return makeFloorDiv(num + den.scaled(other.const_), den);
      }
      if (den.isConstant()) {
        return makeFloorDiv(num + other.scaled(den.constValue()), den);
      }
    }
  }
  if (kind_ == Kind::Affine) {
    return other + *this;
  }
  TC_CHECK(false, "unsupported symbolic addition: " << str() << " + " << other.str());
  return {};
}

SizeExpr SizeExpr::operator-(const SizeExpr& other) const {
  TC_CHECK(other.kind_ == Kind::Affine, "cannot subtract non-affine " << other.str());
  return *this + other.scaled(-1);
}

SizeExpr SizeExpr::operator+(int64_t v) const {
  return *this + constant(v);
}

SizeExpr SizeExpr::operator-(int64_t v) const {
  return *this + constant(-v);
}

SizeExpr SizeExpr::scaled(int64_t factor) const {
  if (kind_ == Kind::Affine) {
    SizeExpr r = *this;
    for (auto& [s, c] : r.coeffs_) {
      c *= factor;
    }
    r.const_ *= factor;
    r.normalizeAffine();
    return r;
  }
  TC_CHECK(factor >= 0, "cannot negate non-affine " << str());
  if (factor == 0) {
    return constant(0);
  }
  if (factor == 1) {
    return *this;
  }
  // Positive factors distribute over min/max (monotone).
  if (kind_ == Kind::Min || kind_ == Kind::Max) {
    SizeExpr r = *this;
    for (auto& a : r.args_) {
      a = a.scaled(factor);
    }
    return r;
  }
  TC_CHECK(false, "unsupported scaling of " << str());
  return {};
}

std::optional<int64_t> SizeExpr::differenceConstant(const SizeExpr& other) const {
  if (kind_ != Kind::Affine || other.kind_ != Kind::Affine) {
    if (*this == other) {
      return 0;
    }
    return std::nullopt;
  }
  SizeExpr d = *this - other;
  if (d.isConstant()) {
    return d.const_;
  }
  return std::nullopt;
}

std::optional<int64_t> SizeExpr::lowerBoundSymbolsGE1() const {
  if (kind_ == Kind::Min || kind_ == Kind::Max) {
    std::optional<int64_t> acc;
    for (const auto& a : args_) {
      auto b = a.lowerBoundSymbolsGE1();
      if (!b) {
        if (kind_ == Kind::Min) {
          return std::nullopt;
        }
        continue;
      }
      if (!acc) {
        acc = b;
      } else {
        acc = kind_ == Kind::Min ? std::min(*acc, *b) : std::max(*acc, *b);
      }
    }
    return acc;
  }
  if (kind_ == Kind::FloorDiv) {
    // floor(num/den) >= 0 when num >= 0 (den > 0 by contract).
    auto nb = args_[0].lowerBoundSymbolsGE1();
    if (nb && *nb >= 0) {
      return 0;
    }
    return std::nullopt;
  }
  int64_t acc = const_;
  for (const auto& [s, c] : coeffs_) {
    (void)s;
    if (c > 0) {
      acc += c; // symbol at its minimum 1
    } else {
      return std::nullopt; // negative coefficient: unbounded below
    }
  }
  return acc;
}

std::optional<int64_t> SizeExpr::upperBoundSymbolsGE1() const {
  if (kind_ != Kind::Affine) {
    return std::nullopt;
  }
  int64_t acc = const_;
  for (const auto& [s, c] : coeffs_) {
    (void)s;
    if (c < 0) {
      acc += c;
    } else {
      return std::nullopt;
    }
  }
  return acc;
}

SizeExpr SizeExpr::makeMin(SizeExpr a, SizeExpr b) {
  if (auto d = a.differenceConstant(b)) {
    return *d <= 0 ? a : b;
  }
  // Under symbols >= 1, drop the branch that always dominates.
  auto la = a.lowerBoundSymbolsGE1();
  auto ub = b.upperBoundSymbolsGE1();
  if (la && ub && *ub <= *la) {
    return b;
  }
  auto lb = b.lowerBoundSymbolsGE1();
  auto ua = a.upperBoundSymbolsGE1();
  if (lb && ua && *ua <= *lb) {
    return a;
  }
  SizeExpr e;
  e.kind_ = Kind::Min;
  e.args_ = {std::move(a), std::move(b)};
  return e;
}

SizeExpr SizeExpr::makeMax(SizeExpr a, SizeExpr b) {
  if (auto d = a.differenceConstant(b)) {
    return *d >= 0 ? a : b;
  }
  auto la = a.lowerBoundSymbolsGE1();
  auto ub = b.upperBoundSymbolsGE1();
  if (la && ub && *ub <= *la) {
    return a;
  }
  auto lb = b.lowerBoundSymbolsGE1();
  auto ua = a.upperBoundSymbolsGE1();
  if (lb && ua && *ua <= *lb) {
    return b;
  }
  SizeExpr e;
  e.kind_ = Kind::Max;
  e.args_ = {std::move(a), std::move(b)};
  return e;
}

SizeExpr SizeExpr::makeFloorDiv(SizeExpr num, SizeExpr den) {
  if (den.isConstant()) {
    int64_t d = den.constValue();
    TC_CHECK(d > 0, "floordiv by non-positive constant " << d);
    if (d == 1) {
      return num;
    }
    if (num.isConstant()) {
      int64_t n = num.constValue();
      int64_t q = n / d;
      if ((n % d != 0) && (n < 0)) {
        --q;
      }
      return constant(q);
    }
    // Exact division when every affine coefficient is divisible.
    if (num.kind_ == Kind::Affine) {
      bool exact = num.const_ % d == 0;
      for (const auto& [s, c] : num.coeffs_) {
        (void)s;
        exact = exact && (c % d == 0);
      }
      if (exact) {
        SizeExpr r = num;
        for (auto& [s, c] : r.coeffs_) {
          (void)s;
          c /= d;
        }
        r.const_ /= d;
        return r;
      }
    }
  }
  SizeExpr e;
  e.kind_ = Kind::FloorDiv;
  e.args_ = {std::move(num), std::move(den)};
  return e;
}

SizeExpr SizeExpr::makeCeilDiv(SizeExpr num, SizeExpr den) {
  // ceil(n/d) = floor((n + d - 1)/d) for d > 0.
  SizeExpr adjusted = num + den - 1;
  return makeFloorDiv(std::move(adjusted), std::move(den));
}

int64_t SizeExpr::evaluate(const std::map<std::string, int64_t>& bindings) const {
  switch (kind_) {
    case Kind::Affine: {
      int64_t acc = const_;
      for (const auto& [s, c] : coeffs_) {
        auto it = bindings.find(s);
        if (it == bindings.end()) {
          throwError(ErrorKind::Name, "unbound size symbol '" + s + "'");
        }
        acc += c * it->second;
      }
      return acc;
    }
    case Kind::Min: {
      int64_t acc = args_[0].evaluate(bindings);
      for (size_t i = 1; i < args_.size(); ++i) {
        acc = std::min(acc, args_[i].evaluate(bindings));
      }
      return acc;
    }
    case Kind::Max: {
      int64_t acc = args_[0].evaluate(bindings);
      for (size_t i = 1; i < args_.size(); ++i) {
        acc = std::max(acc, args_[i].evaluate(bindings));
      }
      return acc;
    }
    case Kind::FloorDiv: {
      int64_t n = args_[0].evaluate(bindings);
      int64_t d = args_[1].evaluate(bindings);
      if (d <= 0) {
        throwError(ErrorKind::EmptyRange, "division by non-positive size " + args_[1].str());
      }
      int64_t q = n / d;
      if (n % d != 0 && n < 0) {
        --q;
      }
      return q;
    }
  }
  return 0;
}

void SizeExpr::collectSymbols(std::set<std::string>& out) const {
  for (const auto& [s, c] : coeffs_) {
    (void)c;
    out.insert(s);
  }
  for (const auto& a : args_) {
    a.collectSymbols(out);
  }
}

std::string SizeExpr::str() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Affine: {
      if (coeffs_.empty()) {
        os << const_;
        break;
      }
      // Positive terms first so "W - KW + 1" prints with a positive lead
      // term whenever one exists.
      std::vector<std::pair<std::string, int64_t>> terms;
      for (const auto& [s, c] : coeffs_) {
        if (c > 0) {
          terms.emplace_back(s, c);
        }
      }
      for (const auto& [s, c] : coeffs_) {
        if (c < 0) {
          terms.emplace_back(s, c);
        }
      }
      bool first = true;
      for (const auto& [s, c] : terms) {
        if (first) {
          if (c == -1) {
            os << "-";
          } else if (c != 1) {
            os << c << "*";
          }
          os << s;
          first = false;
          continue;
        }
        os << (c > 0 ? " + " : " - ");
        int64_t a = c > 0 ? c : -c;
        if (a != 1) {
          os << a << "*";
        }
        os << s;
      }
      if (const_ > 0) {
        os << " + " << const_;
      } else if (const_ < 0) {
        os << " - " << -const_;
      }
      break;
    }
    case Kind::Min:
    case Kind::Max:
      os << (kind_ == Kind::Min ? "min(" : "max(");
      for (size_t i = 0; i < args_.size(); ++i) {
        os << (i ? ", " : "") << args_[i].str();
      }
      os << ")";
      break;
    case Kind::FloorDiv:
      os << "floord(" << args_[0].str() << ", " << args_[1].str() << ")";
      break;
  }
  return os.str();
}

bool SizeExpr::operator==(const SizeExpr& other) const {
  if (kind_ != other.kind_) {
    return false;
  }
  if (kind_ == Kind::Affine) {
    return coeffs_ == other.coeffs_ && const_ == other.const_;
  }
  if (args_.size() != other.args_.size()) {
    return false;
  }
  for (size_t i = 0; i < args_.size(); ++i) {
    if (!(args_[i] == other.args_[i])) {
      return false;
    }
  }
  return true;
}

std::string SymRange::str() const {
  return "[" + lo.str() + ", " + hi.str() + ")";
}

SymRange intersect(const SymRange& a, const SymRange& b) {
  return {SizeExpr::makeMax(a.lo, b.lo), SizeExpr::makeMin(a.hi, b.hi)};
}

} // namespace sem
} // namespace tc
