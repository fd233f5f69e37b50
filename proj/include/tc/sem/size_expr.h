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
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tc {
namespace sem {

// Symbolic integer bound: an affine combination of size symbols, optionally
// wrapped in min/max/floordiv nodes. Size symbols (tensor dimension names
// and int scalar parameters) are assumed to be >= 1; several folds below
// rely on that and the assumption is checked when symbols are bound.
class SizeExpr {
 public:
  enum class Kind { Affine, Min, Max, FloorDiv };

  SizeExpr() = default; // affine zero

  static SizeExpr constant(int64_t v);
  static SizeExpr symbol(const std::string& name);
  static SizeExpr makeMin(SizeExpr a, SizeExpr b);
  static SizeExpr makeMax(SizeExpr a, SizeExpr b);
  // floor(num/den); den must be positive wherever it is evaluated.
  static SizeExpr makeFloorDiv(SizeExpr num, SizeExpr den);
  // ceil(num/den) for positive den, lowered to floordiv.
  static SizeExpr makeCeilDiv(SizeExpr num, SizeExpr den);

  Kind kind() const {
    return kind_;
  }
  const std::vector<SizeExpr>& args() const {
    return args_;
  }
  bool isAffine() const {
    return kind_ == Kind::Affine;
  }
  bool isConstant() const;
  int64_t constValue() const; // requires isConstant()

  SizeExpr operator+(const SizeExpr& other) const;
  SizeExpr operator-(const SizeExpr& other) const;
  SizeExpr operator+(int64_t v) const;
  SizeExpr operator-(int64_t v) const;
  // Multiply by a constant. Non-affine expressions admit only non-negative
  // factors (positive factors distribute over min/max).
  SizeExpr scaled(int64_t factor) const;

  // a - b when the difference folds to a constant (both affine with equal
  // symbolic parts).
  std::optional<int64_t> differenceConstant(const SizeExpr& other) const;

  // Bounds of an affine expression under the "all symbols >= 1" assumption;
  // nullopt when unbounded in that direction or not affine.
  std::optional<int64_t> lowerBoundSymbolsGE1() const;
  std::optional<int64_t> upperBoundSymbolsGE1() const;

  int64_t evaluate(const std::map<std::string, int64_t>& bindings) const;
  void collectSymbols(std::set<std::string>& out) const;

  std::string str() const;
  bool operator==(const SizeExpr& other) const;

 private:
  Kind kind_ = Kind::Affine;
  std::map<std::string, int64_t> coeffs_;
  int64_t const_ = 0;
  std::vector<SizeExpr> args_; // Min/Max operands or {num, den}

  void normalizeAffine();
};

// Half-open interval [lo, hi).
struct SymRange {
  SizeExpr lo;
  SizeExpr hi;

  std::string str() const;
};

// Intersection [max(lo1,lo2), min(hi1,hi2)), folding where the comparison
// is symbolically decidable.
SymRange intersect(const SymRange& a, const SymRange& b);

} // namespace sem
} // namespace tc
