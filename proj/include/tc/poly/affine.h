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
#include <string>
#include <vector>

namespace tc {
namespace poly {

// Affine expression with concrete integer coefficients over named
// variables. Specialization happens before any polyhedral reasoning, so
// symbolic sizes never reach this layer.
struct AffineExpr {
  std::map<std::string, int64_t> coeffs;
  int64_t cst = 0;

  static AffineExpr constant(int64_t v);
  static AffineExpr var(const std::string& name);

  AffineExpr operator+(const AffineExpr& o) const;
  AffineExpr operator-(const AffineExpr& o) const;
  AffineExpr scaled(int64_t f) const;
  // Renames every variable to prefix + name; used to juxtapose two
  // statement instances in one system.
  AffineExpr withPrefix(const std::string& prefix) const;

  int64_t eval(const std::map<std::string, int64_t>& point) const;
  std::string str() const;
};

/*
 * Conjunction of affine equalities and inequalities over box-bounded
 * integer variables. Emptiness is decided exactly: interval propagation
 * prunes, rational Fourier-Motzkin elimination proves definite emptiness,
 * and a backtracking integer search over the (finite) box settles the
 * remaining cases with a witness.
 */
class LinearSystem {
 public:
  // Declares a variable with inclusive bounds. Every variable referenced by
  // a constraint must be declared.
  void declare(const std::string& name, int64_t lo, int64_t hi);
  void addEq(const AffineExpr& e); // e == 0
  void addGe(const AffineExpr& e); // e >= 0

  bool isEmpty() const;
  // A satisfying integer point, if one exists.
  std::optional<std::map<std::string, int64_t>> findPoint() const;

  std::string str() const;

 private:
  struct Constraint {
    AffineExpr e;
    bool eq = false;
  };

  std::map<std::string, std::pair<int64_t, int64_t>> bounds_;
  std::vector<Constraint> cons_;
};

} // namespace poly
} // namespace tc
