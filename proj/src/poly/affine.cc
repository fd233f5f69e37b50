/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/poly/affine.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "tc/support/diagnostics.h"

namespace tc {
namespace poly {

AffineExpr AffineExpr::constant(int64_t v) {
  AffineExpr e;
  e.cst = v;
  return e;
}

AffineExpr AffineExpr::var(const std::string& name) {
  AffineExpr e;
  e.coeffs[name] = 1;
  return e;
}

AffineExpr AffineExpr::operator+(const AffineExpr& o) const {
  AffineExpr r = *this;
  for (const auto& [v, c] : o.coeffs) {
    r.coeffs[v] += c;
    if (r.coeffs[v] == 0) {
      r.coeffs.erase(v);
    }
  }
  r.cst += o.cst;
  return r;
}

AffineExpr AffineExpr::operator-(const AffineExpr& o) const {
  return *this + o.scaled(-1);
}

AffineExpr AffineExpr::scaled(int64_t f) const {
  AffineExpr r;
  if (f == 0) {
    return r;
  }
  for (const auto& [v, c] : coeffs) {
    r.coeffs[v] = c * f;
  }
  r.cst = cst * f;
  return r;
}

AffineExpr AffineExpr::withPrefix(const std::string& prefix) const {
  AffineExpr r;
  for (const auto& [v, c] : coeffs) {
    r.coeffs[prefix + v] = c;
  }
  r.cst = cst;
  return r;
}

int64_t AffineExpr::eval(const std::map<std::string, int64_t>& point) const {
  int64_t acc = cst;
  for (const auto& [v, c] : coeffs) {
    auto it = point.find(v);
    TC_CHECK(it != point.end(), "unbound variable '" << v << "'");
    acc += c * it->second;
  }
  return acc;
}

std::string AffineExpr::str() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : coeffs) {
    if (!first) {
      os << (c >= 0 ? " + " : " - ");
    } else if (c < 0) {
      os << "-";
    }
    int64_t a = c < 0 ? -c : c;
    if (a != 1) {
      os << a << "*";
    }
    os << v;
    first = false;
  }
  if (first) {
    os << cst;
  } else if (cst > 0) {
    os << " + " << cst;
  } else if (cst < 0) {
    os << " - " << -cst;
  }
  return os.str();
}

void LinearSystem::declare(const std::string& name, int64_t lo, int64_t hi) {
  bounds_[name] = {lo, hi};
}

void LinearSystem::addEq(const AffineExpr& e) {
  for (const auto& [v, c] : e.coeffs) {
    (void)c;
    TC_CHECK(bounds_.count(v), "constraint references undeclared variable '" << v << "'");
  }
  cons_.push_back({e, true});
}

void LinearSystem::addGe(const AffineExpr& e) {
  for (const auto& [v, c] : e.coeffs) {
    (void)c;
    TC_CHECK(bounds_.count(v), "constraint references undeclared variable '" << v << "'");
  }
  cons_.push_back({e, false});
}

namespace {

using Bounds = std::map<std::string, std::pair<int64_t, int64_t>>;

struct Row {
  std::map<std::string, int64_t> coeffs;
  int64_t cst = 0; // row means: sum(coeffs*var) + cst >= 0
};

// Tightens `bounds` using every inequality; returns false on a proven
// empty interval. Equalities arrive as row pairs.
bool propagate(const std::vector<Row>& rows, Bounds& bounds) {
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 256) {
    changed = false;
    for (const auto& row : rows) {
      for (const auto& [v, c] : row.coeffs) {
        // c*v >= -(rest_max) where rest_max maximizes the other terms.
        int64_t restMax = row.cst;
        bool unbounded = false;
        for (const auto& [w, d] : row.coeffs) {
          if (w == v) {
            continue;
          }
          const auto& b = bounds.at(w);
          restMax += d > 0 ? d * b.second : d * b.first;
        }
        if (unbounded) {
          continue;
        }
        auto& vb = bounds.at(v);
        if (c > 0) {
          // v >= ceil(-restMax / c)
          int64_t num = -restMax;
          int64_t lo = num / c + ((num % c != 0 && num > 0) ? 1 : 0);
          if (lo > vb.first) {
            vb.first = lo;
            changed = true;
          }
        } else {
          // v <= floor(restMax / |c|)
          int64_t a = -c;
          int64_t hi = restMax / a - ((restMax % a != 0 && restMax < 0) ? 1 : 0);
          if (hi < vb.second) {
            vb.second = hi;
            changed = true;
          }
        }
        if (vb.first > vb.second) {
          return false;
        }
      }
    }
  }
  return true;
}

enum class FmResult { Empty, Inconclusive };

int64_t gcdAll(const Row& r) {
  int64_t g = r.cst < 0 ? -r.cst : r.cst;
  for (const auto& [v, c] : r.coeffs) {
    (void)v;
    g = std::gcd(g, c < 0 ? -c : c);
  }
  return g == 0 ? 1 : g;
}

/*
 * Rational Fourier-Motzkin elimination. A negative constant row after all
 * variables are eliminated proves the system empty over the rationals and
 * therefore over the integers. Rational feasibility proves nothing for
 * integers, so that outcome (and any overflow/blowup bailout) reports
 * Inconclusive.
 */
FmResult fourierMotzkin(std::vector<Row> rows, const Bounds& bounds) {
  constexpr size_t kRowCap = 4096;
  for (const auto& [v, b] : bounds) {
    Row lo; // v - lo >= 0
    lo.coeffs[v] = 1;
    lo.cst = -b.first;
    Row hi; // hi - v >= 0
    hi.coeffs[v] = -1;
    hi.cst = b.second;
    rows.push_back(lo);
    rows.push_back(hi);
  }
  for (const auto& [v, b] : bounds) {
    (void)b;
    std::vector<Row> lower, upper, rest;
    for (auto& r : rows) {
      auto it = r.coeffs.find(v);
      if (it == r.coeffs.end() || it->second == 0) {
        rest.push_back(std::move(r));
      } else if (it->second > 0) {
        lower.push_back(std::move(r));
      } else {
        upper.push_back(std::move(r));
      }
    }
    if (lower.size() * upper.size() + rest.size() > kRowCap) {
      return FmResult::Inconclusive;
    }
    for (const auto& l : lower) {
      for (const auto& u : upper) {
        int64_t cl = l.coeffs.at(v); // > 0
        int64_t cu = -u.coeffs.at(v); // > 0
        Row combined;
        bool overflow = false;
        auto addTerm = [&](const std::string& w, __int128 val) {
          if (w == v) {
            return;
          }
          __int128 acc = (__int128)combined.coeffs[w] + val;
          if (acc > INT64_MAX / 2 || acc < INT64_MIN / 2) {
            overflow = true;
            return;
          }
          combined.coeffs[w] = (int64_t)acc;
        };
        for (const auto& [w, c] : l.coeffs) {
          addTerm(w, (__int128)c * cu);
        }
        for (const auto& [w, c] : u.coeffs) {
          addTerm(w, (__int128)c * cl);
        }
        __int128 cc = (__int128)l.cst * cu + (__int128)u.cst * cl;
        if (overflow || cc > INT64_MAX / 2 || cc < INT64_MIN / 2) {
          return FmResult::Inconclusive;
        }
        combined.cst = (int64_t)cc;
        for (auto it = combined.coeffs.begin(); it != combined.coeffs.end();) {
          it = it->second == 0 ? combined.coeffs.erase(it) : std::next(it);
        }
        int64_t g = gcdAll(combined);
        for (auto& [w, c] : combined.coeffs) {
          (void)w;
          c /= g;
        }
        combined.cst /= g;
        if (combined.coeffs.empty()) {
          if (combined.cst < 0) {
            return FmResult::Empty;
          }
          continue;
        }
        rest.push_back(std::move(combined));
      }
    }
    rows = std::move(rest);
  }
  for (const auto& r : rows) {
    if (r.coeffs.empty() && r.cst < 0) {
      return FmResult::Empty;
    }
  }
  return FmResult::Inconclusive;
}

// Complete backtracking search with propagation at every assignment; the
// box bounds make it terminate.
std::optional<std::map<std::string, int64_t>> search(
    const std::vector<Row>& rows,
    Bounds bounds) {
  if (!propagate(rows, bounds)) {
    return std::nullopt;
  }
  // Pick the tightest unfixed variable.
  const std::string* pick = nullptr;
  int64_t width = 0;
  for (const auto& [v, b] : bounds) {
    int64_t w = b.second - b.first;
    if (w > 0 && (!pick || w < width)) {
      pick = &v;
      width = w;
    }
  }
  if (!pick) {
    // All fixed; propagate() above already validated every constraint's
    // interval, but equalities need an exact check.
    std::map<std::string, int64_t> point;
    for (const auto& [v, b] : bounds) {
      point[v] = b.first;
    }
    for (const auto& row : rows) {
      int64_t acc = row.cst;
      for (const auto& [v, c] : row.coeffs) {
        acc += c * point.at(v);
      }
      if (acc < 0) {
        return std::nullopt;
      }
    }
    return point;
  }
  std::string v = *pick;
  auto original = bounds.at(v);
  for (int64_t val = original.first; val <= original.second; ++val) {
    Bounds next = bounds;
    next[v] = {val, val};
    if (auto point = search(rows, std::move(next))) {
      return point;
    }
  }
  return std::nullopt;
}

std::vector<Row> toRows(const std::vector<std::pair<AffineExpr, bool>>& cons) {
  std::vector<Row> rows;
  for (const auto& [e, eq] : cons) {
    Row r;
    r.coeffs = e.coeffs;
    r.cst = e.cst;
    rows.push_back(r);
    if (eq) {
      Row neg;
      for (const auto& [v, c] : e.coeffs) {
        neg.coeffs[v] = -c;
      }
      neg.cst = -e.cst;
      rows.push_back(std::move(neg));
    }
  }
  return rows;
}

} // namespace

bool LinearSystem::isEmpty() const {
  std::vector<std::pair<AffineExpr, bool>> cons;
  for (const auto& c : cons_) {
    cons.emplace_back(c.e, c.eq);
  }
  auto rows = toRows(cons);
  Bounds bounds = bounds_;
  if (!propagate(rows, bounds)) {
    return true;
  }
  if (fourierMotzkin(rows, bounds) == FmResult::Empty) {
    return true;
  }
  return !search(rows, bounds).has_value();
}

std::optional<std::map<std::string, int64_t>> LinearSystem::findPoint() const {
  std::vector<std::pair<AffineExpr, bool>> cons;
  for (const auto& c : cons_) {
    cons.emplace_back(c.e, c.eq);
  }
  auto rows = toRows(cons);
  return search(rows, bounds_);
}

std::string LinearSystem::str() const {
  std::ostringstream os;
  for (const auto& [v, b] : bounds_) {
    os << b.first << " <= " << v << " <= " << b.second << "\n";
  }
  for (const auto& c : cons_) {
    os << c.e.str() << (c.eq ? " == 0" : " >= 0") << "\n";
  }
  return os.str();
}

} // namespace poly
} // namespace tc
