/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/sched/tree.h"

#include <algorithm>
#include <functional>
#include <sstream>

#include "tc/support/diagnostics.h"

namespace tc {
namespace sched {

namespace {

int64_t floorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

int64_t modPos(int64_t a, int64_t b) {
  int64_t r = a % b;
  if (r < 0) {
    r += b;
  }
  return r;
}

/* Prints a per-statement function map; collapses to a single string when
 * every statement agrees on the printed form. */
std::string fnGroupStr(
    const std::map<size_t, poly::AffineExpr>& fn,
    const std::function<std::string(const poly::AffineExpr&)>& fmt,
    const std::vector<std::string>* stmtNames) {
  TC_CHECK(!fn.empty(), "band member with no statements");
  bool allSame = true;
  std::string first = fmt(fn.begin()->second);
  for (const auto& kv : fn) {
    if (fmt(kv.second) != first) {
      allSame = false;
      break;
    }
  }
  if (allSame) {
    return first;
  }
  std::ostringstream os;
  bool sep = false;
  for (const auto& kv : fn) {
    if (sep) {
      os << ", ";
    }
    sep = true;
    if (stmtNames && kv.first < stmtNames->size()) {
      os << (*stmtNames)[kv.first];
    } else {
      os << "S" << kv.first;
    }
    os << ": " << fmt(kv.second);
  }
  return os.str();
}

} // namespace

int64_t BandMember::apply(int64_t base) const {
  switch (mode) {
    case MemberMode::Plain:
      return base;
    case MemberMode::TileFloor:
      return tile * floorDiv(base, tile);
    case MemberMode::Mod:
      return modPos(base, tile);
  }
  return base;
}

std::string BandMember::str(const std::string& baseStr) const {
  std::ostringstream os;
  switch (mode) {
    case MemberMode::Plain:
      os << baseStr;
      break;
    case MemberMode::TileFloor:
      os << tile << " * floor(" << baseStr << " / " << tile << ")";
      break;
    case MemberMode::Mod:
      os << baseStr << " mod " << tile;
      break;
  }
  return os.str();
}

int64_t MapCond::value(int64_t baseVal) const {
  switch (mode) {
    case MemberMode::Plain:
      return baseVal;
    case MemberMode::TileFloor:
      return tile * floorDiv(baseVal, tile);
    case MemberMode::Mod:
      return modPos(baseVal, tile);
  }
  return baseVal;
}

std::vector<int64_t> PromotedGroup::bufferShape() const {
  std::vector<int64_t> shape;
  for (const auto& dimGroup : dims) {
    for (const auto& d : dimGroup) {
      if (d.threadDim >= 0) {
        shape.push_back((d.extent + d.threadExtent - 1) / d.threadExtent);
      } else {
        shape.push_back(d.extent);
      }
    }
  }
  return shape;
}

NodePtr makeNode(NodeKind kind) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  return n;
}

NodePtr cloneTree(const NodePtr& node) {
  TC_CHECK(node != nullptr, "cloning a null schedule node");
  auto copy = std::make_shared<Node>(*node);
  copy->children.clear();
  for (const auto& child : node->children) {
    copy->children.push_back(cloneTree(child));
  }
  return copy;
}

std::set<size_t> subtreeStmts(const NodePtr& node, const std::set<size_t>& inherited) {
  std::set<size_t> here = inherited;
  if (node->kind == NodeKind::Filter && !node->stmts.empty()) {
    std::set<size_t> filtered;
    for (size_t s : node->stmts) {
      if (here.count(s)) {
        filtered.insert(s);
      }
    }
    here = filtered;
  }
  if (node->children.empty()) {
    return here;
  }
  std::set<size_t> result;
  for (const auto& child : node->children) {
    auto sub = subtreeStmts(child, here);
    result.insert(sub.begin(), sub.end());
  }
  return result;
}

namespace {
void labelLoopsImpl(
    const NodePtr& node,
    std::map<const BandMember*, std::string>* names,
    size_t& counter) {
  if (node->kind == NodeKind::Band) {
    for (const auto& m : node->members) {
      if (names) {
        (*names)[&m] = "@c" + std::to_string(counter);
      }
      ++counter;
    }
  }
  for (const auto& child : node->children) {
    labelLoopsImpl(child, names, counter);
  }
}
} // namespace

size_t labelLoops(const NodePtr& root, std::map<const BandMember*, std::string>* names) {
  size_t counter = 0;
  labelLoopsImpl(root, names, counter);
  return counter;
}

void simplify(NodePtr& node, const std::set<size_t>& inherited) {
  std::set<size_t> here = inherited;
  if (node->kind == NodeKind::Filter && !node->stmts.empty()) {
    std::set<size_t> filtered;
    for (size_t s : node->stmts) {
      if (here.count(s)) {
        filtered.insert(s);
      }
    }
    here = filtered;
  }
  for (auto& child : node->children) {
    simplify(child, here);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    if ((node->kind == NodeKind::Sequence || node->kind == NodeKind::Set) &&
        node->children.size() == 1) {
      node = node->children[0];
      changed = true;
      continue;
    }
    if (node->kind == NodeKind::Filter && node->conds.empty() &&
        here == inherited && node->children.size() == 1) {
      // The filter passes everything that reaches it.
      node = node->children[0];
      changed = true;
      continue;
    }
    if (node->kind == NodeKind::Band && node->members.empty() &&
        node->children.size() == 1) {
      node = node->children[0];
      changed = true;
      continue;
    }
  }
}

namespace {

std::string stmtName(size_t idx, const std::vector<std::string>* stmtNames) {
  if (stmtNames && idx < stmtNames->size()) {
    return (*stmtNames)[idx];
  }
  return "S" + std::to_string(idx);
}

std::string condStr(const MapCond& c, const std::vector<std::string>* stmtNames) {
  static const char* blockNames[3] = {"bx", "by", "bz"};
  static const char* threadNames[3] = {"tx", "ty", "tz"};
  std::ostringstream os;
  os << (c.block ? blockNames[c.dim] : threadNames[c.dim]) << " = ";
  if (c.padZero) {
    os << "0";
    return os.str();
  }
  auto fmt = [&](const poly::AffineExpr& e) {
    BandMember m;
    m.mode = c.mode;
    m.tile = c.tile;
    std::string val = m.str(e.str());
    std::ostringstream body;
    if (c.block) {
      if (c.divisor > 1) {
        // value / divisor recovers the tile index of a TileFloor member.
        if (c.mode == MemberMode::TileFloor && c.tile == c.divisor) {
          body << "floor(" << e.str() << " / " << c.divisor << ")";
        } else {
          body << "(" << val << ") / " << c.divisor;
        }
      } else {
        body << val;
      }
      body << " mod " << c.modulus;
    } else {
      if (c.mode == MemberMode::Mod && c.tile == c.modulus) {
        body << val;
      } else if (c.mode == MemberMode::Plain) {
        body << val << " mod " << c.modulus;
      } else {
        body << "(" << val << ") mod " << c.modulus;
      }
    }
    return body.str();
  };
  os << fnGroupStr(c.base, fmt, stmtNames);
  return os.str();
}

void dumpImpl(
    const NodePtr& node,
    int depth,
    const std::vector<std::string>* stmtNames,
    std::ostringstream& os) {
  std::string indent(static_cast<size_t>(depth) * 2, ' ');
  os << indent;
  switch (node->kind) {
    case NodeKind::Domain: {
      os << "domain(";
      bool sep = false;
      for (size_t s : node->stmts) {
        if (sep) {
          os << ", ";
        }
        sep = true;
        os << stmtName(s, stmtNames);
      }
      os << ")";
      break;
    }
    case NodeKind::Context:
      os << "context(grid = [" << node->grid[0] << ", " << node->grid[1] << ", "
         << node->grid[2] << "], block = [" << node->block[0] << ", "
         << node->block[1] << ", " << node->block[2] << "])";
      break;
    case NodeKind::Band: {
      os << "band(permutable = " << (node->permutable ? 1 : 0) << ", coincident = [";
      for (size_t i = 0; i < node->members.size(); ++i) {
        if (i) {
          os << ", ";
        }
        os << (node->members[i].coincident ? 1 : 0);
      }
      os << "])";
      for (size_t i = 0; i < node->members.size(); ++i) {
        const auto& m = node->members[i];
        os << (i ? ", " : " ");
        auto fmt = [&](const poly::AffineExpr& e) { return m.str(e.str()); };
        os << "[" << fnGroupStr(m.fn, fmt, stmtNames) << "]";
        if (m.blockDim >= 0) {
          os << " -> b" << "xyz"[m.blockDim];
        }
        if (m.threadDim >= 0) {
          os << " -> t" << "xyz"[m.threadDim];
        }
      }
      break;
    }
    case NodeKind::Filter: {
      os << "filter(";
      bool sep = false;
      for (size_t s : node->stmts) {
        if (sep) {
          os << ", ";
        }
        sep = true;
        os << stmtName(s, stmtNames);
      }
      for (const auto& c : node->conds) {
        if (sep) {
          os << ", ";
        }
        sep = true;
        os << condStr(c, stmtNames);
      }
      os << ")";
      break;
    }
    case NodeKind::Sequence: {
      os << "sequence";
      bool any = false;
      for (bool b : node->barrierAfter) {
        any = any || b;
      }
      if (any) {
        os << "(sync after ";
        bool sep = false;
        for (size_t i = 0; i < node->barrierAfter.size(); ++i) {
          if (node->barrierAfter[i]) {
            if (sep) {
              os << ", ";
            }
            sep = true;
            os << i;
          }
        }
        os << ")";
      }
      break;
    }
    case NodeKind::Set:
      os << "set";
      break;
    case NodeKind::Extension: {
      os << "extension(";
      bool sep = false;
      for (const auto& g : node->copies) {
        if (sep) {
          os << ", ";
        }
        sep = true;
        os << g.buffer << "[";
        auto shape = g.bufferShape();
        for (size_t i = 0; i < shape.size(); ++i) {
          if (i) {
            os << ", ";
          }
          os << shape[i];
        }
        os << "]";
      }
      os << ")";
      break;
    }
  }
  os << "\n";
  for (const auto& child : node->children) {
    dumpImpl(child, depth + 1, stmtNames, os);
  }
}

} // namespace

std::string dumpTree(const NodePtr& root, const std::vector<std::string>* stmtNames) {
  std::ostringstream os;
  dumpImpl(root, 0, stmtNames, os);
  return os.str();
}

} // namespace sched
} // namespace tc
