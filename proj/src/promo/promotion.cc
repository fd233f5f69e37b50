/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/promo/promotion.h"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tc/lang/printer.h"
#include "tc/poly/access.h"
#include "tc/promo/copies.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace promo {

namespace {

using lang::ExprPtr;
using poly::AffineExpr;
using sched::BufferDim;
using sched::MapCond;
using sched::NodeKind;
using sched::NodePtr;
using sched::PromotedGroup;

int64_t floorDivInt(int64_t a, int64_t b) {
  int64_t q = a / b;
  if (a % b != 0 && (a < 0) != (b < 0)) {
    --q;
  }
  return q;
}

int64_t modPosInt(int64_t a, int64_t b) {
  int64_t m = a % b;
  return m < 0 ? m + b : m;
}

/* ------------------------------- sites -------------------------------- */

/* A promotion site: a block-mapped band, the filter carrying its mapping
 * conditions, and the statements scheduled below it. Copies live between
 * the filter and its children, so they run once per band iteration with
 * the band's loop variables in scope. */
struct Site {
  NodePtr band;
  NodePtr filter;
  std::set<size_t> stmts;
};

void collectSites(const NodePtr& node, std::set<size_t> current, std::vector<Site>& out) {
  if (node->kind == NodeKind::Filter && !node->stmts.empty()) {
    std::set<size_t> kept;
    for (size_t s : node->stmts) {
      if (current.count(s)) {
        kept.insert(s);
      }
    }
    current = std::move(kept);
  }
  if (node->kind == NodeKind::Band) {
    bool mapped = false;
    for (const auto& m : node->members) {
      mapped = mapped || m.blockDim >= 0;
    }
    if (mapped) {
      TC_CHECK(
          node->children.size() == 1 &&
              node->children[0]->kind == NodeKind::Filter &&
              node->children[0]->stmts.empty(),
          "block-mapped band misses its mapping filter");
      out.push_back(Site{node, node->children[0], std::move(current)});
      return;
    }
  }
  for (const auto& child : node->children) {
    collectSites(child, current, out);
  }
}

const sched::Node* findContext(const NodePtr& node) {
  if (node->kind == NodeKind::Context) {
    return node.get();
  }
  for (const auto& child : node->children) {
    if (const auto* found = findContext(child)) {
      return found;
    }
  }
  return nullptr;
}

/* --------------------------- iterator boxes --------------------------- */

/* Covering interval of one iterator below a site: [base, base + extent),
 * where base is affine in the site band's loop variables for iterators the
 * band fixes and the constant range start otherwise. */
struct IterBox {
  AffineExpr base;
  int64_t extent = 1;
  int64_t lo = 0;
  int64_t hi = 0;
  const sched::BandMember* siteMember = nullptr;
  int64_t siteTile = 0;
};

const std::string* singleIter(const AffineExpr& fn) {
  if (fn.cst != 0 || fn.coeffs.size() != 1 || fn.coeffs.begin()->second != 1) {
    return nullptr;
  }
  return &fn.coeffs.begin()->first;
}

std::map<std::string, IterBox> iterBoxes(
    const Site& site,
    const sem::SpecializedDef& def,
    size_t s,
    const std::map<const sched::BandMember*, std::string>& labels) {
  const auto& cs = def.stmts[s];
  std::map<std::string, IterBox> boxes;
  for (const auto& v : cs.iterators) {
    const auto& r = cs.range(v);
    IterBox b;
    b.base = AffineExpr::constant(r.lo);
    b.extent = r.extent();
    b.lo = r.lo;
    b.hi = r.hi;
    boxes[v] = std::move(b);
  }
  for (const auto& m : site.band->members) {
    auto fit = m.fn.find(s);
    if (fit == m.fn.end()) {
      continue;
    }
    const std::string* v = singleIter(fit->second);
    if (!v) {
      continue;
    }
    auto bit = boxes.find(*v);
    if (bit == boxes.end()) {
      continue;
    }
    IterBox& b = bit->second;
    if (m.mode == sched::MemberMode::TileFloor) {
      b.base = AffineExpr::var(labels.at(&m));
      b.extent = std::min<int64_t>(m.tile, b.hi - m.tile * floorDivInt(b.lo, m.tile));
      b.siteMember = &m;
      b.siteTile = m.tile;
    } else if (m.mode == sched::MemberMode::Plain) {
      b.base = AffineExpr::var(labels.at(&m));
      b.extent = 1;
      b.siteMember = &m;
      b.siteTile = 1;
    }
  }
  return boxes;
}

/* -------------------------- thread bindings --------------------------- */

struct ThreadBind {
  int dim = -1;
  int64_t modulus = 1;
};

void collectThreadBinds(
    const NodePtr& node,
    const std::array<int64_t, 3>& block,
    std::map<std::pair<size_t, std::string>, ThreadBind>& out) {
  if (node->kind == NodeKind::Band) {
    for (const auto& m : node->members) {
      if (m.threadDim < 0) {
        continue;
      }
      for (const auto& kv : m.fn) {
        if (const std::string* v = singleIter(kv.second)) {
          out[{kv.first, *v}] =
              ThreadBind{m.threadDim, block[static_cast<size_t>(m.threadDim)]};
        }
      }
    }
  }
  for (const auto& child : node->children) {
    collectThreadBinds(child, block, out);
  }
}

/* ------------------------------ accesses ------------------------------ */

struct AccessRec {
  size_t stmt = 0;
  bool write = false;
  std::vector<ExprPtr> subs;
};

void collectExprAccesses(
    const ExprPtr& e,
    size_t s,
    const sem::SpecializedDef& def,
    std::map<std::string, std::vector<AccessRec>>& out) {
  if (e->kind == lang::ExprKind::Access && !e->isBuiltinCall &&
      def.shapes.count(e->name)) {
    out[e->name].push_back(AccessRec{s, false, e->args});
  }
  for (const auto& arg : e->args) {
    collectExprAccesses(arg, s, def, out);
  }
}

std::map<std::string, std::vector<AccessRec>> collectSiteAccesses(
    const Site& site,
    const sem::SpecializedDef& def) {
  std::map<std::string, std::vector<AccessRec>> out;
  for (size_t s : site.stmts) {
    const auto& cs = def.stmts[s];
    out[cs.stmt.lhsTensor].push_back(AccessRec{s, true, cs.stmt.lhsIndices});
    if (cs.stmt.op != lang::AssignOp::Assign) {
      // The accumulator of a reduction is read back every update.
      out[cs.stmt.lhsTensor].push_back(AccessRec{s, false, cs.stmt.lhsIndices});
    }
    collectExprAccesses(cs.stmt.rhs, s, def, out);
  }
  return out;
}

/* ------------------------------- tiles -------------------------------- */

struct AccessTile {
  bool valid = true;
  bool indirect = false;
  std::vector<std::vector<BufferDim>> dims;
  std::string key;
};

bool indirectReadable(
    const ExprPtr& e,
    const sem::SpecializedDef& def,
    const std::set<std::string>& writtenTensors) {
  if (e->kind == lang::ExprKind::Access && !e->isBuiltinCall) {
    if (!def.shapes.count(e->name) || writtenTensors.count(e->name)) {
      return false;
    }
  }
  for (const auto& arg : e->args) {
    if (!indirectReadable(arg, def, writtenTensors)) {
      return false;
    }
  }
  return true;
}

void collectIterOrder(
    const ExprPtr& e,
    const std::map<std::string, IterBox>& boxes,
    std::vector<std::string>& out) {
  if (e->kind == lang::ExprKind::Ident && boxes.count(e->name) &&
      std::find(out.begin(), out.end(), e->name) == out.end()) {
    out.push_back(e->name);
  }
  for (const auto& arg : e->args) {
    collectIterOrder(arg, boxes, out);
  }
}

AccessTile tileAccess(
    const AccessRec& a,
    const sem::SpecializedDef& def,
    const std::map<std::string, IterBox>& boxes,
    const std::vector<int64_t>& shape,
    const std::set<std::string>& writtenTensors) {
  AccessTile t;
  if (a.subs.size() != shape.size()) {
    t.valid = false;
    return t;
  }
  const auto& cs = def.stmts[a.stmt];
  std::ostringstream key;
  for (size_t d = 0; d < a.subs.size(); ++d) {
    std::vector<BufferDim> entries;
    auto aff = poly::linearizeSubscript(a.subs[d], def, cs);
    if (aff) {
      AffineExpr off = AffineExpr::constant(aff->cst);
      int64_t extent = 1;
      for (const auto& kv : aff->coeffs) {
        if (kv.second == 0) {
          continue;
        }
        auto bit = boxes.find(kv.first);
        if (bit == boxes.end()) {
          t.valid = false;
          return t;
        }
        const IterBox& b = bit->second;
        if (kv.second > 0) {
          off = off + b.base.scaled(kv.second);
        } else {
          off = off +
              (b.base + AffineExpr::constant(b.extent - 1)).scaled(kv.second);
        }
        extent += std::llabs(kv.second) * (b.extent - 1);
      }
      BufferDim bd;
      if (extent >= shape[d]) {
        // The whole dimension is at least as narrow: cache all of it.
        bd.offset = AffineExpr::constant(0);
        bd.extent = shape[d];
      } else {
        bd.offset = off;
        bd.extent = extent;
        if (aff->coeffs.size() == 1 && aff->coeffs.begin()->second == 1) {
          bd.iter = aff->coeffs.begin()->first;
          const IterBox& b = boxes.at(bd.iter);
          bd.lo = b.lo;
          bd.hi = b.hi;
        }
      }
      key << "|" << bd.offset.str() << "," << bd.extent;
      entries.push_back(std::move(bd));
    } else {
      // Data-dependent subscript: cache one cell per combination of the
      // subscript's iterators, re-evaluating the subscript while copying.
      // Sound only when every array involved stays read-only.
      if (!indirectReadable(a.subs[d], def, writtenTensors)) {
        t.valid = false;
        return t;
      }
      t.indirect = true;
      std::vector<std::string> iters;
      collectIterOrder(a.subs[d], boxes, iters);
      key << "|$" << lang::printExpr(*a.subs[d]);
      for (const auto& v : iters) {
        const IterBox& b = boxes.at(v);
        BufferDim bd;
        bd.indirect = true;
        bd.offset = b.base;
        bd.extent = b.extent;
        bd.iter = v;
        bd.lo = b.lo;
        bd.hi = b.hi;
        key << ";" << v << ":" << b.base.str() << "," << b.extent;
        entries.push_back(std::move(bd));
      }
    }
    t.dims.push_back(std::move(entries));
  }
  t.key = key.str();
  return t;
}

/* ------------------------------- groups ------------------------------- */

struct Group {
  std::string tensor;
  std::vector<std::vector<BufferDim>> dims;
  bool indirect = false;
  bool hasReads = false;
  bool hasWrites = false;
  std::vector<AccessRec> accs;
  size_t bytes = 0; // shared-buffer footprint
  // Heuristic inputs, filled before selection.
  bool reuseAtLeastTwo = false;
  bool nonCoalesced = false;
  double greedyKey = 0;
};

size_t cellCount(const std::vector<std::vector<BufferDim>>& dims) {
  size_t cells = 1;
  for (const auto& group : dims) {
    for (const auto& bd : group) {
      cells *= static_cast<size_t>(bd.extent);
    }
  }
  return cells;
}

void mergeAccessIntoGroup(Group& g, const AccessRec& a, const AccessTile& t) {
  for (size_t d = 0; d < g.dims.size(); ++d) {
    for (size_t e = 0; e < g.dims[d].size(); ++e) {
      if (g.dims[d][e].iter != t.dims[d][e].iter) {
        g.dims[d][e].iter.clear();
      }
    }
  }
  g.hasReads = g.hasReads || !a.write;
  g.hasWrites = g.hasWrites || a.write;
  g.accs.push_back(a);
}

/* Bounding box of two read-only single-interval tiles; succeeds when the
 * offsets differ by constants and the box is smaller than the two tiles
 * together. */
bool tryHullMerge(Group& a, const Group& b, size_t elemSize) {
  if (a.indirect || b.indirect || a.hasWrites || b.hasWrites) {
    return false;
  }
  std::vector<std::vector<BufferDim>> hull = a.dims;
  for (size_t d = 0; d < a.dims.size(); ++d) {
    if (a.dims[d].size() != 1 || b.dims[d].size() != 1) {
      return false;
    }
    const BufferDim& da = a.dims[d][0];
    const BufferDim& db = b.dims[d][0];
    AffineExpr delta = db.offset - da.offset;
    for (const auto& kv : delta.coeffs) {
      if (kv.second != 0) {
        return false;
      }
    }
    int64_t lo = std::min<int64_t>(0, delta.cst);
    int64_t hiEdge = std::max<int64_t>(da.extent, delta.cst + db.extent);
    BufferDim& h = hull[d][0];
    h.offset = da.offset + AffineExpr::constant(lo);
    h.extent = hiEdge - lo;
    if (da.iter == db.iter && !da.iter.empty()) {
      h.lo = std::min(da.lo, db.lo);
      h.hi = std::max(da.hi, db.hi);
    } else {
      h.iter.clear();
    }
  }
  if (cellCount(hull) * elemSize >= (cellCount(a.dims) + cellCount(b.dims)) * elemSize) {
    return false;
  }
  a.dims = std::move(hull);
  for (const auto& acc : b.accs) {
    a.accs.push_back(acc);
  }
  a.hasReads = a.hasReads || b.hasReads;
  return true;
}

/* --------------------------- reuse counting ---------------------------- */

struct ReuseStat {
  int64_t total = 0;
  int64_t distinct = 0;
  int64_t maxTouch = 0;
};

bool instanceInBlockZero(
    const std::vector<const MapCond*>& conds,
    size_t s,
    const std::map<std::string, int64_t>& point) {
  for (const MapCond* c : conds) {
    int64_t baseVal = c->base.at(s).eval(point);
    int64_t coord = modPosInt(floorDivInt(c->value(baseVal), c->divisor), c->modulus);
    if (coord != 0) {
      return false;
    }
  }
  return true;
}

/* Exact per-element access counts for the representative block (0,0,0). */
std::map<std::string, ReuseStat> enumerateRepresentativeBlock(
    const Site& site,
    const sem::SpecializedDef& def,
    const std::map<std::string, std::vector<AccessRec>>& accesses,
    const std::set<std::string>& wanted) {
  struct LinAcc {
    const std::string* tensor;
    std::vector<AffineExpr> subs;
  };
  std::map<size_t, std::vector<LinAcc>> perStmt;
  for (const auto& kv : accesses) {
    if (!wanted.count(kv.first)) {
      continue;
    }
    for (const auto& a : kv.second) {
      LinAcc lin;
      lin.tensor = &kv.first;
      bool ok = true;
      for (const auto& sub : a.subs) {
        auto aff = poly::linearizeSubscript(sub, def, def.stmts[a.stmt]);
        if (!aff) {
          ok = false;
          break;
        }
        lin.subs.push_back(*aff);
      }
      if (ok) {
        perStmt[a.stmt].push_back(std::move(lin));
      }
    }
  }
  std::map<std::string, std::map<std::vector<int64_t>, int64_t>> counts;
  for (size_t s : site.stmts) {
    auto pit = perStmt.find(s);
    if (pit == perStmt.end()) {
      continue;
    }
    const auto& cs = def.stmts[s];
    std::vector<const MapCond*> conds;
    for (const auto& c : site.filter->conds) {
      if (c.block && !c.padZero && c.base.count(s)) {
        conds.push_back(&c);
      }
    }
    std::map<std::string, int64_t> point;
    std::vector<int64_t> los, his;
    for (const auto& v : cs.iterators) {
      const auto& r = cs.range(v);
      point[v] = r.lo;
      los.push_back(r.lo);
      his.push_back(r.hi);
    }
    bool done = false;
    std::vector<int64_t> coords;
    while (!done) {
      if (instanceInBlockZero(conds, s, point)) {
        for (const auto& lin : pit->second) {
          coords.clear();
          for (const auto& sub : lin.subs) {
            coords.push_back(sub.eval(point));
          }
          ++counts[*lin.tensor][coords];
        }
      }
      // odometer step
      done = true;
      for (size_t d = cs.iterators.size(); d-- > 0;) {
        int64_t& val = point[cs.iterators[d]];
        if (++val < his[d]) {
          done = false;
          break;
        }
        val = los[d];
      }
      if (cs.iterators.empty()) {
        break;
      }
    }
  }
  std::map<std::string, ReuseStat> stats;
  for (const auto& kv : counts) {
    ReuseStat st;
    st.distinct = static_cast<int64_t>(kv.second.size());
    for (const auto& cell : kv.second) {
      st.total += cell.second;
      st.maxTouch = std::max(st.maxTouch, cell.second);
    }
    stats[kv.first] = st;
  }
  return stats;
}

/* ----------------------------- heuristics ------------------------------ */

/* True when the innermost tensor dimension of the access strides along the
 * x-mapped thread, i.e. the warp reads consecutive cells. */
bool accessCoalesced(
    const AccessRec& a,
    const sem::SpecializedDef& def,
    const std::map<std::pair<size_t, std::string>, ThreadBind>& binds) {
  if (a.subs.empty()) {
    return true;
  }
  auto aff = poly::linearizeSubscript(a.subs.back(), def, def.stmts[a.stmt]);
  if (!aff) {
    return false;
  }
  for (const auto& kv : aff->coeffs) {
    if (kv.second != 1) {
      continue;
    }
    auto bit = binds.find({a.stmt, kv.first});
    if (bit != binds.end() && bit->second.dim == 0) {
      return true;
    }
  }
  return false;
}

/* Written groups may only be promoted when writing the tile back cannot
 * collide with another block: every block-mapped iterator of each writing
 * statement must own a tile dimension of its own. */
bool writeGroupSafe(const Group& g, const Site& site) {
  std::set<std::string> owned;
  for (const auto& dimGroup : g.dims) {
    for (const auto& bd : dimGroup) {
      if (!bd.iter.empty() && !bd.indirect) {
        owned.insert(bd.iter);
      }
    }
  }
  for (const auto& a : g.accs) {
    if (!a.write) {
      continue;
    }
    for (const auto& m : site.band->members) {
      if (m.blockDim < 0) {
        continue;
      }
      auto fit = m.fn.find(a.stmt);
      if (fit == m.fn.end()) {
        return false;
      }
      const std::string* v = singleIter(fit->second);
      if (!v || !owned.count(*v)) {
        return false;
      }
    }
  }
  return true;
}

/* Checks per-thread cell ownership and, on success, slices the dimensions
 * across the owning thread dimensions. */
bool makePrivate(
    Group& g,
    const sem::SpecializedDef& def,
    const Site& site,
    const std::map<const sched::BandMember*, std::string>& labels,
    const std::map<std::pair<size_t, std::string>, ThreadBind>& binds) {
  if (!g.hasWrites || g.indirect || !writeGroupSafe(g, site)) {
    return false;
  }
  std::set<int> usedThreadDims;
  std::vector<std::pair<size_t, ThreadBind>> slices; // dim index -> bind
  for (size_t d = 0; d < g.dims.size(); ++d) {
    if (g.dims[d].size() != 1) {
      return false;
    }
    const BufferDim& bd = g.dims[d][0];
    if (bd.extent == 1) {
      continue;
    }
    if (bd.iter.empty()) {
      return false;
    }
    const ThreadBind* common = nullptr;
    for (const auto& a : g.accs) {
      auto bit = binds.find({a.stmt, bd.iter});
      if (bit == binds.end()) {
        return false;
      }
      if (!common) {
        common = &bit->second;
      } else if (common->dim != bit->second.dim || common->modulus != bit->second.modulus) {
        return false;
      }
      // The residues thread mapping uses line up with the tile box only
      // when the box starts at a tile multiple of the thread extent.
      const auto boxes = iterBoxes(site, def, a.stmt, labels);
      auto box = boxes.find(bd.iter);
      if (box == boxes.end() || box->second.siteMember == nullptr ||
          box->second.siteTile % bit->second.modulus != 0) {
        return false;
      }
    }
    if (!usedThreadDims.insert(common->dim).second) {
      return false;
    }
    slices.emplace_back(d, *common);
  }
  for (const auto& sl : slices) {
    BufferDim& bd = g.dims[sl.first][0];
    bd.threadDim = sl.second.dim;
    bd.threadExtent = sl.second.modulus;
  }
  return true;
}

std::string freshBufferName(
    const std::string& base,
    std::set<std::string>& taken) {
  std::string name = base;
  int suffix = 1;
  while (taken.count(name)) {
    name = base + "_" + std::to_string(++suffix);
  }
  taken.insert(name);
  return name;
}

} // namespace

PromotionResult promote(
    NodePtr& root,
    sem::SpecializedDef& def,
    const PromotionOptions& options) {
  PromotionResult result;
  if (!options.useShared && !options.usePrivate) {
    return result;
  }
  const sched::Node* context = findContext(root);
  TC_CHECK(context != nullptr, "promotion requires a mapped tree");
  std::map<const sched::BandMember*, std::string> labels;
  sched::labelLoops(root, &labels);

  std::set<size_t> all;
  for (size_t s = 0; s < def.stmts.size(); ++s) {
    all.insert(s);
  }
  std::vector<Site> sites;
  collectSites(root, all, sites);

  std::set<std::string> writtenTensors;
  for (const auto& cs : def.stmts) {
    writtenTensors.insert(cs.stmt.lhsTensor);
  }

  // Per-site access lists, and the sites every tensor appears in: a
  // written tensor used by several sites stays in global memory, since a
  // block-local copy cannot see another site's updates.
  std::vector<std::map<std::string, std::vector<AccessRec>>> siteAccesses;
  std::map<std::string, std::set<size_t>> tensorSites;
  for (size_t i = 0; i < sites.size(); ++i) {
    siteAccesses.push_back(collectSiteAccesses(sites[i], def));
    for (const auto& kv : siteAccesses.back()) {
      tensorSites[kv.first].insert(i);
    }
  }

  std::set<std::string> takenNames;
  for (const auto& kv : def.shapes) {
    takenNames.insert(kv.first);
  }

  size_t budgetLeft = options.sharedBudget;
  std::vector<PromotedGroup> allShared;

  for (size_t siteIdx = 0; siteIdx < sites.size(); ++siteIdx) {
    Site& site = sites[siteIdx];
    std::map<std::pair<size_t, std::string>, ThreadBind> binds;
    collectThreadBinds(site.filter, context->block, binds);
    std::map<size_t, std::map<std::string, IterBox>> boxesByStmt;
    for (size_t s : site.stmts) {
      boxesByStmt[s] = iterBoxes(site, def, s, labels);
    }

    // Group accesses of each tensor by identical tile.
    std::map<std::string, std::vector<Group>> groupsByTensor;
    std::map<std::string, size_t> elemSizes;
    for (const auto& kv : siteAccesses[siteIdx]) {
      const std::string& tensor = kv.first;
      if (writtenTensors.count(tensor) && tensorSites[tensor].size() > 1) {
        continue;
      }
      size_t elemSize = lang::elemKindSize(def.vdef.tensors.at(tensor).elemKind);
      elemSizes[tensor] = elemSize;
      const auto& shape = def.shapes.at(tensor);
      bool poisoned = false;
      std::vector<Group> groups;
      std::map<std::string, size_t> byKey;
      for (const auto& a : kv.second) {
        AccessTile t =
            tileAccess(a, def, boxesByStmt.at(a.stmt), shape, writtenTensors);
        if (!t.valid) {
          poisoned = true;
          break;
        }
        auto found = byKey.find(t.key);
        if (found == byKey.end()) {
          Group g;
          g.tensor = tensor;
          g.dims = t.dims;
          g.indirect = t.indirect;
          g.hasReads = !a.write;
          g.hasWrites = a.write;
          g.accs.push_back(a);
          byKey[t.key] = groups.size();
          groups.push_back(std::move(g));
        } else {
          mergeAccessIntoGroup(groups[found->second], a, t);
        }
      }
      if (poisoned) {
        continue;
      }
      // Read-only tiles merge when their bounding box is the cheaper cache.
      bool merged = true;
      while (merged && groups.size() > 1) {
        merged = false;
        for (size_t i = 0; i < groups.size() && !merged; ++i) {
          for (size_t j = i + 1; j < groups.size() && !merged; ++j) {
            if (tryHullMerge(groups[i], groups[j], elemSize)) {
              groups.erase(groups.begin() + static_cast<ptrdiff_t>(j));
              merged = true;
            }
          }
        }
      }
      // A rewrite redirects every access of the tensor, so promotion needs
      // the site's accesses to agree on one tile.
      if (groups.size() != 1) {
        continue;
      }
      groups[0].bytes = cellCount(groups[0].dims) * elemSize;
      groupsByTensor[tensor] = std::move(groups);
    }

    // Reuse statistics for the directly accessed candidates.
    std::set<std::string> wanted;
    for (const auto& kv : groupsByTensor) {
      if (options.useShared && !kv.second[0].indirect) {
        wanted.insert(kv.first);
      }
    }
    auto stats =
        enumerateRepresentativeBlock(site, def, siteAccesses[siteIdx], wanted);

    // Partition into private and shared candidates.
    std::vector<Group*> sharedCandidates;
    std::vector<Group*> privateTaken;
    for (auto& kv : groupsByTensor) {
      Group& g = kv.second[0];
      if (options.usePrivate && makePrivate(g, def, site, labels, binds)) {
        privateTaken.push_back(&g);
        continue;
      }
      if (!options.useShared) {
        continue;
      }
      if (g.hasWrites && !writeGroupSafe(g, site)) {
        continue;
      }
      if (g.indirect) {
        // Reuse hides behind the index values and the long-latency loads
        // make caching worthwhile regardless of coalescing.
        g.reuseAtLeastTwo = true;
        g.nonCoalesced = true;
        g.greedyKey = 2.0 * static_cast<double>(g.bytes);
      } else {
        auto st = stats.find(kv.first);
        if (st == stats.end() || st->second.distinct == 0) {
          continue;
        }
        g.reuseAtLeastTwo = st->second.maxTouch >= 2;
        for (const auto& a : g.accs) {
          if (!accessCoalesced(a, def, binds)) {
            g.nonCoalesced = true;
          }
        }
        g.greedyKey = static_cast<double>(st->second.total) /
            static_cast<double>(st->second.distinct) *
            static_cast<double>(g.bytes);
      }
      if (g.reuseAtLeastTwo && g.nonCoalesced) {
        sharedCandidates.push_back(&g);
      }
    }
    std::sort(
        sharedCandidates.begin(),
        sharedCandidates.end(),
        [](const Group* a, const Group* b) {
          if (a->greedyKey != b->greedyKey) {
            return a->greedyKey > b->greedyKey;
          }
          return a->tensor < b->tensor;
        });

    std::vector<Group*> sharedTaken;
    for (Group* g : sharedCandidates) {
      if (g->bytes <= budgetLeft) {
        budgetLeft -= g->bytes;
        sharedTaken.push_back(g);
      }
    }

    // Materialize the groups, rewrite the site's statements, and hang the
    // copies off the mapping filter.
    std::vector<std::pair<Group*, bool>> selected; // group, shared flag
    for (Group* g : sharedTaken) {
      selected.emplace_back(g, true);
    }
    for (Group* g : privateTaken) {
      selected.emplace_back(g, false);
    }
    std::sort(
        selected.begin(),
        selected.end(),
        [](const std::pair<Group*, bool>& a, const std::pair<Group*, bool>& b) {
          return a.first->tensor < b.first->tensor;
        });
    std::vector<PromotedGroup> planned;
    for (auto& sel : selected) {
      Group& g = *sel.first;
      PromotedGroup pg;
      pg.tensor = g.tensor;
      pg.shared = sel.second;
      pg.buffer = freshBufferName(
          (pg.shared ? "shared_" : "private_") + g.tensor, takenNames);
      pg.hasReads = g.hasReads;
      pg.hasWrites = g.hasWrites;
      pg.dims = g.dims;
      const AccessRec& rep = g.accs.front();
      pg.repStmt = rep.stmt;
      for (const auto& sub : rep.subs) {
        pg.subs.push_back(cloneExpr(sub));
      }
      size_t cells = 1;
      for (int64_t e : pg.bufferShape()) {
        cells *= static_cast<size_t>(e);
      }
      pg.bytes = cells * elemSizes.at(g.tensor);
      if (pg.shared) {
        result.sharedBytes += pg.bytes;
        result.sharedGroups.push_back(pg);
        allShared.push_back(pg);
      } else {
        result.privateBytesPerThread += pg.bytes;
        result.privateGroups.push_back(pg);
      }
      planned.push_back(std::move(pg));
    }
    if (planned.empty()) {
      continue;
    }
    for (const auto& pg : planned) {
      for (size_t s : site.stmts) {
        rewriteStmtAccesses(def.stmts[s], pg);
      }
    }
    insertExtension(site.filter, std::move(planned));
  }

  if (!allShared.empty()) {
    markBarriers(root, def, allShared);
  }
  return result;
}

} // namespace promo
} // namespace tc
