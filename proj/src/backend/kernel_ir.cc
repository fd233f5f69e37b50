/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/backend/kernel_ir.h"

#include <sstream>

#include "tc/lang/printer.h"
#include "tc/support/diagnostics.h"

namespace tc {
namespace backend {

namespace {

void dumpNode(const IrPtr& n, int depth, std::ostringstream& os) {
  std::string pad(static_cast<size_t>(depth) * 2, ' ');
  switch (n->kind) {
    case IrKind::Loop: {
      os << pad << "loop " << n->var << " = " << n->lo.str() << "; < " << n->hi << "; += "
         << n->step;
      if (n->unroll) {
        os << " (unroll)";
      }
      if (n->copyLoop) {
        os << " (copy)";
      }
      os << "\n";
      for (const auto& c : n->body) {
        dumpNode(c, depth + 1, os);
      }
      break;
    }
    case IrKind::Cond: {
      os << pad << "if ";
      for (size_t k = 0; k < n->conds.size(); ++k) {
        const auto& c = n->conds[k];
        if (k) {
          os << " && ";
        }
        os << "(" << c.lhs.str();
        if (c.divisor != 1) {
          os << " / " << c.divisor;
        }
        os << " mod " << c.modulus << " == ";
        if (c.rhsVar.empty()) {
          os << c.rhsConst;
        } else {
          os << c.rhsVar;
        }
        os << ")";
      }
      os << "\n";
      for (const auto& c : n->body) {
        dumpNode(c, depth + 1, os);
      }
      break;
    }
    case IrKind::Compute: {
      os << pad << "compute S" << n->stmt << " [";
      for (size_t k = 0; k < n->iterSum.size(); ++k) {
        if (k) {
          os << ", ";
        }
        os << n->iterSum[k].first << " = ";
        for (size_t j = 0; j < n->iterSum[k].second.size(); ++j) {
          if (j) {
            os << " + ";
          }
          os << n->iterSum[k].second[j];
        }
      }
      os << "]\n";
      break;
    }
    case IrKind::Copy: {
      os << pad << "copy " << (n->copyIn ? "in " : "out ") << n->group->buffer << " <-> "
         << n->group->tensor << " [";
      for (size_t k = 0; k < n->copyVars.size(); ++k) {
        if (k) {
          os << ", ";
        }
        os << n->copyVars[k];
      }
      os << "]\n";
      break;
    }
    case IrKind::Barrier:
      os << pad << "barrier #" << n->barrierId << "\n";
      break;
  }
}

bool deleteBarrierIn(std::vector<IrPtr>& body, int id) {
  for (size_t k = 0; k < body.size(); ++k) {
    if (body[k]->kind == IrKind::Barrier && body[k]->barrierId == id) {
      body.erase(body.begin() + static_cast<int64_t>(k));
      return true;
    }
    if (deleteBarrierIn(body[k]->body, id)) {
      return true;
    }
  }
  return false;
}

} // namespace

IrPtr makeIr(IrKind kind) {
  auto n = std::make_shared<IrNode>();
  n->kind = kind;
  return n;
}

std::string dumpIr(const KernelIR& ir) {
  std::ostringstream os;
  os << "kernel " << ir.name << " grid [" << ir.grid[0] << ", " << ir.grid[1] << ", " << ir.grid[2]
     << "] block [" << ir.block[0] << ", " << ir.block[1] << ", " << ir.block[2] << "]\n";
  for (const auto& b : ir.sharedBufs) {
    os << "shared " << b.name << ": " << lang::elemKindName(b.elemKind);
    for (int64_t e : b.shape) {
      os << "[" << e << "]";
    }
    os << " <- " << b.tensor << "\n";
  }
  for (const auto& b : ir.privateBufs) {
    os << "private " << b.name << ": " << lang::elemKindName(b.elemKind);
    for (int64_t e : b.shape) {
      os << "[" << e << "]";
    }
    os << " <- " << b.tensor << "\n";
  }
  for (const auto& n : ir.body) {
    dumpNode(n, 0, os);
  }
  return os.str();
}

bool deleteBarrier(KernelIR& ir, int id) {
  return deleteBarrierIn(ir.body, id);
}

} // namespace backend
} // namespace tc
