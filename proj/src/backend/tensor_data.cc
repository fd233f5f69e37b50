/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/backend/tensor_data.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "tc/support/diagnostics.h"

namespace tc {
namespace backend {

namespace {

constexpr char kMagic[5] = {'T', 'C', 'T', 'N', '1'};

void putU64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) {
    b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  }
  os.write(b, 8);
}

uint64_t getU64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int k = 0; k < 8; ++k) {
    v |= static_cast<uint64_t>(b[k]) << (8 * k);
  }
  return v;
}

void putU32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) {
    b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  }
  os.write(b, 4);
}

uint32_t getU32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= static_cast<uint32_t>(b[k]) << (8 * k);
  }
  return v;
}

} // namespace

TensorData TensorData::zeros(lang::ElemKind kind, std::vector<int64_t> shape) {
  TensorData t;
  t.elemKind = kind;
  t.shape = std::move(shape);
  int64_t n = t.volume();
  if (kind == lang::ElemKind::Float) {
    t.f.assign(static_cast<size_t>(n), 0.0f);
  } else {
    t.i.assign(static_cast<size_t>(n), 0);
  }
  return t;
}

int64_t TensorData::volume() const {
  int64_t n = 1;
  for (int64_t e : shape) {
    n *= e;
  }
  return n;
}

int64_t TensorData::linearize(const std::vector<int64_t>& idx) const {
  TC_CHECK(idx.size() == shape.size(), "rank mismatch in tensor addressing");
  int64_t lin = 0;
  for (size_t d = 0; d < shape.size(); ++d) {
    lin = lin * shape[d] + idx[d];
  }
  return lin;
}

double TensorData::load(int64_t linear) const {
  if (elemKind == lang::ElemKind::Float) {
    return static_cast<double>(f[static_cast<size_t>(linear)]);
  }
  return static_cast<double>(i[static_cast<size_t>(linear)]);
}

void TensorData::store(int64_t linear, double v) {
  if (elemKind == lang::ElemKind::Float) {
    f[static_cast<size_t>(linear)] = static_cast<float>(v);
  } else {
    i[static_cast<size_t>(linear)] = narrowInt(v);
  }
}

int32_t narrowInt(double v) {
  if (std::isnan(v)) {
    return 0;
  }
  if (v >= static_cast<double>(std::numeric_limits<int32_t>::max())) {
    return std::numeric_limits<int32_t>::max();
  }
  if (v <= static_cast<double>(std::numeric_limits<int32_t>::min())) {
    return std::numeric_limits<int32_t>::min();
  }
  return static_cast<int32_t>(v); // truncation toward zero
}

void writeTensorFile(const std::string& path, const TensorData& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throwError(ErrorKind::Io, "cannot open '" + path + "' for writing");
  }
  os.write(kMagic, sizeof(kMagic));
  char kind = t.elemKind == lang::ElemKind::Float ? 'f' : 'i';
  os.put(kind);
  os.put(static_cast<char>(t.shape.size()));
  for (int64_t e : t.shape) {
    putU64(os, static_cast<uint64_t>(e));
  }
  int64_t n = t.volume();
  for (int64_t k = 0; k < n; ++k) {
    if (t.elemKind == lang::ElemKind::Float) {
      uint32_t bits;
      float v = t.f[static_cast<size_t>(k)];
      std::memcpy(&bits, &v, 4);
      putU32(os, bits);
    } else {
      putU32(os, static_cast<uint32_t>(t.i[static_cast<size_t>(k)]));
    }
  }
  if (!os) {
    throwError(ErrorKind::Io, "write failed for '" + path + "'");
  }
}

TensorData readTensorFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throwError(ErrorKind::Io, "cannot open '" + path + "' for reading");
  }
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, kMagic, 5) != 0) {
    throwError(ErrorKind::Io, "'" + path + "' is not a TCTN1 tensor file");
  }
  int kind = is.get();
  int rank = is.get();
  if (!is || (kind != 'f' && kind != 'i') || rank < 0 || rank > 16) {
    throwError(ErrorKind::Io, "'" + path + "' has a malformed tensor header");
  }
  TensorData t;
  t.elemKind = kind == 'f' ? lang::ElemKind::Float : lang::ElemKind::Int;
  for (int d = 0; d < rank; ++d) {
    int64_t e = static_cast<int64_t>(getU64(is));
    if (!is || e < 1) {
      throwError(ErrorKind::Io, "'" + path + "' declares an empty tensor extent");
    }
    t.shape.push_back(e);
  }
  int64_t n = t.volume();
  for (int64_t k = 0; k < n; ++k) {
    uint32_t bits = getU32(is);
    if (!is) {
      throwError(ErrorKind::Io, "'" + path + "' is truncated");
    }
    if (t.elemKind == lang::ElemKind::Float) {
      float v;
      std::memcpy(&v, &bits, 4);
      t.f.push_back(v);
    } else {
      t.i.push_back(static_cast<int32_t>(bits));
    }
  }
  return t;
}

void fillUniform(TensorData& t, std::mt19937_64& rng, double lo, double hi) {
  int64_t n = t.volume();
  if (t.elemKind == lang::ElemKind::Float) {
    std::uniform_real_distribution<double> dist(lo, hi);
    t.f.resize(static_cast<size_t>(n));
    for (int64_t k = 0; k < n; ++k) {
      t.f[static_cast<size_t>(k)] = static_cast<float>(dist(rng));
    }
  } else {
    int64_t ilo = static_cast<int64_t>(std::ceil(lo));
    int64_t ihi = static_cast<int64_t>(std::ceil(hi)) - 1;
    TC_CHECK(ihi >= ilo, "empty integer fill range");
    std::uniform_int_distribution<int64_t> dist(ilo, ihi);
    t.i.resize(static_cast<size_t>(n));
    for (int64_t k = 0; k < n; ++k) {
      t.i[static_cast<size_t>(k)] = static_cast<int32_t>(dist(rng));
    }
  }
}

bool bitEqual(const TensorData& a, const TensorData& b) {
  if (a.elemKind != b.elemKind || a.shape != b.shape) {
    return false;
  }
  if (a.elemKind == lang::ElemKind::Float) {
    return std::memcmp(a.f.data(), b.f.data(), a.f.size() * 4) == 0;
  }
  return a.i == b.i;
}

double maxRelError(const TensorData& ref, const TensorData& got) {
  if (ref.elemKind != got.elemKind || ref.shape != got.shape) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0;
  int64_t n = ref.volume();
  for (int64_t k = 0; k < n; ++k) {
    double r = ref.load(k);
    double g = got.load(k);
    double denom = std::max(std::abs(r), 1.0);
    worst = std::max(worst, std::abs(g - r) / denom);
  }
  return worst;
}

} // namespace backend
} // namespace tc
