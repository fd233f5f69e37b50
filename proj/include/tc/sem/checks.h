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

#include "tc/lang/validate.h"
#include "tc/sem/specialize.h"

namespace tc {
namespace sem {

/*
 * A statement may read its own output tensor only at exactly the subscripts
 * it writes; any shifted or permuted self-read would observe a mix of old
 * and new values under an arbitrary execution order. Throws
 * Error(LivenessInterference).
 */
void checkInPlace(const lang::ValidatedDef& vdef);

/*
 * Temporaries have no backing storage before their first write: any read,
 * including the implicit one of a non-initializing reduction, needs an
 * earlier statement writing the tensor. Returns are in/out and may read
 * their incoming values. Throws Error(UninitializedRead).
 */
void checkSymbolicInit(const lang::ValidatedDef& vdef);

/*
 * Concrete refinement of checkSymbolicInit: verifies cell-wise that every
 * read of a temporary lands on cells some earlier statement wrote. Skipped
 * for statements whose iteration space exceeds an enumeration cap. Throws
 * Error(UninitializedRead).
 */
void checkConcreteInit(const SpecializedDef& def);

/*
 * Every affine subscript must stay inside the tensor at all points of the
 * statement's iteration box (where clauses can force ranges past what the
 * shapes admit, e.g. an init statement whose iterator range was pinned by a
 * smaller tensor). Data-dependent subscripts are checked at run time
 * instead. Throws Error(OutOfBounds).
 */
void checkBounds(const SpecializedDef& def);

} // namespace sem
} // namespace tc
