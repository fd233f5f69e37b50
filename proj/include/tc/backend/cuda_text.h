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

#include <string>

#include "tc/backend/kernel_ir.h"

namespace tc {
namespace backend {

/**
 * Renders a kernel as CUDA-flavored source text.
 *
 * The text is illustrative output for inspection and diffing; it is never
 * compiled or executed in-process (the emulator is the execution engine).
 * Rendering conventions:
 *  - the signature lists outputs first, then temporaries, inputs, and
 *    runtime scalars; sizes are already baked into the specialized body;
 *  - global tensors are linearized row-major, promoted buffers keep one
 *    bracket per dimension;
 *  - single-trip strided loops collapse to a guard (or to a plain binding
 *    when every thread takes the trip), matching hand-written kernels;
 *  - loops flagged for unrolling are expanded textually when their bounds
 *    are constant, otherwise they get `#pragma unroll`.
 */
std::string emitCudaText(const KernelIR& ir);

} // namespace backend
} // namespace tc
