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

#include "tc/lang/ast.h"

namespace tc {
namespace lang {

// Recursive-descent parser for the comprehension grammar. Returns every def
// found in the buffer; throws Error(Parse) with a source location on the
// first malformed construct.
Program parse(const std::string& source);

// Convenience for the common single-def case.
TcDef parseOneDef(const std::string& source);

} // namespace lang
} // namespace tc
