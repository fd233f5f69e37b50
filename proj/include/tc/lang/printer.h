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

// Pretty-prints ASTs back to parseable source. print(parse(print(x)))
// equals print(x) — the round-trip property the frontend tests pin down.
std::string printExpr(const Expr& expr);
std::string printStmt(const Stmt& stmt);
std::string printDef(const TcDef& def);
std::string printProgram(const Program& program);

} // namespace lang
} // namespace tc
