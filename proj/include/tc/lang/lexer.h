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
#include <string>
#include <vector>

#include "tc/support/diagnostics.h"

namespace tc {
namespace lang {

enum class TokKind {
  Eof,
  Ident, // per the grammar an identifier is any word of [_a-zA-Z0-9] that
         // contains at least one non-digit, so `2LUT` is an identifier
  IntLit,
  FloatLit,
  // keywords
  KwDef,
  KwWhere,
  KwFloat,
  KwInt,
  // punctuation and operators
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Arrow, // ->
  Dot,
  Question,
  Colon,
  Assign, // =
  PlusEq,
  PlusEqBang,
  TimesEq,
  TimesEqBang,
  MinEq,
  MinEqBang,
  MaxEq,
  MaxEqBang,
  Plus,
  Minus,
  Star,
  Slash,
  Not, // !
  Lt,
  Gt,
  Le,
  Ge,
  EqEq,
  Ne,
  AndAnd,
  OrOr,
};

struct Token {
  TokKind kind = TokKind::Eof;
  std::string text;
  int64_t intValue = 0;
  double floatValue = 0;
  SourceLoc loc;
};

// Tokenizes a whole buffer. `#` starts a comment running to end of line.
// Throws Error(Parse) on malformed input.
std::vector<Token> lex(const std::string& source);

const char* tokKindName(TokKind kind);

} // namespace lang
} // namespace tc
