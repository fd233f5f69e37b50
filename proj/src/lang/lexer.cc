/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/lang/lexer.h"

#include <cctype>
#include <unordered_map>

namespace tc {
namespace lang {
namespace {

bool isWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool allDigits(const std::string& s) {
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return true;
}

const std::unordered_map<std::string, TokKind>& keywordTable() {
  static const std::unordered_map<std::string, TokKind> table = {
      // `in` is deliberately absent: it is a plain identifier (a common
      // tensor name) that the where-clause parser matches by spelling.
      {"def", TokKind::KwDef},
      {"where", TokKind::KwWhere},
      {"float", TokKind::KwFloat},
      {"int", TokKind::KwInt},
  };
  return table;
}

class Cursor {
 public:
  explicit Cursor(const std::string& source) : source_(source) {}

  bool atEnd() const {
    return pos_ >= source_.size();
  }
  char peek(size_t ahead = 0) const {
    return pos_ + ahead < source_.size() ? source_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = source_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  SourceLoc loc() const {
    return {line_, col_};
  }

 private:
  const std::string& source_;
  size_t pos_ = 0;
  uint32_t line_ = 1;
  uint32_t col_ = 1;
};

} // namespace

const char* tokKindName(TokKind kind) {
  switch (kind) {
    case TokKind::Eof:
      return "end of input";
    case TokKind::Ident:
      return "identifier";
    case TokKind::IntLit:
      return "integer literal";
    case TokKind::FloatLit:
      return "float literal";
    case TokKind::KwDef:
      return "'def'";
    case TokKind::KwWhere:
      return "'where'";
    case TokKind::KwFloat:
      return "'float'";
    case TokKind::KwInt:
      return "'int'";
    case TokKind::LParen:
      return "'('";
    case TokKind::RParen:
      return "')'";
    case TokKind::LBrace:
      return "'{'";
    case TokKind::RBrace:
      return "'}'";
    case TokKind::Comma:
      return "','";
    case TokKind::Arrow:
      return "'->'";
    case TokKind::Dot:
      return "'.'";
    case TokKind::Question:
      return "'?'";
    case TokKind::Colon:
      return "':'";
    case TokKind::Assign:
      return "'='";
    case TokKind::PlusEq:
      return "'+='";
    case TokKind::PlusEqBang:
      return "'+=!'";
    case TokKind::TimesEq:
      return "'*='";
    case TokKind::TimesEqBang:
      return "'*=!'";
    case TokKind::MinEq:
      return "'min='";
    case TokKind::MinEqBang:
      return "'min=!'";
    case TokKind::MaxEq:
      return "'max='";
    case TokKind::MaxEqBang:
      return "'max=!'";
    case TokKind::Plus:
      return "'+'";
    case TokKind::Minus:
      return "'-'";
    case TokKind::Star:
      return "'*'";
    case TokKind::Slash:
      return "'/'";
    case TokKind::Not:
      return "'!'";
    case TokKind::Lt:
      return "'<'";
    case TokKind::Gt:
      return "'>'";
    case TokKind::Le:
      return "'<='";
    case TokKind::Ge:
      return "'>='";
    case TokKind::EqEq:
      return "'=='";
    case TokKind::Ne:
      return "'!='";
    case TokKind::AndAnd:
      return "'&&'";
    case TokKind::OrOr:
      return "'||'";
  }
  return "?";
}

std::vector<Token> lex(const std::string& source) {
  std::vector<Token> tokens;
  Cursor cur(source);

  auto push = [&](TokKind kind, SourceLoc loc, std::string text = {}) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.loc = loc;
    tokens.push_back(std::move(t));
  };

  while (!cur.atEnd()) {
    char c = cur.peek();
    SourceLoc loc = cur.loc();

    if (std::isspace(static_cast<unsigned char>(c))) {
      cur.advance();
      continue;
    }
    if (c == '#') {
      while (!cur.atEnd() && cur.peek() != '\n') {
        cur.advance();
      }
      continue;
    }

    // Words: keywords, identifiers, reduction operators, integer literals.
    if (isWordChar(c)) {
      std::string word;
      while (!cur.atEnd() && isWordChar(cur.peek())) {
        word += cur.advance();
      }

      // Numeric literal, possibly with a fractional part and/or exponent.
      if (allDigits(word)) {
        bool isFloat = false;
        std::string text = word;
        // Only treat '.' as part of the number when followed by a digit so
        // that the dimension-range form `A.0` still lexes as Ident Dot Int.
        if (cur.peek() == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1)))) {
          isFloat = true;
          text += cur.advance(); // '.'
          while (std::isdigit(static_cast<unsigned char>(cur.peek()))) {
            text += cur.advance();
          }
        }
        if ((cur.peek() == 'e' || cur.peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(cur.peek(1))) ||
             ((cur.peek(1) == '+' || cur.peek(1) == '-') &&
              std::isdigit(static_cast<unsigned char>(cur.peek(2)))))) {
          isFloat = true;
          text += cur.advance(); // e/E
          if (cur.peek() == '+' || cur.peek() == '-') {
            text += cur.advance();
          }
          while (std::isdigit(static_cast<unsigned char>(cur.peek()))) {
            text += cur.advance();
          }
        }
        Token t;
        t.loc = loc;
        t.text = text;
        if (isFloat) {
          t.kind = TokKind::FloatLit;
          t.floatValue = std::stod(text);
        } else {
          t.kind = TokKind::IntLit;
          t.intValue = std::stoll(text);
        }
        tokens.push_back(std::move(t));
        continue;
      }

      // min= / max= reduction tokens (with optional '!').
      if ((word == "min" || word == "max") && cur.peek() == '=' && cur.peek(1) != '=') {
        cur.advance(); // '='
        bool bang = cur.peek() == '!';
        if (bang) {
          cur.advance();
        }
        TokKind kind = word == "min"
            ? (bang ? TokKind::MinEqBang : TokKind::MinEq)
            : (bang ? TokKind::MaxEqBang : TokKind::MaxEq);
        push(kind, loc, word + (bang ? "=!" : "="));
        continue;
      }

      auto it = keywordTable().find(word);
      if (it != keywordTable().end()) {
        push(it->second, loc, word);
      } else {
        push(TokKind::Ident, loc, word);
      }
      continue;
    }

    cur.advance();
    switch (c) {
      case '(':
        push(TokKind::LParen, loc);
        break;
      case ')':
        push(TokKind::RParen, loc);
        break;
      case '{':
        push(TokKind::LBrace, loc);
        break;
      case '}':
        push(TokKind::RBrace, loc);
        break;
      case ',':
        push(TokKind::Comma, loc);
        break;
      case '.':
        push(TokKind::Dot, loc);
        break;
      case '?':
        push(TokKind::Question, loc);
        break;
      case ':':
        push(TokKind::Colon, loc);
        break;
      case '+':
        if (cur.peek() == '=') {
          cur.advance();
          if (cur.peek() == '!') {
            cur.advance();
            push(TokKind::PlusEqBang, loc);
          } else {
            push(TokKind::PlusEq, loc);
          }
        } else {
          push(TokKind::Plus, loc);
        }
        break;
      case '-':
        if (cur.peek() == '>') {
          cur.advance();
          push(TokKind::Arrow, loc);
        } else {
          push(TokKind::Minus, loc);
        }
        break;
      case '*':
        if (cur.peek() == '=') {
          cur.advance();
          if (cur.peek() == '!') {
            cur.advance();
            push(TokKind::TimesEqBang, loc);
          } else {
            push(TokKind::TimesEq, loc);
          }
        } else {
          push(TokKind::Star, loc);
        }
        break;
      case '/':
        push(TokKind::Slash, loc);
        break;
      case '=':
        if (cur.peek() == '=') {
          cur.advance();
          push(TokKind::EqEq, loc);
        } else {
          push(TokKind::Assign, loc);
        }
        break;
      case '!':
        if (cur.peek() == '=') {
          cur.advance();
          push(TokKind::Ne, loc);
        } else {
          push(TokKind::Not, loc);
        }
        break;
      case '<':
        if (cur.peek() == '=') {
          cur.advance();
          push(TokKind::Le, loc);
        } else {
          push(TokKind::Lt, loc);
        }
        break;
      case '>':
        if (cur.peek() == '=') {
          cur.advance();
          push(TokKind::Ge, loc);
        } else {
          push(TokKind::Gt, loc);
        }
        break;
      case '&':
        if (cur.peek() == '&') {
          cur.advance();
          push(TokKind::AndAnd, loc);
        } else {
          throwError(ErrorKind::Parse, "stray '&'", loc);
        }
        break;
      case '|':
        if (cur.peek() == '|') {
          cur.advance();
          push(TokKind::OrOr, loc);
        } else {
          throwError(ErrorKind::Parse, "stray '|'", loc);
        }
        break;
      default: {
        std::ostringstream ss;
        ss << "unexpected character '" << c << "'";
        throwError(ErrorKind::Parse, ss.str(), loc);
      }
    }
  }

  Token eof;
  eof.kind = TokKind::Eof;
  eof.loc = cur.loc();
  tokens.push_back(eof);
  return tokens;
}

} // namespace lang
} // namespace tc
