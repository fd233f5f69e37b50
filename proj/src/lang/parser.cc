/**
 * Copyright (c) the tc authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
#include "tc/lang/parser.h"

#include "tc/lang/lexer.h"

namespace tc {
namespace lang {
namespace {

class Parser {
 public:
  explicit Parser(const std::string& source) : tokens_(lex(source)) {}

  Program parseProgram() {
    Program program;
    while (!at(TokKind::Eof)) {
      program.defs.push_back(parseDef());
    }
    if (program.defs.empty()) {
      throwError(ErrorKind::Parse, "no def found in input", cur().loc);
    }
    return program;
  }

 private:
  const Token& cur() const {
    return tokens_[pos_];
  }
  const Token& peek(size_t ahead = 1) const {
    size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  bool at(TokKind kind) const {
    return cur().kind == kind;
  }
  Token advance() {
    return tokens_[pos_++];
  }
  Token expect(TokKind kind) {
    if (!at(kind)) {
      std::ostringstream ss;
      ss << "expected " << tokKindName(kind) << ", got " << tokKindName(cur().kind);
      if (!cur().text.empty()) {
        ss << " '" << cur().text << "'";
      }
      throwError(ErrorKind::Parse, ss.str(), cur().loc);
    }
    return advance();
  }
  bool accept(TokKind kind) {
    if (at(kind)) {
      advance();
      return true;
    }
    return false;
  }

  TcDef parseDef() {
    TcDef def;
    def.loc = expect(TokKind::KwDef).loc;
    def.name = expect(TokKind::Ident).text;
    expect(TokKind::LParen);
    if (!at(TokKind::RParen)) {
      do {
        def.params.push_back(parseParam());
      } while (accept(TokKind::Comma));
    }
    expect(TokKind::RParen);
    expect(TokKind::Arrow);
    expect(TokKind::LParen);
    do {
      def.returns.push_back(expect(TokKind::Ident).text);
    } while (accept(TokKind::Comma));
    expect(TokKind::RParen);
    expect(TokKind::LBrace);
    while (!at(TokKind::RBrace)) {
      def.stmts.push_back(parseStmt());
    }
    expect(TokKind::RBrace);
    if (def.stmts.empty()) {
      throwError(ErrorKind::Parse, "def has no statements", def.loc);
    }
    return def;
  }

  Param parseParam() {
    Param p;
    p.loc = cur().loc;
    if (accept(TokKind::KwFloat)) {
      p.elemKind = ElemKind::Float;
    } else if (accept(TokKind::KwInt)) {
      p.elemKind = ElemKind::Int;
    } else {
      throwError(ErrorKind::Parse, "expected parameter type 'float' or 'int'", cur().loc);
    }
    if (accept(TokKind::LParen)) {
      do {
        p.dims.push_back(expect(TokKind::Ident).text);
      } while (accept(TokKind::Comma));
      expect(TokKind::RParen);
    }
    p.name = expect(TokKind::Ident).text;
    return p;
  }

  // stmt := id '(' exp_list ')' assign_op exp [where ...]
  //       | id '=' id '(' exp_list ')'                 (def call, rejected later)
  //       | '(' id_list ')' '=' id '(' exp_list ')'    (def call, rejected later)
  Stmt parseStmt() {
    Stmt stmt;
    stmt.loc = cur().loc;

    if (at(TokKind::LParen)) {
      // (a, b) = callee(...)
      advance();
      stmt.isDefCall = true;
      do {
        stmt.defCallResults.push_back(expect(TokKind::Ident).text);
      } while (accept(TokKind::Comma));
      expect(TokKind::RParen);
      expect(TokKind::Assign);
      stmt.op = AssignOp::Assign;
      stmt.rhs = parsePrimary();
      return stmt;
    }

    Token lhs = expect(TokKind::Ident);
    stmt.lhsTensor = lhs.text;

    if (at(TokKind::Assign) && peek().kind == TokKind::Ident && peek(2).kind == TokKind::LParen) {
      // a = callee(...): single-result def call form. A comprehension LHS
      // always carries subscripts, so a bare identifier here is a call.
      advance();
      stmt.isDefCall = true;
      stmt.defCallResults.push_back(lhs.text);
      stmt.op = AssignOp::Assign;
      stmt.rhs = parsePrimary();
      return stmt;
    }

    expect(TokKind::LParen);
    if (!at(TokKind::RParen)) {
      do {
        stmt.lhsIndices.push_back(parseExpr());
      } while (accept(TokKind::Comma));
    }
    expect(TokKind::RParen);

    switch (cur().kind) {
      case TokKind::Assign:
        stmt.op = AssignOp::Assign;
        break;
      case TokKind::PlusEq:
        stmt.op = AssignOp::PlusEq;
        break;
      case TokKind::PlusEqBang:
        stmt.op = AssignOp::PlusEqBang;
        break;
      case TokKind::TimesEq:
        stmt.op = AssignOp::TimesEq;
        break;
      case TokKind::TimesEqBang:
        stmt.op = AssignOp::TimesEqBang;
        break;
      case TokKind::MinEq:
        stmt.op = AssignOp::MinEq;
        break;
      case TokKind::MinEqBang:
        stmt.op = AssignOp::MinEqBang;
        break;
      case TokKind::MaxEq:
        stmt.op = AssignOp::MaxEq;
        break;
      case TokKind::MaxEqBang:
        stmt.op = AssignOp::MaxEqBang;
        break;
      default:
        throwError(ErrorKind::Parse, "expected an assignment operator", cur().loc);
    }
    advance();

    stmt.rhs = parseExpr();

    if (accept(TokKind::KwWhere)) {
      do {
        RangeConstraint rc;
        Token var = expect(TokKind::Ident);
        rc.var = var.text;
        rc.loc = var.loc;
        Token kw = expect(TokKind::Ident);
        if (kw.text != "in") {
          throwError(ErrorKind::Parse, "expected 'in' after range variable", kw.loc);
        }
        rc.lo = parseAdditive();
        expect(TokKind::Colon);
        rc.hi = parseAdditive();
        stmt.where.push_back(std::move(rc));
      } while (accept(TokKind::Comma));
    }
    return stmt;
  }

  // Precedence, loosest first: ?: then || && ==/!= </<=/>/>= +- */ unary.
  ExprPtr parseExpr() {
    ExprPtr cond = parseOr();
    if (at(TokKind::Question)) {
      SourceLoc loc = advance().loc;
      ExprPtr thenE = parseExpr();
      expect(TokKind::Colon);
      ExprPtr elseE = parseExpr(); // right-nested
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Ternary;
      e->loc = loc;
      e->args = {cond, thenE, elseE};
      return e;
    }
    return cond;
  }

  ExprPtr parseOr() {
    ExprPtr lhs = parseAnd();
    while (at(TokKind::OrOr)) {
      SourceLoc loc = advance().loc;
      lhs = makeBinary("||", lhs, parseAnd(), loc);
    }
    return lhs;
  }

  ExprPtr parseAnd() {
    ExprPtr lhs = parseEquality();
    while (at(TokKind::AndAnd)) {
      SourceLoc loc = advance().loc;
      lhs = makeBinary("&&", lhs, parseEquality(), loc);
    }
    return lhs;
  }

  ExprPtr parseEquality() {
    ExprPtr lhs = parseRelational();
    while (at(TokKind::EqEq) || at(TokKind::Ne)) {
      std::string op = at(TokKind::EqEq) ? "==" : "!=";
      SourceLoc loc = advance().loc;
      lhs = makeBinary(op, lhs, parseRelational(), loc);
    }
    return lhs;
  }

  ExprPtr parseRelational() {
    ExprPtr lhs = parseAdditive();
    while (at(TokKind::Lt) || at(TokKind::Gt) || at(TokKind::Le) || at(TokKind::Ge)) {
      std::string op;
      switch (cur().kind) {
        case TokKind::Lt:
          op = "<";
          break;
        case TokKind::Gt:
          op = ">";
          break;
        case TokKind::Le:
          op = "<=";
          break;
        default:
          op = ">=";
          break;
      }
      SourceLoc loc = advance().loc;
      lhs = makeBinary(op, lhs, parseAdditive(), loc);
    }
    return lhs;
  }

  ExprPtr parseAdditive() {
    ExprPtr lhs = parseMultiplicative();
    while (at(TokKind::Plus) || at(TokKind::Minus)) {
      std::string op = at(TokKind::Plus) ? "+" : "-";
      SourceLoc loc = advance().loc;
      lhs = makeBinary(op, lhs, parseMultiplicative(), loc);
    }
    return lhs;
  }

  ExprPtr parseMultiplicative() {
    ExprPtr lhs = parseUnary();
    while (at(TokKind::Star) || at(TokKind::Slash)) {
      std::string op = at(TokKind::Star) ? "*" : "/";
      SourceLoc loc = advance().loc;
      lhs = makeBinary(op, lhs, parseUnary(), loc);
    }
    return lhs;
  }

  ExprPtr parseUnary() {
    if (at(TokKind::Minus) || at(TokKind::Not)) {
      std::string op = at(TokKind::Minus) ? "-" : "!";
      SourceLoc loc = advance().loc;
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Unary;
      e->op = op;
      e->loc = loc;
      e->args = {parseUnary()};
      return e;
    }
    return parsePrimary();
  }

  ExprPtr parsePrimary() {
    if (at(TokKind::IntLit)) {
      Token t = advance();
      return makeIntConst(t.intValue, t.loc);
    }
    if (at(TokKind::FloatLit)) {
      Token t = advance();
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::FloatConst;
      e->floatValue = t.floatValue;
      e->loc = t.loc;
      return e;
    }
    if (accept(TokKind::LParen)) {
      ExprPtr e = parseExpr();
      expect(TokKind::RParen);
      return e;
    }
    if (at(TokKind::Ident)) {
      Token id = advance();
      if (accept(TokKind::LParen)) {
        std::vector<ExprPtr> args;
        if (!at(TokKind::RParen)) {
          do {
            args.push_back(parseExpr());
          } while (accept(TokKind::Comma));
        }
        expect(TokKind::RParen);
        return makeAccess(id.text, std::move(args), id.loc);
      }
      if (at(TokKind::Dot) && peek().kind == TokKind::IntLit) {
        advance();
        Token num = advance();
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::DimOf;
        e->name = id.text;
        e->dim = static_cast<int>(num.intValue);
        e->loc = id.loc;
        return e;
      }
      return makeIdent(id.text, id.loc);
    }
    std::ostringstream ss;
    ss << "expected an expression, got " << tokKindName(cur().kind);
    throwError(ErrorKind::Parse, ss.str(), cur().loc);
  }

  static ExprPtr makeBinary(const std::string& op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->op = op;
    e->loc = loc;
    e->args = {std::move(lhs), std::move(rhs)};
    return e;
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

} // namespace

Program parse(const std::string& source) {
  return Parser(source).parseProgram();
}

TcDef parseOneDef(const std::string& source) {
  Program p = parse(source);
  return p.only();
}

} // namespace lang
} // namespace tc
