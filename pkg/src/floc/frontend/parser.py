"""Recursive-descent parser for MCL.

Grammar summary:

    program   := (global | function)*
    global    := type IDENT ("=" literal)? ";"
    function  := contract? "pure"? type IDENT "(" params? ")" block
    contract  := "/*@" ("requires" expr ";")* ("ensures" expr ";")* "@*/"
    stmt      := decl | assign | if | while | return | block
    while     := "/*@" "loop" "invariant" expr ";" "@*/" "while" "(" expr ")" block

Operator precedence follows C.  Local declarations require an initializer;
every while loop requires exactly one invariant annotation.
"""

from __future__ import annotations

from floc.frontend.lexer import MclSyntaxError, Token, tokenize
from floc.frontend.syntax import (
    Add,
    And,
    Assign,
    Block,
    BoolLit,
    CallExpr,
    Cmp,
    Expr,
    FunctionDef,
    GlobalDecl,
    If,
    IntLit,
    Mul,
    Neg,
    Not,
    OldSym,
    Or,
    Param,
    Program,
    ResultSym,
    Return,
    Sort,
    Span,
    Stmt,
    Sub,
    Var,
    VarDecl,
    While,
)

_TYPE_TOKENS = ("int", "bool", "void")


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    # -- token helpers ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, *kinds: str) -> Token:
        tok = self.peek()
        if tok.kind not in kinds:
            shown = tok.value or "end of input"
            raise MclSyntaxError(
                f"expected {' or '.join(repr(k) for k in kinds)}, found {shown!r}",
                tok.line,
                tok.col,
                expected=kinds,
            )
        return self.take()

    def span_of(self, tok: Token) -> Span:
        return Span(self.filename, tok.line, tok.col, tok.line, tok.end_col)

    # -- top level ---------------------------------------------------------

    def parse_program(self, source: str) -> Program:
        globals_: list[GlobalDecl] = []
        functions: list[FunctionDef] = []
        while not self.at("EOF"):
            if self.at("ANNOT_OPEN") or self.at("pure"):
                functions.append(self.parse_function())
                continue
            ty_tok = self.expect(*_TYPE_TOKENS)
            name_tok = self.expect("IDENT")
            if self.at("("):
                functions.append(self.parse_function(ty_tok, name_tok, pure=False))
            else:
                globals_.append(self.parse_global_tail(ty_tok, name_tok))
        return Program(globals_, functions, source=source, filename=self.filename)

    def parse_global_tail(self, ty_tok: Token, name_tok: Token) -> GlobalDecl:
        sort = Sort(ty_tok.kind)
        init = None
        if self.at("="):
            self.take()
            init = self.parse_literal()
        end = self.expect(";")
        span = self.span_of(ty_tok).join(self.span_of(end))
        return GlobalDecl(name_tok.value, sort, init, span=span)

    def parse_literal(self) -> IntLit | BoolLit:
        tok = self.peek()
        if self.at("INT"):
            self.take()
            return IntLit(int(tok.value), span=self.span_of(tok))
        if self.at("true", "false"):
            self.take()
            return BoolLit(tok.kind == "true", span=self.span_of(tok))
        if self.at("-") and self.peek(1).kind == "INT":
            self.take()
            num = self.take()
            return IntLit(-int(num.value), span=self.span_of(tok).join(self.span_of(num)))
        raise MclSyntaxError(
            "expected literal", tok.line, tok.col, expected=("INT", "true", "false")
        )

    def parse_function(self, ty_tok: Token | None = None, name_tok: Token | None = None, pure: bool = False) -> FunctionDef:
        requires: list[Expr] = []
        ensures: list[Expr] = []
        first_tok = ty_tok
        if ty_tok is None:
            if self.at("ANNOT_OPEN"):
                first_tok = self.peek()
                requires, ensures = self.parse_contract()
            pure = False
            if self.at("pure"):
                self.take()
                pure = True
            ty_tok = self.expect(*_TYPE_TOKENS)
            name_tok = self.expect("IDENT")
            if first_tok is None:
                first_tok = ty_tok
        assert name_tok is not None
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            while True:
                p_ty = self.expect("int", "bool")
                p_name = self.expect("IDENT")
                params.append(
                    Param(p_name.value, Sort(p_ty.kind), span=self.span_of(p_ty).join(self.span_of(p_name)))
                )
                if not self.at(","):
                    break
                self.take()
        self.expect(")")
        body = self.parse_block()
        span = self.span_of(first_tok).join(body.span)
        return FunctionDef(
            name_tok.value,
            params,
            Sort(ty_tok.kind),
            requires,
            ensures,
            body,
            pure,
            span=span,
        )

    def parse_contract(self) -> tuple[list[Expr], list[Expr]]:
        self.expect("ANNOT_OPEN")
        requires: list[Expr] = []
        ensures: list[Expr] = []
        while self.at("requires"):
            self.take()
            requires.append(self.parse_expr())
            self.expect(";")
        while self.at("ensures"):
            self.take()
            ensures.append(self.parse_expr())
            self.expect(";")
        self.expect("ANNOT_CLOSE")
        return requires, ensures

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> Block:
        open_tok = self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.at("EOF"):
                raise MclSyntaxError("unterminated block", open_tok.line, open_tok.col)
            stmts.append(self.parse_stmt())
        close = self.expect("}")
        return Block(stmts, span=self.span_of(open_tok).join(self.span_of(close)))

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if self.at("ANNOT_OPEN"):
            return self.parse_while()
        if self.at("while"):
            raise MclSyntaxError(
                "while requires a loop invariant annotation (/*@ loop invariant ...; @*/)",
                tok.line,
                tok.col,
                expected=("ANNOT_OPEN",),
            )
        if self.at("{"):
            return self.parse_block()
        if self.at("if"):
            return self.parse_if()
        if self.at("return"):
            self.take()
            value = None if self.at(";") else self.parse_expr()
            end = self.expect(";")
            return Return(value, span=self.span_of(tok).join(self.span_of(end)))
        if self.at("int", "bool"):
            ty_tok = self.take()
            name = self.expect("IDENT")
            self.expect("=")
            init = self.parse_expr()
            end = self.expect(";")
            return VarDecl(
                name.value,
                Sort(ty_tok.kind),
                init,
                span=self.span_of(ty_tok).join(self.span_of(end)),
            )
        if self.at("IDENT"):
            name = self.take()
            self.expect("=")
            value = self.parse_expr()
            end = self.expect(";")
            return Assign(name.value, value, span=self.span_of(name).join(self.span_of(end)))
        raise MclSyntaxError(
            f"expected statement, found {tok.value or 'end of input'!r}",
            tok.line,
            tok.col,
            expected=("IDENT", "int", "bool", "if", "while", "return", "{"),
        )

    def parse_if(self) -> If:
        if_tok = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then_block = self.as_block(self.parse_stmt())
        else_block = None
        if self.at("else"):
            self.take()
            else_block = self.as_block(self.parse_stmt())
        span = self.span_of(if_tok).join((else_block or then_block).span)
        return If(cond, then_block, else_block, span=span)

    def parse_while(self) -> While:
        open_tok = self.expect("ANNOT_OPEN")
        self.expect("loop")
        self.expect("invariant")
        invariant = self.parse_expr()
        self.expect(";")
        self.expect("ANNOT_CLOSE")
        self.expect("while")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        body = self.as_block(self.parse_stmt())
        return While(cond, invariant, body, span=self.span_of(open_tok).join(body.span))

    def as_block(self, s: Stmt) -> Block:
        return s if isinstance(s, Block) else Block([s], span=s.span)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("||"):
            self.take()
            right = self.parse_and()
            left = Or(left, right, span=left.span.join(right.span))
        return left

    def parse_and(self) -> Expr:
        left = self.parse_equality()
        while self.at("&&"):
            self.take()
            right = self.parse_equality()
            left = And(left, right, span=left.span.join(right.span))
        return left

    def parse_equality(self) -> Expr:
        left = self.parse_relational()
        while self.at("==", "!="):
            op = self.take().kind
            right = self.parse_relational()
            left = Cmp(op, left, right, span=left.span.join(right.span))
        return left

    def parse_relational(self) -> Expr:
        left = self.parse_additive()
        while self.at("<", "<=", ">", ">="):
            op = self.take().kind
            right = self.parse_additive()
            left = Cmp(op, left, right, span=left.span.join(right.span))
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while self.at("+", "-"):
            op = self.take().kind
            right = self.parse_multiplicative()
            cls = Add if op == "+" else Sub
            left = cls(left, right, span=left.span.join(right.span))
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while self.at("*"):
            self.take()
            right = self.parse_unary()
            left = Mul(left, right, span=left.span.join(right.span))
        return left

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if self.at("-"):
            self.take()
            arg = self.parse_unary()
            return Neg(arg, span=self.span_of(tok).join(arg.span))
        if self.at("!"):
            self.take()
            arg = self.parse_unary()
            return Not(arg, span=self.span_of(tok).join(arg.span))
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if self.at("INT"):
            self.take()
            return IntLit(int(tok.value), span=self.span_of(tok))
        if self.at("true", "false"):
            self.take()
            return BoolLit(tok.kind == "true", span=self.span_of(tok))
        if self.at("RESULT"):
            self.take()
            return ResultSym(span=self.span_of(tok))
        if self.at("OLD"):
            self.take()
            self.expect("(")
            name = self.expect("IDENT")
            close = self.expect(")")
            return OldSym(name.value, span=self.span_of(tok).join(self.span_of(close)))
        if self.at("("):
            self.take()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.at("IDENT"):
            name = self.take()
            if self.at("("):
                self.take()
                args: list[Expr] = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.at(","):
                            break
                        self.take()
                close = self.expect(")")
                return CallExpr(name.value, args, span=self.span_of(name).join(self.span_of(close)))
            return Var(name.value, span=self.span_of(name))
        raise MclSyntaxError(
            f"expected expression, found {tok.value or 'end of input'!r}",
            tok.line,
            tok.col,
            expected=("INT", "IDENT", "true", "false", "(", "!", "-"),
        )


def parse(text: str, filename: str = "<input>") -> Program:
    """Parse MCL source into a Program.  Raises MclSyntaxError on bad input."""
    parser = _Parser(tokenize(text, filename), filename)
    return parser.parse_program(text)
