"""Lowering to three-address normalized form with a source map.

Every compound subexpression is hoisted into a fresh ``tmp_k`` assignment so
each statement carries one flat expression (operands are literals or
variables).  Calls survive only as the entire right-hand side of an
assignment.  Loop conditions are special: their hoisted temporaries live in a
``prelude`` attached to the loop, executed before every condition test, so
semantics are preserved; the WP engine uses the prelude's defining equations
when reasoning about loop heads.

Each normalized node keeps the span of the source expression it came from,
and the source map can render any node back to original text.
"""

from __future__ import annotations

from dataclasses import dataclass, KW_ONLY

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
    Or,
    Program,
    Return,
    Sort,
    Span,
    Stmt,
    Sub,
    Var,
    VarDecl,
    While,
    expr_text,
)


@dataclass(eq=False)
class CallRhs:
    name: str
    args: list[Expr]  # leaves only
    _: KW_ONLY
    span: Span
    sort: Sort | None = None


@dataclass(eq=False)
class NStmt:
    _: KW_ONLY
    span: Span
    index: int = -1  # dense program order within the function


@dataclass(eq=False)
class NAssign(NStmt):
    target: str
    rhs: Expr | CallRhs
    declares: bool = False
    decl_sort: Sort | None = None
    synthetic: bool = False  # a normalizer-introduced temporary


@dataclass(eq=False)
class NIf(NStmt):
    cond: Expr
    then_stmts: list[NStmt]
    else_stmts: list[NStmt]


@dataclass(eq=False)
class NWhile(NStmt):
    prelude: list[NAssign]
    cond: Expr
    invariant: Expr
    body: list[NStmt]


@dataclass(eq=False)
class NReturn(NStmt):
    value: Expr | None


@dataclass(eq=False)
class NFunc:
    name: str
    params: list
    return_sort: Sort
    requires: list[Expr]
    ensures: list[Expr]
    body: list[NStmt]
    pure: bool
    temp_count: int = 0
    span: Span | None = None


@dataclass(eq=False)
class NormProgram:
    globals: list[GlobalDecl]
    functions: list[NFunc]
    source: str = ""
    filename: str = "<input>"

    def function(self, name: str) -> NFunc:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)


@dataclass(frozen=True)
class LocationDescription:
    normalized_text: str
    line: int
    col: int
    end_col: int
    original_text: str


class UnknownNode(Exception):
    pass


class SourceMap:
    """Maps normalized nodes back to spans and renders original snippets."""

    def __init__(self, source: str, filename: str):
        self.source_lines = source.splitlines()
        self.filename = filename
        self._spans: dict[int, Span] = {}
        self.entries: list[tuple[int, str, int]] = []  # (stmt index, text, orig line)

    def register(self, node, span: Span) -> None:
        self._spans[id(node)] = span

    def adopt(self, stmts: list) -> None:
        """Register a (cloned or rebuilt) statement tree by its own spans."""
        for s in stmts:
            self.register(s, s.span)
            match s:
                case NAssign(rhs=rhs):
                    self._adopt_expr(rhs)
                case NIf(cond=c, then_stmts=tb, else_stmts=eb):
                    self._adopt_expr(c)
                    self.adopt(tb)
                    self.adopt(eb)
                case NWhile(prelude=pre, cond=c, body=b):
                    self.adopt(pre)
                    self._adopt_expr(c)
                    self.adopt(b)
                case NReturn(value=v):
                    if v is not None:
                        self._adopt_expr(v)

    def _adopt_expr(self, e) -> None:
        self.register(e, e.span)
        if isinstance(e, CallRhs):
            for a in e.args:
                self.register(a, a.span)

    def span_of(self, node) -> Span:
        try:
            return self._spans[id(node)]
        except KeyError:
            raise UnknownNode(f"node {node!r} was not produced by this normalization") from None

    def snippet(self, span: Span) -> str:
        if span.line == span.end_line:
            line = self.source_lines[span.line - 1]
            return line[span.col - 1 : span.end_col]
        first = self.source_lines[span.line - 1][span.col - 1 :]
        rest = [self.source_lines[i] for i in range(span.line, span.end_line - 1)]
        last = self.source_lines[span.end_line - 1][: span.end_col]
        return " ".join(s.strip() for s in [first, *rest, last])


def render_location(node, source_map: SourceMap) -> LocationDescription:
    span = source_map.span_of(node)
    if isinstance(node, CallRhs):
        text = f"{node.name}({', '.join(expr_text(a) for a in node.args)})"
    elif isinstance(node, Expr):
        text = expr_text(node)
    else:
        text = nstmt_text(node)
    return LocationDescription(text, span.line, span.col, span.end_col, source_map.snippet(span))


_LEAVES = (IntLit, BoolLit, Var)


def is_leaf(e: Expr) -> bool:
    return isinstance(e, _LEAVES)


def is_flat(e: Expr) -> bool:
    """Flat: at most one operator deep, operands are literals or variables."""
    match e:
        case IntLit() | BoolLit() | Var():
            return True
        case Neg(arg=a) | Not(arg=a):
            return is_leaf(a)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r):
            return is_leaf(l) and is_leaf(r)
        case Cmp(left=l, right=r) | And(left=l, right=r) | Or(left=l, right=r):
            return is_leaf(l) and is_leaf(r)
    return False


class _FuncNormalizer:
    def __init__(self, fn_name: str, source_map: SourceMap, temp_start: int = 0):
        self.fn_name = fn_name
        self.sm = source_map
        self.temp_count = temp_start
        self.temp_sorts: dict[str, Sort] = {}
        self.index = 0

    def next_index(self) -> int:
        self.index += 1
        return self.index - 1

    def fresh_temp(self, sort: Sort) -> str:
        name = f"tmp_{self.temp_count}"
        self.temp_count += 1
        self.temp_sorts[name] = sort
        return name

    # -- expression flattening ------------------------------------------------

    def hoist(self, e: Expr, out: list[NAssign]) -> Var:
        """Reduce e to a variable, emitting temporary assignments."""
        flat = self.flatten(e, out)
        if isinstance(flat, Var):
            return flat
        assert flat.sort is not None, "normalizer requires a typechecked program"
        name = self.fresh_temp(flat.sort)
        assign = NAssign(
            name, flat, declares=True, decl_sort=flat.sort, synthetic=True,
            span=e.span, index=self.next_index(),
        )
        self.sm.register(assign, e.span)
        out.append(assign)
        var = Var(name, span=e.span, sort=flat.sort)
        self.sm.register(var, e.span)
        return var

    def leaf(self, e: Expr, out: list[NAssign]) -> Expr:
        """Reduce e to a literal or variable."""
        if is_leaf(e):
            self.sm.register(e, e.span)
            return e
        return self.hoist(e, out)

    def flatten(self, e: Expr, out: list[NAssign]) -> Expr | CallRhs:
        """Reduce e to a flat expression (or a call on leaf arguments)."""
        match e:
            case IntLit() | BoolLit() | Var():
                self.sm.register(e, e.span)
                return e
            case CallExpr(name=n, args=args):
                leaf_args = [self.leaf(a, out) for a in args]
                rhs = CallRhs(n, leaf_args, span=e.span, sort=e.sort)
                self.sm.register(rhs, e.span)
                return rhs
            case Neg(arg=a):
                node = Neg(self.leaf(a, out), span=e.span, sort=e.sort)
            case Not(arg=a):
                node = Not(self.leaf(a, out), span=e.span, sort=e.sort)
            case Add(left=l, right=r):
                node = Add(self.leaf(l, out), self.leaf(r, out), span=e.span, sort=e.sort)
            case Sub(left=l, right=r):
                node = Sub(self.leaf(l, out), self.leaf(r, out), span=e.span, sort=e.sort)
            case Mul(left=l, right=r):
                node = Mul(self.leaf(l, out), self.leaf(r, out), span=e.span, sort=e.sort)
            case Cmp(op=op, left=l, right=r):
                node = Cmp(op, self.leaf(l, out), self.leaf(r, out), span=e.span, sort=e.sort)
            case And(left=l, right=r):
                node = And(self.leaf(l, out), self.leaf(r, out), span=e.span, sort=e.sort)
            case Or(left=l, right=r):
                node = Or(self.leaf(l, out), self.leaf(r, out), span=e.span, sort=e.sort)
            case _:
                raise TypeError(f"cannot normalize expression {e!r}")
        self.sm.register(node, e.span)
        return node

    def flat_value(self, e: Expr, out: list[NAssign]) -> Expr:
        """Flat expression with no call at the top (conditions, returns)."""
        flat = self.flatten(e, out)
        if isinstance(flat, CallRhs):
            name = self.fresh_temp(flat.sort)
            assign = NAssign(
                name, flat, declares=True, decl_sort=flat.sort, synthetic=True,
                span=e.span, index=self.next_index(),
            )
            self.sm.register(assign, e.span)
            out.append(assign)
            var = Var(name, span=e.span, sort=flat.sort)
            self.sm.register(var, e.span)
            return var
        return flat

    # -- statements ----------------------------------------------------------

    def do_block(self, stmts) -> list[NStmt]:
        out: list[NStmt] = []
        seq = stmts.stmts if isinstance(stmts, Block) else stmts
        for s in seq:
            self.do_stmt(s, out)
        return out

    def do_stmt(self, s, out: list[NStmt]) -> None:
        match s:
            case VarDecl(name=n, decl_sort=srt, init=e):
                rhs = self.flatten(e, out)
                assign = NAssign(n, rhs, declares=True, decl_sort=srt, span=s.span, index=self.next_index())
                self.sm.register(assign, s.span)
                out.append(assign)
            case Assign(target=t, value=e):
                rhs = self.flatten(e, out)
                assign = NAssign(t, rhs, span=s.span, index=self.next_index())
                self.sm.register(assign, s.span)
                out.append(assign)
            case If(cond=c, then_block=tb, else_block=eb):
                cond = self.flat_value(c, out)
                idx = self.next_index()
                node = NIf(
                    cond,
                    self.do_block(tb),
                    self.do_block(eb) if eb is not None else [],
                    span=s.span,
                    index=idx,
                )
                self.sm.register(node, s.span)
                out.append(node)
            case While(cond=c, invariant=inv, body=b):
                prelude: list[NAssign] = []
                cond = self.flat_value(c, prelude)
                idx = self.next_index()
                node = NWhile(prelude, cond, inv, self.do_block(b), span=s.span, index=idx)
                self.sm.register(node, s.span)
                out.append(node)
            case Return(value=e):
                value = None if e is None else self.flat_value(e, out)
                node = NReturn(value, span=s.span, index=self.next_index())
                self.sm.register(node, s.span)
                out.append(node)
            case Block():
                out.extend(self.do_block(s))
            # Already-normalized statements pass through (idempotence).
            case NAssign(target=t, rhs=rhs, declares=d, decl_sort=ds, synthetic=syn):
                rhs2 = rhs if isinstance(rhs, CallRhs) else self.flatten(rhs, out)
                node = NAssign(t, rhs2, declares=d, decl_sort=ds, synthetic=syn, span=s.span, index=self.next_index())
                self.sm.register(node, s.span)
                if isinstance(rhs, CallRhs):
                    for a in rhs.args:
                        self.sm.register(a, a.span)
                    self.sm.register(rhs, rhs.span)
                out.append(node)
            case NIf(cond=c, then_stmts=tb, else_stmts=eb):
                cond = self.flat_value(c, out)
                idx = self.next_index()
                node = NIf(cond, self.do_block(tb), self.do_block(eb), span=s.span, index=idx)
                self.sm.register(node, s.span)
                out.append(node)
            case NWhile(prelude=pre, cond=c, invariant=inv, body=b):
                new_pre: list[NStmt] = []
                for p in pre:
                    self.do_stmt(p, new_pre)
                cond = self.flat_value(c, new_pre)
                idx = self.next_index()
                node = NWhile(new_pre, cond, inv, self.do_block(b), span=s.span, index=idx)
                self.sm.register(node, s.span)
                out.append(node)
            case NReturn(value=e):
                value = None if e is None else self.flat_value(e, out)
                node = NReturn(value, span=s.span, index=self.next_index())
                self.sm.register(node, s.span)
                out.append(node)
            case _:
                raise TypeError(f"cannot normalize statement {s!r}")


def normalize(program: Program | NormProgram) -> tuple[NormProgram, SourceMap]:
    """Lower a typechecked program to normalized form.

    Semantics are preserved for every input; the result satisfies the
    flatness invariant (checkable with is_flat) and normalizing an
    already-normalized program is the identity up to node identity.
    """
    sm = SourceMap(program.source, program.filename)
    funcs = []
    for fn in program.functions:
        norm = _FuncNormalizer(fn.name, sm, temp_start=_temp_start(fn))
        body = norm.do_block(fn.body)
        nf = NFunc(
            fn.name,
            list(fn.params),
            fn.return_sort,
            list(fn.requires),
            list(fn.ensures),
            body,
            fn.pure,
            temp_count=len([t for t in assigned_vars(body) if t.startswith("tmp_")]),
            span=fn.span,
        )
        funcs.append(nf)
        for idx, stmt in _iter_stmts(body):
            sm.entries.append((idx, nstmt_text(stmt), sm.span_of(stmt).line))
    np = NormProgram(program.globals, funcs, source=program.source, filename=program.filename)
    return np, sm


def _temp_start(fn) -> int:
    if isinstance(fn, FunctionDef):
        return 0
    existing = [int(t[4:]) for t in assigned_vars(fn.body) if t.startswith("tmp_")]
    return max(existing) + 1 if existing else 0


def _iter_stmts(stmts: list[NStmt]):
    for s in stmts:
        match s:
            case NIf(then_stmts=tb, else_stmts=eb):
                yield s.index, s
                yield from _iter_stmts(tb)
                yield from _iter_stmts(eb)
            case NWhile(prelude=pre, body=b):
                yield from _iter_stmts(pre)
                yield s.index, s
                yield from _iter_stmts(b)
            case _:
                yield s.index, s


def assigned_vars(stmts: list[NStmt]) -> list[str]:
    """Variables assigned anywhere in the statements, in first-write order."""
    seen: dict[str, None] = {}

    def walk(seq: list[NStmt]) -> None:
        for s in seq:
            match s:
                case NAssign(target=t):
                    seen.setdefault(t)
                case NIf(then_stmts=tb, else_stmts=eb):
                    walk(tb)
                    walk(eb)
                case NWhile(prelude=pre, body=b):
                    walk(pre)
                    walk(b)

    walk(stmts)
    return list(seen)


def nstmt_text(s: NStmt) -> str:
    match s:
        case NAssign(target=t, rhs=CallRhs(name=n, args=args)):
            return f"{t} = {n}({', '.join(expr_text(a) for a in args)});"
        case NAssign(target=t, rhs=e):
            return f"{t} = {expr_text(e)};"
        case NIf(cond=c):
            return f"if ({expr_text(c)})"
        case NWhile(cond=c):
            return f"while ({expr_text(c)})"
        case NReturn(value=None):
            return "return;"
        case NReturn(value=e):
            return f"return {expr_text(e)};"
    raise TypeError(f"unknown normalized statement {s!r}")


def dump_normalized(np: NormProgram, sm: SourceMap, fname: str | None = None) -> str:
    """Render normalized functions with original line numbers in the margin."""
    lines: list[str] = []
    for fn in np.functions:
        if fname is not None and fn.name != fname:
            continue
        params = ", ".join(f"{p.sort} {p.name}" for p in fn.params)
        lines.append(f"{fn.return_sort} {fn.name}({params}):")
        lines.extend(_dump_stmts(fn.body, sm, 1))
        lines.append("")
    return "\n".join(lines)


def _dump_stmts(stmts: list[NStmt], sm: SourceMap, depth: int) -> list[str]:
    out = []
    pad = "  " * depth

    def emit(s: NStmt, text: str) -> None:
        out.append(f"{sm.span_of(s).line:>4} | {pad}{text}")

    for s in stmts:
        match s:
            case NIf(then_stmts=tb, else_stmts=eb):
                emit(s, nstmt_text(s) + " {")
                out.extend(_dump_stmts(tb, sm, depth + 1))
                if eb:
                    out.append(f"     | {pad}" + "} else {")
                    out.extend(_dump_stmts(eb, sm, depth + 1))
                out.append(f"     | {pad}" + "}")
            case NWhile(prelude=pre, body=b, invariant=inv):
                for p in pre:
                    emit(p, nstmt_text(p) + "  [loop-cond]")
                emit(s, f"/*@ loop invariant {expr_text(inv)}; @*/")
                emit(s, nstmt_text(s) + " {")
                out.extend(_dump_stmts(b, sm, depth + 1))
                out.append(f"     | {pad}" + "}")
            case _:
                emit(s, nstmt_text(s))
    return out
