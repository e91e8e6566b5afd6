"""First-order formula IR over int and bool sorts.

Formulas carry native operators only; function calls never reach this layer
(the VC generator eliminates them by contract summarization).  Smart
constructors fold constants but only across literal operands: a fold never
erases a subterm containing a variable, which is what guarantees that an
instrumented placeholder survives into the proof obligations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from floc.frontend.syntax import Sort


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class IntConst(Formula):
    value: int


@dataclass(frozen=True)
class BoolConst(Formula):
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class VarRef(Formula):
    name: str
    var_sort: Sort


@dataclass(frozen=True)
class Neg(Formula):
    arg: Formula


@dataclass(frozen=True)
class Add(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Sub(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Mul(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Lt(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Le(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Gt(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Ge(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eq(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Ne(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Implies(Formula):
    antecedent: Formula
    consequent: Formula


@dataclass(frozen=True)
class Ite(Formula):
    cond: Formula
    then_term: Formula
    else_term: Formula


SortedVars = tuple[tuple[str, Sort], ...]


@dataclass(frozen=True)
class Forall(Formula):
    vars: SortedVars
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    vars: SortedVars
    body: Formula


# ---------------------------------------------------------------------------
# Smart constructors (literal-only folding)
# ---------------------------------------------------------------------------


def _lit(f: Formula) -> bool:
    return isinstance(f, (IntConst, BoolConst))


def f_and(*items: Formula) -> Formula:
    flat: list[Formula] = []
    for it in items:
        if isinstance(it, And):
            flat.extend(it.items)
        else:
            flat.append(it)
    if all(_lit(x) for x in flat):
        return BoolConst(all(x.value for x in flat))
    # Dropping neutral literals erases no variables.
    kept = [x for x in flat if x != TRUE]
    if len(kept) == 1:
        return kept[0]
    return And(tuple(kept))


def f_or(*items: Formula) -> Formula:
    flat: list[Formula] = []
    for it in items:
        if isinstance(it, Or):
            flat.extend(it.items)
        else:
            flat.append(it)
    if all(_lit(x) for x in flat):
        return BoolConst(any(x.value for x in flat))
    kept = [x for x in flat if x != FALSE]
    if len(kept) == 1:
        return kept[0]
    return Or(tuple(kept))


_NEGATED_CMP = {Lt: Ge, Le: Gt, Gt: Le, Ge: Lt, Eq: Ne, Ne: Eq}


def f_not(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return BoolConst(not f.value)
    if isinstance(f, Not):
        return f.arg
    cls = _NEGATED_CMP.get(type(f))
    if cls is not None:
        return cls(f.left, f.right)
    return Not(f)


def f_implies(a: Formula, b: Formula) -> Formula:
    if _lit(a) and _lit(b):
        return BoolConst((not a.value) or b.value)
    if a == TRUE:
        return b
    return Implies(a, b)


def f_neg(a: Formula) -> Formula:
    if isinstance(a, IntConst):
        return IntConst(-a.value)
    return Neg(a)


def _arith(cls, op, a: Formula, b: Formula) -> Formula:
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return IntConst(op(a.value, b.value))
    return cls(a, b)


def f_add(a: Formula, b: Formula) -> Formula:
    return _arith(Add, lambda x, y: x + y, a, b)


def f_sub(a: Formula, b: Formula) -> Formula:
    return _arith(Sub, lambda x, y: x - y, a, b)


def f_mul(a: Formula, b: Formula) -> Formula:
    return _arith(Mul, lambda x, y: x * y, a, b)


_CMP_FOLD = {
    Lt: lambda x, y: x < y,
    Le: lambda x, y: x <= y,
    Gt: lambda x, y: x > y,
    Ge: lambda x, y: x >= y,
    Eq: lambda x, y: x == y,
    Ne: lambda x, y: x != y,
}


def f_cmp(cls, a: Formula, b: Formula) -> Formula:
    if _lit(a) and _lit(b):
        return BoolConst(_CMP_FOLD[cls](a.value, b.value))
    return cls(a, b)


def f_ite(c: Formula, t: Formula, e: Formula) -> Formula:
    if _lit(c) and _lit(t) and _lit(e):
        return t if c.value else e
    return Ite(c, t, e)


# ---------------------------------------------------------------------------
# Traversal, free variables, substitution
# ---------------------------------------------------------------------------


def _children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case Neg(arg=a) | Not(arg=a):
            return (a,)
        case Add() | Sub() | Mul() | Lt() | Le() | Gt() | Ge() | Eq() | Ne():
            return (f.left, f.right)
        case And(items=items) | Or(items=items):
            return items
        case Implies(antecedent=a, consequent=b):
            return (a, b)
        case Ite(cond=c, then_term=t, else_term=e):
            return (c, t, e)
        case Forall(body=b) | Exists(body=b):
            return (b,)
    return ()


def free_vars(f: Formula) -> dict[str, Sort]:
    """Free variables with their sorts, in first-occurrence order."""
    out: dict[str, Sort] = {}

    def walk(g: Formula, bound: frozenset[str]) -> None:
        match g:
            case VarRef(name=n, var_sort=s):
                if n not in bound:
                    out.setdefault(n, s)
            case Forall(vars=vs, body=b) | Exists(vars=vs, body=b):
                walk(b, bound | {n for n, _ in vs})
            case _:
                for c in _children(g):
                    walk(c, bound)

    walk(f, frozenset())
    return out


def _rebuild(f: Formula, children: tuple[Formula, ...]) -> Formula:
    match f:
        case Neg():
            return f_neg(children[0])
        case Not():
            return f_not(children[0])
        case Add():
            return f_add(children[0], children[1])
        case Sub():
            return f_sub(children[0], children[1])
        case Mul():
            return f_mul(children[0], children[1])
        case Lt() | Le() | Gt() | Ge() | Eq() | Ne():
            return f_cmp(type(f), children[0], children[1])
        case And():
            return f_and(*children)
        case Or():
            return f_or(*children)
        case Implies():
            return f_implies(children[0], children[1])
        case Ite():
            return f_ite(children[0], children[1], children[2])
    raise TypeError(f"cannot rebuild {f!r}")


class SortMismatch(Exception):
    pass


def substitute(f: Formula, binding: dict[str, Formula]) -> Formula:
    """Capture-avoiding simultaneous substitution."""
    if not binding:
        return f

    def walk(g: Formula, bnd: dict[str, Formula]) -> Formula:
        if not bnd:
            return g
        match g:
            case VarRef(name=n):
                if n in bnd:
                    repl = bnd[n]
                    if isinstance(repl, VarRef) and repl.var_sort is not g.var_sort:
                        raise SortMismatch(f"substituting {repl.var_sort} for {g.var_sort} variable {n!r}")
                    return repl
                return g
            case IntConst() | BoolConst():
                return g
            case Forall(vars=vs, body=b) | Exists(vars=vs, body=b):
                names = {n for n, _ in vs}
                inner = {k: v for k, v in bnd.items() if k not in names}
                if not inner:
                    return g
                # Rename binders that would capture replacement variables.
                clash = names & {
                    n for v in inner.values() for n in free_vars(v)
                }
                if clash:
                    renames: dict[str, Formula] = {}
                    new_vs = []
                    used = set(names) | {n for v in inner.values() for n in free_vars(v)} | set(free_vars(b))
                    for n, s in vs:
                        if n in clash:
                            k = 1
                            while f"{n}_{k}" in used:
                                k += 1
                            fresh = f"{n}_{k}"
                            used.add(fresh)
                            renames[n] = VarRef(fresh, s)
                            new_vs.append((fresh, s))
                        else:
                            new_vs.append((n, s))
                    b = walk(b, renames)
                    vs = tuple(new_vs)
                body2 = walk(b, inner)
                return Forall(vs, body2) if isinstance(g, Forall) else Exists(vs, body2)
            case _:
                kids = _children(g)
                new_kids = tuple(walk(c, bnd) for c in kids)
                if new_kids == kids:
                    return g
                return _rebuild(g, new_kids)

    return walk(f, dict(binding))


# ---------------------------------------------------------------------------
# Evaluation (reference semantics over Python ints/bools)
# ---------------------------------------------------------------------------


def eval_formula(f: Formula, env: dict[str, int | bool]) -> int | bool:
    match f:
        case IntConst(value=v) | BoolConst(value=v):
            return v
        case VarRef(name=n):
            return env[n]
        case Neg(arg=a):
            return -eval_formula(a, env)
        case Not(arg=a):
            return not eval_formula(a, env)
        case Add(left=l, right=r):
            return eval_formula(l, env) + eval_formula(r, env)
        case Sub(left=l, right=r):
            return eval_formula(l, env) - eval_formula(r, env)
        case Mul(left=l, right=r):
            return eval_formula(l, env) * eval_formula(r, env)
        case Lt(left=l, right=r):
            return eval_formula(l, env) < eval_formula(r, env)
        case Le(left=l, right=r):
            return eval_formula(l, env) <= eval_formula(r, env)
        case Gt(left=l, right=r):
            return eval_formula(l, env) > eval_formula(r, env)
        case Ge(left=l, right=r):
            return eval_formula(l, env) >= eval_formula(r, env)
        case Eq(left=l, right=r):
            return eval_formula(l, env) == eval_formula(r, env)
        case Ne(left=l, right=r):
            return eval_formula(l, env) != eval_formula(r, env)
        case And(items=items):
            return all(eval_formula(x, env) for x in items)
        case Or(items=items):
            return any(eval_formula(x, env) for x in items)
        case Implies(antecedent=a, consequent=b):
            return (not eval_formula(a, env)) or bool(eval_formula(b, env))
        case Ite(cond=c, then_term=t, else_term=e):
            return eval_formula(t, env) if eval_formula(c, env) else eval_formula(e, env)
    raise TypeError(f"cannot evaluate {f!r}")


# ---------------------------------------------------------------------------
# Canonical text form
# ---------------------------------------------------------------------------

_OP_TEXT = {Add: "+", Sub: "-", Mul: "*", Lt: "<", Le: "<=", Gt: ">", Ge: ">=", Eq: "==", Ne: "!="}


def format_formula(f: Formula) -> str:
    """Fully parenthesized infix rendering with sorted-var binders."""
    match f:
        case IntConst(value=v):
            return str(v)
        case BoolConst(value=v):
            return "true" if v else "false"
        case VarRef(name=n):
            return n
        case Neg(arg=a):
            return f"(-{format_formula(a)})"
        case Not(arg=a):
            return f"(!{format_formula(a)})"
        case And(items=items):
            return "(" + " && ".join(format_formula(x) for x in items) + ")"
        case Or(items=items):
            return "(" + " || ".join(format_formula(x) for x in items) + ")"
        case Implies(antecedent=a, consequent=b):
            return f"({format_formula(a)} ==> {format_formula(b)})"
        case Ite(cond=c, then_term=t, else_term=e):
            return f"ite({format_formula(c)}, {format_formula(t)}, {format_formula(e)})"
        case Forall(vars=vs, body=b):
            return f"forall {_binder_text(vs)}. {format_formula(b)}"
        case Exists(vars=vs, body=b):
            return f"exists {_binder_text(vs)}. {format_formula(b)}"
        case _:
            op = _OP_TEXT.get(type(f))
            if op is not None:
                return f"({format_formula(f.left)} {op} {format_formula(f.right)})"
    raise TypeError(f"cannot format {f!r}")


def _binder_text(vs: SortedVars) -> str:
    return ", ".join(f"{n}:{s.value}" for n, s in vs)


# ---------------------------------------------------------------------------
# Classified quantified queries
# ---------------------------------------------------------------------------


class UnclassifiedVariable(Exception):
    def __init__(self, name: str):
        super().__init__(f"free variable {name!r} is not classified as input, placeholder, or auxiliary")
        self.name = name


@dataclass(frozen=True)
class QuantifiedQuery:
    """The variable-classified query <inputs i, placeholder c, auxiliaries t, body>.

    Closing it as forall(i). exists(c). forall(t). body yields a sentence.
    """

    inputs: SortedVars
    placeholder: tuple[str, Sort] | None
    auxiliaries: SortedVars
    body: Formula

    def closure(self) -> Formula:
        f = self.body
        if self.auxiliaries:
            f = Forall(self.auxiliaries, f)
        if self.placeholder is not None:
            f = Exists((self.placeholder,), f)
        if self.inputs:
            f = Forall(self.inputs, f)
        return f


def build_query(
    body: Formula,
    inputs: SortedVars,
    placeholder: tuple[str, Sort] | None,
    auxiliaries: SortedVars,
) -> QuantifiedQuery:
    declared = {n for n, _ in inputs} | {n for n, _ in auxiliaries}
    if placeholder is not None:
        declared.add(placeholder[0])
    count = len(inputs) + len(auxiliaries) + (1 if placeholder else 0)
    if count != len(declared):
        raise UnclassifiedVariable("<duplicate classification>")
    for name in free_vars(body):
        if name not in declared:
            raise UnclassifiedVariable(name)
    return QuantifiedQuery(tuple(inputs), placeholder, tuple(auxiliaries), body)


def format_query(q: QuantifiedQuery) -> str:
    return format_formula(q.closure())


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


class VerdictKind(Enum):
    VALID = "Valid"
    INVALID = "Invalid"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    witness: dict[str, int | bool] | None = None
    reason: str | None = None  # timeout | resource | prover-said-unknown

    @staticmethod
    def valid() -> Verdict:
        return Verdict(VerdictKind.VALID)

    @staticmethod
    def invalid(witness: dict[str, int | bool]) -> Verdict:
        return Verdict(VerdictKind.INVALID, witness=witness)

    @staticmethod
    def unknown(reason: str) -> Verdict:
        return Verdict(VerdictKind.UNKNOWN, reason=reason)

    @property
    def is_valid(self) -> bool:
        return self.kind is VerdictKind.VALID

    @property
    def is_invalid(self) -> bool:
        return self.kind is VerdictKind.INVALID

    @property
    def is_unknown(self) -> bool:
        return self.kind is VerdictKind.UNKNOWN

    def __str__(self) -> str:
        if self.kind is VerdictKind.UNKNOWN:
            return f"Unknown({self.reason})"
        return self.kind.value
