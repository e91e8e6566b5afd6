"""Deciding classified quantified queries.

Two backends:

* ``internal`` — an exact enumerator over the bounded domain [-B, B] for int
  variables and {false, true} for bool variables.  It is the default backend
  and the acceptance-suite backend; verdicts are exact *with respect to the
  bounded semantics* (an Invalid is a real counterexample over the box, a
  Valid is validity over the box only).
* ``external`` — SMT-LIB2 emission and a prover subprocess, giving unbounded
  semantics when the prover answers conclusively.

Queries compile to Python functions once and are then evaluated over the
domain product with early exit; found placeholder witnesses are retried first
across inputs, which makes the common all-Valid sweeps cheap.
"""

from __future__ import annotations

import itertools
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass

from floc.frontend.syntax import Sort
from floc.logic import (
    Add,
    And,
    BoolConst,
    Eq,
    Formula,
    Ge,
    Gt,
    Implies,
    IntConst,
    Ite,
    Le,
    Lt,
    Mul,
    Ne,
    Neg,
    Not,
    Or,
    QuantifiedQuery,
    Sub,
    VarRef,
    Verdict,
    _children,
    eval_formula,
)

_TIMEOUT_CHECK_MASK = 0x3FF  # check the clock every 1024 outer iterations


@dataclass(frozen=True)
class SolverConfig:
    backend: str = "internal"  # "internal" | "external"
    prover_command: str | None = None
    bound: int = 8
    placeholder_bound: int | None = None  # defaults to bound
    timeout: float = 10.0
    workers: int = 1

    def __post_init__(self):
        if self.bound < 1 or (self.placeholder_bound is not None and self.placeholder_bound < 1):
            raise ValueError("bounds must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @property
    def bc(self) -> int:
        return self.bound if self.placeholder_bound is None else self.placeholder_bound

    @property
    def semantics(self) -> str:
        if self.backend == "internal":
            return f"bounded[-{self.bound},{self.bound}]"
        return "unbounded(prover)"


class ProverLaunchFailure(Exception):
    pass


class MalformedProverOutput(Exception):
    pass


# ---------------------------------------------------------------------------
# Compilation of quantifier-free bodies to Python callables
# ---------------------------------------------------------------------------

_PY_BIN = {Add: "+", Sub: "-", Mul: "*", Lt: "<", Le: "<=", Gt: ">", Ge: ">=", Eq: "==", Ne: "!="}


def _py_expr(f: Formula, names: dict[str, str]) -> str:
    match f:
        case IntConst(value=v):
            return repr(v)
        case BoolConst(value=v):
            return repr(v)
        case VarRef(name=n):
            return names[n]
        case Neg(arg=a):
            return f"(-{_py_expr(a, names)})"
        case Not(arg=a):
            return f"(not {_py_expr(a, names)})"
        case And(items=items):
            return "(" + " and ".join(_py_expr(x, names) for x in items) + ")"
        case Or(items=items):
            return "(" + " or ".join(_py_expr(x, names) for x in items) + ")"
        case Implies(antecedent=a, consequent=b):
            return f"((not {_py_expr(a, names)}) or {_py_expr(b, names)})"
        case Ite(cond=c, then_term=t, else_term=e):
            return f"({_py_expr(t, names)} if {_py_expr(c, names)} else {_py_expr(e, names)})"
        case _:
            op = _PY_BIN.get(type(f))
            if op is not None:
                return f"({_py_expr(f.left, names)} {op} {_py_expr(f.right, names)})"
    raise TypeError(f"cannot compile {f!r}")


def _compile_body(body: Formula, var_order: list[str]):
    names = {n: f"v{i}" for i, n in enumerate(var_order)}
    try:
        src = f"def _q({', '.join(names[n] for n in var_order)}):\n    return {_py_expr(body, names)}"
        ns: dict = {}
        exec(compile(src, "<query>", "exec"), {}, ns)
        return ns["_q"]
    except (RecursionError, SyntaxError, MemoryError):
        # Very deep formulas fall back to the tree-walking evaluator.
        def walk(*values):
            return eval_formula(body, dict(zip(var_order, values)))

        return walk


def _domain(sort: Sort, bound: int) -> tuple:
    if sort is Sort.BOOL:
        return (False, True)
    return tuple(range(-bound, bound + 1))


class _Clock:
    def __init__(self, timeout: float):
        self.deadline = time.monotonic() + timeout
        self.count = 0

    def expired(self) -> bool:
        self.count += 1
        if self.count & _TIMEOUT_CHECK_MASK:
            return False
        return time.monotonic() > self.deadline


# ---------------------------------------------------------------------------
# Internal backend
# ---------------------------------------------------------------------------


def decide_universal(q: QuantifiedQuery, cfg: SolverConfig) -> Verdict:
    """Decide a plain forall(i) forall(t) query; Invalid carries a witness
    valuation of the whole (outermost) universal block."""
    if q.placeholder is not None:
        raise ValueError("query has a placeholder; use decide_forall_exists")
    if cfg.backend == "external":
        return _decide_external(q, cfg)
    names = [n for n, _ in q.inputs] + [n for n, _ in q.auxiliaries]
    sorts = [s for _, s in q.inputs] + [s for _, s in q.auxiliaries]
    fn = _compile_body(q.body, names)
    clock = _Clock(cfg.timeout)
    for values in itertools.product(*[_domain(s, cfg.bound) for s in sorts]):
        if clock.expired():
            return Verdict.unknown("timeout")
        if not fn(*values):
            return Verdict.invalid(dict(zip(names, values)))
    return Verdict.valid()


def decide_forall_exists(q: QuantifiedQuery, cfg: SolverConfig) -> Verdict:
    """Decide forall(i) exists(c) forall(t) body; Invalid carries the failing
    input valuation."""
    if q.placeholder is None:
        raise ValueError("query has no placeholder; use decide_universal")
    if cfg.backend == "external":
        return _decide_external(q, cfg)
    in_names = [n for n, _ in q.inputs]
    aux_names = [n for n, _ in q.auxiliaries]
    c_name, c_sort = q.placeholder
    fn = _compile_body(q.body, in_names + [c_name] + aux_names)
    in_domains = [_domain(s, cfg.bound) for _, s in q.inputs]
    aux_domains = [_domain(s, cfg.bound) for _, s in q.auxiliaries]
    c_domain = _domain(c_sort, cfg.bc)
    clock = _Clock(cfg.timeout)
    last_good = None
    for ivals in itertools.product(*in_domains):
        if clock.expired():
            return Verdict.unknown("timeout")
        candidates = c_domain
        if last_good is not None:
            candidates = (last_good, *(c for c in c_domain if c != last_good))
        found = False
        for cval in candidates:
            ok = True
            for avals in itertools.product(*aux_domains):
                if clock.expired():
                    return Verdict.unknown("timeout")
                if not fn(*ivals, cval, *avals):
                    ok = False
                    break
            if ok:
                found = True
                last_good = cval
                break
        if not found:
            return Verdict.invalid(dict(zip(in_names, ivals)))
    return Verdict.valid()


def decide(q: QuantifiedQuery, cfg: SolverConfig) -> Verdict:
    if q.placeholder is None:
        return decide_universal(q, cfg)
    return decide_forall_exists(q, cfg)


# ---------------------------------------------------------------------------
# SMT-LIB2 emission
# ---------------------------------------------------------------------------

_SMT_BIN = {Add: "+", Sub: "-", Mul: "*", Lt: "<", Le: "<=", Gt: ">", Ge: ">=", Eq: "="}


def _smt_expr(f: Formula, names: dict[str, str]) -> str:
    match f:
        case IntConst(value=v):
            return str(v) if v >= 0 else f"(- {-v})"
        case BoolConst(value=v):
            return "true" if v else "false"
        case VarRef(name=n):
            return names[n]
        case Neg(arg=a):
            return f"(- {_smt_expr(a, names)})"
        case Not(arg=a):
            return f"(not {_smt_expr(a, names)})"
        case And(items=items):
            return "(and " + " ".join(_smt_expr(x, names) for x in items) + ")"
        case Or(items=items):
            return "(or " + " ".join(_smt_expr(x, names) for x in items) + ")"
        case Implies(antecedent=a, consequent=b):
            return f"(=> {_smt_expr(a, names)} {_smt_expr(b, names)})"
        case Ite(cond=c, then_term=t, else_term=e):
            return f"(ite {_smt_expr(c, names)} {_smt_expr(t, names)} {_smt_expr(e, names)})"
        case Ne(left=l, right=r):
            return f"(distinct {_smt_expr(l, names)} {_smt_expr(r, names)})"
        case _:
            op = _SMT_BIN.get(type(f))
            if op is not None:
                return f"({op} {_smt_expr(f.left, names)} {_smt_expr(f.right, names)})"
    raise TypeError(f"cannot emit {f!r}")


def _is_linear(f: Formula) -> bool:
    """Linear iff every multiplication has a literal operand."""
    match f:
        case Mul(left=l, right=r):
            if not (isinstance(l, IntConst) or isinstance(r, IntConst)):
                return False
            return _is_linear(l) and _is_linear(r)
        case IntConst() | BoolConst() | VarRef():
            return True
    return all(_is_linear(c) for c in _children(f))


def _sort_name(s: Sort) -> str:
    return "Int" if s is Sort.INT else "Bool"


def _binder(vs, names) -> str:
    return "(" + " ".join(f"({names[n]} {_sort_name(s)})" for n, s in vs) + ")"


def emit_smtlib(q: QuantifiedQuery) -> str:
    """SMT-LIB2 script asserting the negation of the closed sentence.

    Symbols are deterministically renamed with ``i_``/``c_``/``t_`` prefixes
    by variable class; the logic is LIA when every multiplication has a
    literal operand, NIA otherwise.
    """
    names = {n: f"i_{n}" for n, _ in q.inputs}
    if q.placeholder is not None:
        names[q.placeholder[0]] = f"c_{q.placeholder[0]}"
    names.update({n: f"t_{n}" for n, _ in q.auxiliaries})

    sentence = _smt_expr(q.body, names)
    if q.auxiliaries:
        sentence = f"(forall {_binder(q.auxiliaries, names)} {sentence})"
    if q.placeholder is not None:
        sentence = f"(exists {_binder((q.placeholder,), names)} {sentence})"
    if q.inputs:
        sentence = f"(forall {_binder(q.inputs, names)} {sentence})"

    logic = "LIA" if _is_linear(q.body) else "NIA"
    return (
        f"(set-logic {logic})\n"
        f"(assert (not {sentence}))\n"
        f"(check-sat)\n"
        f"(get-model)\n"
    )


# ---------------------------------------------------------------------------
# External prover backend
# ---------------------------------------------------------------------------


def _decide_external(q: QuantifiedQuery, cfg: SolverConfig) -> Verdict:
    command = cfg.prover_command or os.environ.get("FLOC_PROVER")
    if not command:
        raise ProverLaunchFailure("no prover command configured (flag --prover or FLOC_PROVER)")
    script = emit_smtlib(q)
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as handle:
        handle.write(script)
        path = handle.name
    try:
        try:
            proc = subprocess.run(
                [*shlex.split(command), path],
                capture_output=True,
                text=True,
                timeout=cfg.timeout,
            )
        except subprocess.TimeoutExpired:
            return Verdict.unknown("timeout")
        except (FileNotFoundError, PermissionError) as exc:
            raise ProverLaunchFailure(f"cannot run prover {command!r}: {exc}") from exc
        lines = [ln.strip() for ln in proc.stdout.splitlines() if ln.strip()]
        if not lines:
            return Verdict.unknown("resource")
        first = lines[0]
        if first == "unsat":
            return Verdict.valid()
        if first == "unknown":
            return Verdict.unknown("prover-said-unknown")
        if first == "sat":
            witness = _parse_model("\n".join(lines[1:]), q)
            return Verdict.invalid(witness)
        raise MalformedProverOutput(f"unexpected prover output {first!r}")
    finally:
        os.unlink(path)


def _parse_model(text: str, q: QuantifiedQuery) -> dict[str, int | bool]:
    """Pull assignments of the outermost universal block out of a get-model
    answer.  Tolerant: missing symbols are simply absent from the witness."""
    wanted: dict[str, str] = {f"i_{n}": n for n, _ in q.inputs}
    if q.placeholder is None:
        wanted.update({f"t_{n}": n for n, _ in q.auxiliaries})
    witness: dict[str, int | bool] = {}
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    i = 0
    while i < len(tokens):
        if tokens[i] == "define-fun" and i + 1 < len(tokens) and tokens[i + 1] in wanted:
            name = wanted[tokens[i + 1]]
            j = i + 2
            depth = 0
            # skip the (possibly empty) argument list
            while j < len(tokens):
                if tokens[j] == "(":
                    depth += 1
                elif tokens[j] == ")":
                    depth -= 1
                    if depth == 0:
                        j += 1
                        break
                j += 1
            j += 1  # skip the sort
            rest = tokens[j:]
            if rest[:1] == ["("] and rest[1:2] == ["-"]:
                witness[name] = -int(rest[2])
            elif rest[:1] == ["true"]:
                witness[name] = True
            elif rest[:1] == ["false"]:
                witness[name] = False
            else:
                try:
                    witness[name] = int(rest[0])
                except (ValueError, IndexError):
                    pass
            i = j
        else:
            i += 1
    return witness
