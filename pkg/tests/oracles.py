"""Independent oracles for the solver suites.

Deliberately primitive: a tree-walking evaluator and a literal triple-nested
loop, sharing no code with the production enumerator (which compiles bodies
to Python functions and short-circuits).
"""

from __future__ import annotations

import itertools
import random

from floc.frontend.syntax import Sort
from floc.logic import (
    Add,
    And,
    BoolConst,
    Eq,
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
)

I = Sort.INT


def tree_eval(f, env):
    match f:
        case IntConst(value=v) | BoolConst(value=v):
            return v
        case VarRef(name=n):
            return env[n]
        case Neg(arg=x):
            return -tree_eval(x, env)
        case Not(arg=x):
            return not tree_eval(x, env)
        case Add(left=l, right=r):
            return tree_eval(l, env) + tree_eval(r, env)
        case Sub(left=l, right=r):
            return tree_eval(l, env) - tree_eval(r, env)
        case Mul(left=l, right=r):
            return tree_eval(l, env) * tree_eval(r, env)
        case Lt(left=l, right=r):
            return tree_eval(l, env) < tree_eval(r, env)
        case Le(left=l, right=r):
            return tree_eval(l, env) <= tree_eval(r, env)
        case Gt(left=l, right=r):
            return tree_eval(l, env) > tree_eval(r, env)
        case Ge(left=l, right=r):
            return tree_eval(l, env) >= tree_eval(r, env)
        case Eq(left=l, right=r):
            return tree_eval(l, env) == tree_eval(r, env)
        case Ne(left=l, right=r):
            return tree_eval(l, env) != tree_eval(r, env)
        case And(items=xs):
            return all(tree_eval(x, env) for x in xs)
        case Or(items=xs):
            return any(tree_eval(x, env) for x in xs)
        case Implies(antecedent=a, consequent=b):
            return (not tree_eval(a, env)) or bool(tree_eval(b, env))
        case Ite(cond=c, then_term=t, else_term=e):
            return tree_eval(t, env) if tree_eval(c, env) else tree_eval(e, env)
    raise TypeError(f"cannot evaluate {f!r}")


def _dom(sort, bound):
    return (False, True) if sort is Sort.BOOL else range(-bound, bound + 1)


def brute_force_decide(q: QuantifiedQuery, bound: int, cbound: int) -> str:
    """Triple nested loop: forall inputs, exists placeholder, forall aux."""
    in_doms = [_dom(s, bound) for _, s in q.inputs]
    aux_doms = [_dom(s, bound) for _, s in q.auxiliaries]
    in_names = [n for n, _ in q.inputs]
    aux_names = [n for n, _ in q.auxiliaries]
    if q.placeholder is None:
        for ivals in itertools.product(*in_doms):
            for tvals in itertools.product(*aux_doms):
                env = dict(zip(in_names, ivals)) | dict(zip(aux_names, tvals))
                if not tree_eval(q.body, env):
                    return "Invalid"
        return "Valid"
    cname, csort = q.placeholder
    for ivals in itertools.product(*in_doms):
        base = dict(zip(in_names, ivals))
        witnessed = False
        for c in _dom(csort, cbound):
            holds = True
            for tvals in itertools.product(*aux_doms):
                env = base | {cname: c} | dict(zip(aux_names, tvals))
                if not tree_eval(q.body, env):
                    holds = False
                    break
            if holds:
                witnessed = True
                break
        if not witnessed:
            return "Invalid"
    return "Valid"


class QueryGen:
    """Random classified queries, small enough for exhaustive cross-checks."""

    def __init__(self, rng: random.Random):
        self.rng = rng

    def term(self, names, depth):
        r = self.rng
        if depth == 0 or r.random() < 0.45:
            if names and r.random() < 0.7:
                return VarRef(r.choice(names), I)
            return IntConst(r.randint(-3, 3))
        kind = r.choice(("add", "sub", "mul", "neg"))
        if kind == "neg":
            return Neg(self.term(names, depth - 1))
        cls = {"add": Add, "sub": Sub, "mul": Mul}[kind]
        return cls(self.term(names, depth - 1), self.term(names, depth - 1))

    def body(self, names, depth):
        r = self.rng
        if depth == 0 or r.random() < 0.4:
            cls = r.choice((Lt, Le, Gt, Ge, Eq, Ne))
            return cls(self.term(names, 1), self.term(names, 1))
        roll = r.random()
        if roll < 0.35:
            return And((self.body(names, depth - 1), self.body(names, depth - 1)))
        if roll < 0.7:
            return Or((self.body(names, depth - 1), self.body(names, depth - 1)))
        if roll < 0.9:
            return Implies(self.body(names, depth - 1), self.body(names, depth - 1))
        return Not(self.body(names, depth - 1))

    def query(self, max_total: int = 5) -> QuantifiedQuery:
        r = self.rng
        while True:
            ni, nt = r.randint(0, 3), r.randint(0, 3)
            if 1 + ni + nt <= max_total:
                break
        inputs = tuple((f"i{j}", I) for j in range(ni))
        auxes = tuple((f"t{j}", I) for j in range(nt))
        names = [n for n, _ in inputs] + ["c"] + [n for n, _ in auxes]
        return QuantifiedQuery(inputs, ("c", I), auxes, self.body(names, 2))
