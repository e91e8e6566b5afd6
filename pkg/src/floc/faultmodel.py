"""Candidate error locations and placeholder instrumentation.

A candidate is the top-level expression of a normalized statement: an
assignment right-hand side, a declaration initializer, an if or while
condition, or a return expression.  Call assignments are excluded: a call is
an instruction boundary, not a replaceable expression (its hoisted result
variable is covered by the site that consumes it).

Instrumenting candidate k replaces the site with a fresh variable ``c<k>`` of
the same sort, on a copy of the function; repairability of the candidate is
then a question about the instrumented function's obligations.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from enum import Enum

from floc.frontend.syntax import Sort, Span, Var
from floc.normalizer import (
    CallRhs,
    LocationDescription,
    NAssign,
    NFunc,
    NIf,
    NReturn,
    NStmt,
    NWhile,
    SourceMap,
    render_location,
)


class CandidateKind(Enum):
    ASSIGN_RHS = "assign-rhs"
    DECL_INIT = "decl-init"
    IF_COND = "if-cond"
    WHILE_COND = "while-cond"
    RETURN_EXPR = "return-expr"


@dataclass(frozen=True)
class Candidate:
    id: int  # dense, 1-based, program order within the function
    kind: CandidateKind
    sort: Sort
    loop_scoped: bool
    location: LocationDescription
    span: Span
    norm_index: int


@dataclass(frozen=True)
class PlaceholderInfo:
    name: str
    sort: Sort
    candidate_id: int


def _walk_sites(stmts: list[NStmt], in_loop: bool):
    """Yield (kind, stmt, in_loop) for each qualifying site, program order."""
    for s in stmts:
        match s:
            case NAssign(rhs=CallRhs()):
                pass  # call instruction, not an expression site
            case NAssign(declares=d, synthetic=syn):
                kind = CandidateKind.DECL_INIT if d and not syn else CandidateKind.ASSIGN_RHS
                yield kind, s, in_loop
            case NIf(then_stmts=tb, else_stmts=eb):
                yield CandidateKind.IF_COND, s, in_loop
                yield from _walk_sites(tb, in_loop)
                yield from _walk_sites(eb, in_loop)
            case NWhile(prelude=pre, body=b):
                yield from _walk_sites(pre, True)
                yield CandidateKind.WHILE_COND, s, True
                yield from _walk_sites(b, True)
            case NReturn(value=None):
                pass
            case NReturn():
                yield CandidateKind.RETURN_EXPR, s, in_loop


def _site_expr(kind: CandidateKind, stmt: NStmt):
    match kind:
        case CandidateKind.ASSIGN_RHS | CandidateKind.DECL_INIT:
            return stmt.rhs
        case CandidateKind.IF_COND | CandidateKind.WHILE_COND:
            return stmt.cond
        case CandidateKind.RETURN_EXPR:
            return stmt.value


def enumerate_candidates(nf: NFunc, source_map: SourceMap) -> list[Candidate]:
    """All candidate error locations of a normalized function, program order."""
    out: list[Candidate] = []
    for kind, stmt, in_loop in _walk_sites(nf.body, False):
        expr = _site_expr(kind, stmt)
        out.append(
            Candidate(
                id=len(out) + 1,
                kind=kind,
                sort=expr.sort,
                loop_scoped=in_loop,
                location=render_location(expr, source_map),
                span=source_map.span_of(expr),
                norm_index=stmt.index,
            )
        )
    return out


def _all_identifiers(nf: NFunc) -> set[str]:
    names = {nf.name} | {p.name for p in nf.params}

    def walk(stmts: list[NStmt]) -> None:
        for s in stmts:
            match s:
                case NAssign(target=t):
                    names.add(t)
                case NIf(then_stmts=tb, else_stmts=eb):
                    walk(tb)
                    walk(eb)
                case NWhile(prelude=pre, body=b):
                    walk(pre)
                    walk(b)

    walk(nf.body)
    return names


def replace_site(nf: NFunc, site_id: int, new_expr) -> NFunc:
    """A fresh copy of the function with the site's expression swapped out.

    ``site_id`` is the 1-based candidate index; ``new_expr`` must be flat and
    of the site's sort.  The original function is untouched.
    """
    clone = copy.deepcopy(nf)
    hits = 0
    for kind, stmt, _ in _walk_sites(clone.body, False):
        hits += 1
        if hits != site_id:
            continue
        match kind:
            case CandidateKind.ASSIGN_RHS | CandidateKind.DECL_INIT:
                stmt.rhs = new_expr
            case CandidateKind.IF_COND | CandidateKind.WHILE_COND:
                stmt.cond = new_expr
            case CandidateKind.RETURN_EXPR:
                stmt.value = new_expr
        return clone
    raise ValueError(f"no site {site_id} in {nf.name!r}")


def instrument(nf: NFunc, cand: Candidate, reserved: set[str] = frozenset()) -> tuple[NFunc, PlaceholderInfo]:
    """Replace the candidate site with a fresh placeholder variable.

    Returns a fresh function copy; the original is untouched.  The placeholder
    is named ``c<id>`` unless that collides with an identifier in scope.
    """
    name = f"c{cand.id}"
    taken = _all_identifiers(nf) | set(reserved)
    while name in taken:
        name = "c" + name
    placeholder = Var(name, span=cand.span, sort=cand.sort)
    clone = replace_site(nf, cand.id, placeholder)
    return clone, PlaceholderInfo(name, cand.sort, cand.id)
