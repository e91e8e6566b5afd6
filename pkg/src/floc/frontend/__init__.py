"""MCL frontend: lexer, parser, typechecker, and concrete interpreter."""

from floc.frontend.lexer import MclSyntaxError, tokenize
from floc.frontend.parser import parse
from floc.frontend.typecheck import Diagnostic, TypeCheckError, check_program, typecheck
from floc.frontend.interp import (
    ExecResult,
    FuelExhausted,
    PreconditionViolated,
    Returned,
    eval_post,
    interpret,
)
from floc.frontend.syntax import (
    Program,
    FunctionDef,
    GlobalDecl,
    Sort,
    Span,
    ast_equal,
    expr_text,
    function_text,
    program_text,
)

__all__ = [
    "MclSyntaxError",
    "tokenize",
    "parse",
    "Diagnostic",
    "TypeCheckError",
    "check_program",
    "typecheck",
    "ExecResult",
    "FuelExhausted",
    "PreconditionViolated",
    "Returned",
    "eval_post",
    "interpret",
    "Program",
    "FunctionDef",
    "GlobalDecl",
    "Sort",
    "Span",
    "ast_equal",
    "expr_text",
    "function_text",
    "program_text",
]
