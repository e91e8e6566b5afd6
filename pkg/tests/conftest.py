from __future__ import annotations

import pathlib

from floc.frontend import parse
from floc.frontend.typecheck import check_program
from floc.localize import Pipeline

CORPUS = pathlib.Path(__file__).resolve().parents[1] / "src" / "floc" / "corpus"


def corpus_path(name: str) -> pathlib.Path:
    return CORPUS / f"{name}.mcl"


def load(name: str):
    """Parse and typecheck a corpus program."""
    path = corpus_path(name)
    return check_program(parse(path.read_text(), str(path)))


def build(name: str) -> Pipeline:
    return Pipeline.build(load(name))


def pipeline_from(source: str) -> Pipeline:
    return Pipeline.build(check_program(parse(source)))


CORPUS_NAMES = [
    "max",
    "max_fixed",
    "tcas_v7",
    "tcas_v9",
    "tcas_v14",
    "sum_upto",
    "int_division",
    "countdown",
    "counter",
    "straightline",
]
