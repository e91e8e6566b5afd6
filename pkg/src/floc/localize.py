"""Orchestration: verify a function, then check each candidate's repairability.

Detection decides every obligation with no placeholder; any Invalid (or
Unknown, which is treated as if the function were incorrect) routes into
localization.  Localization instruments one candidate at a time and asks, per
obligation, whether ``forall inputs exists c forall aux: body`` holds:

* per-obligation mode (default): each obligation is decided independently
  with its own placeholder witness; the candidate is Reported only when
  every obligation is Valid.  Weaker than the conjunction, may report
  spurious locations, but cheaper.
* conjunction mode: one query over the conjunction of all obligation bodies
  sharing a single placeholder.  Reported sets in this mode are always a
  subset of per-obligation reports.

Any Unknown obligation makes the candidate Inconclusive; it is listed but
never reported.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from floc.faultmodel import Candidate, enumerate_candidates, instrument
from floc.frontend.syntax import Program
from floc.logic import Verdict, build_query, f_and, free_vars
from floc.normalizer import NFunc, NormProgram, SourceMap, normalize
from floc.solvers import SolverConfig, decide
from floc.vcgen import Obligation, gen_obligations


@dataclass(frozen=True)
class ObligationOutcome:
    id: str
    verdict: Verdict
    time_sec: float


@dataclass(frozen=True)
class DetectionResult:
    verdict: Verdict  # Valid, or the first non-valid obligation's verdict
    obligations: tuple[ObligationOutcome, ...]

    @property
    def proceed(self) -> bool:
        """Unknown is treated as if the program were incorrect."""
        return not self.verdict.is_valid


OVERALL_REPORTED = "Reported"
OVERALL_NOT_REPAIRABLE = "NotRepairable"
OVERALL_INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CandidateResult:
    candidate: Candidate
    obligations: tuple[ObligationOutcome, ...]
    overall: str
    time_sec: float


@dataclass(frozen=True)
class LocalizationReport:
    function: str
    detection: DetectionResult
    candidates: tuple[CandidateResult, ...]
    mode: str
    semantics: str
    bound: int
    detect_sec: float
    total_sec: float

    @property
    def reported(self) -> tuple[CandidateResult, ...]:
        return tuple(c for c in self.candidates if c.overall == OVERALL_REPORTED)


@dataclass
class Pipeline:
    """Shared immutable artifacts of one analyzed program."""

    program: Program
    norm: NormProgram
    source_map: SourceMap
    reserved: frozenset[str] = field(init=False)

    def __post_init__(self):
        names = {g.name for g in self.program.globals}
        names |= {f.name for f in self.program.functions}
        for f in self.program.functions:
            names |= {p.name for p in f.params}
        self.reserved = frozenset(names)

    @staticmethod
    def build(program: Program) -> "Pipeline":
        norm, source_map = normalize(program)
        return Pipeline(program, norm, source_map)


def _decide_all(obligations: list[Obligation], cfg: SolverConfig) -> list[ObligationOutcome]:
    out = []
    for ob in obligations:
        t0 = time.monotonic()
        verdict = decide(ob.query(), cfg)
        out.append(ObligationOutcome(ob.id, verdict, time.monotonic() - t0))
    return out


def verify_norm(np: NormProgram, nf: NFunc, cfg: SolverConfig) -> DetectionResult:
    obligations = gen_obligations(np, nf)
    outcomes = _decide_all(obligations, cfg)
    overall = Verdict.valid()
    for oc in outcomes:
        if oc.verdict.is_invalid:
            overall = oc.verdict
            break
        if oc.verdict.is_unknown and overall.is_valid:
            overall = oc.verdict
    return DetectionResult(overall, tuple(outcomes))


def verify(program: Program, fname: str, cfg: SolverConfig | None = None) -> DetectionResult:
    """Decide whether the function meets its contract (program typechecked)."""
    cfg = cfg or SolverConfig()
    pipe = Pipeline.build(program)
    return verify_norm(pipe.norm, pipe.norm.function(fname), cfg)


def _check_candidate(
    pipe: Pipeline, nf: NFunc, cand: Candidate, cfg: SolverConfig, mode: str
) -> CandidateResult:
    t0 = time.monotonic()
    mutant, placeholder = instrument(nf, cand, set(pipe.reserved))
    obligations = gen_obligations(pipe.norm, mutant, (placeholder.name, placeholder.sort))

    outcomes: list[ObligationOutcome] = []
    if mode == "conjunction":
        body = f_and(*[ob.body for ob in obligations])
        inputs: dict = {}
        auxes: dict = {}
        for ob in obligations:
            inputs.update(dict(ob.inputs))
            auxes.update(dict(ob.auxiliaries))
        ph = (placeholder.name, placeholder.sort)
        if placeholder.name not in free_vars(body):
            ph = None
        query = build_query(body, tuple(inputs.items()), ph, tuple(auxes.items()))
        tq = time.monotonic()
        verdict = decide(query, cfg)
        outcomes.append(
            ObligationOutcome(f"{nf.name}:Conjunction:0", verdict, time.monotonic() - tq)
        )
    else:
        outcomes = _decide_all(obligations, cfg)

    if any(oc.verdict.is_invalid for oc in outcomes):
        overall = OVERALL_NOT_REPAIRABLE
    elif any(oc.verdict.is_unknown for oc in outcomes):
        overall = OVERALL_INCONCLUSIVE
    else:
        overall = OVERALL_REPORTED
    return CandidateResult(cand, tuple(outcomes), overall, time.monotonic() - t0)


def localize_norm(
    pipe: Pipeline,
    nf: NFunc,
    cfg: SolverConfig,
    mode: str = "per-obligation",
) -> LocalizationReport:
    t_start = time.monotonic()
    detection = verify_norm(pipe.norm, nf, cfg)
    detect_sec = time.monotonic() - t_start

    results: tuple[CandidateResult, ...] = ()
    if detection.proceed:
        candidates = enumerate_candidates(nf, pipe.source_map)
        if cfg.workers > 1 and len(candidates) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                results = tuple(
                    pool.map(lambda c: _check_candidate(pipe, nf, c, cfg, mode), candidates)
                )
        else:
            results = tuple(_check_candidate(pipe, nf, c, cfg, mode) for c in candidates)

    return LocalizationReport(
        function=nf.name,
        detection=detection,
        candidates=results,
        mode=mode,
        semantics=cfg.semantics,
        bound=cfg.bound,
        detect_sec=detect_sec,
        total_sec=time.monotonic() - t_start,
    )


def localize(
    program: Program,
    fname: str,
    cfg: SolverConfig | None = None,
    mode: str = "per-obligation",
) -> LocalizationReport:
    """Run detection and, if the function is incorrect, candidate analysis."""
    cfg = cfg or SolverConfig()
    pipe = Pipeline.build(program)
    return localize_norm(pipe, pipe.norm.function(fname), cfg, mode)


# ---------------------------------------------------------------------------
# Serialization (stable schema)
# ---------------------------------------------------------------------------


def _verdict_json(v: Verdict) -> dict:
    out: dict = {"verdict": str(v)}
    if v.witness is not None:
        out["witness"] = dict(v.witness)
    return out


def _outcome_json(oc: ObligationOutcome, timings: bool) -> dict:
    entry = {"id": oc.id, "verdict": str(oc.verdict)}
    entry["timeSec"] = round(oc.time_sec, 6) if timings else 0.0
    return entry


def report_json(report: LocalizationReport, include_timings: bool = False) -> dict:
    """The machine-readable report.

    Timing fields are zeroed unless ``include_timings`` is set, so that two
    runs of the same command are byte-identical.
    """
    detection = _verdict_json(report.detection.verdict)
    detection["obligations"] = [
        _outcome_json(oc, include_timings) for oc in report.detection.obligations
    ]
    candidates = []
    for cr in report.candidates:
        candidates.append(
            {
                "id": cr.candidate.id,
                "kind": cr.candidate.kind.value,
                "normalizedText": cr.candidate.location.normalized_text,
                "originalLine": cr.candidate.location.line,
                "originalText": cr.candidate.location.original_text,
                "overall": cr.overall,
                "loopScoped": cr.candidate.loop_scoped,
                "obligations": [_outcome_json(oc, include_timings) for oc in cr.obligations],
                "timeSec": round(cr.time_sec, 6) if include_timings else 0.0,
            }
        )
    reported = [
        {
            "originalLine": cr.candidate.location.line,
            "originalText": cr.candidate.location.original_text,
            "normalizedText": cr.candidate.location.normalized_text,
        }
        for cr in report.reported
    ]
    return {
        "function": report.function,
        "detection": detection,
        "candidates": candidates,
        "reported": reported,
        "mode": report.mode,
        "semantics": report.semantics,
        "boundB": report.bound,
        "timings": {
            "detectSec": round(report.detect_sec, 6) if include_timings else 0.0,
            "totalSec": round(report.total_sec, 6) if include_timings else 0.0,
        },
    }


def _witness_text(v: Verdict) -> str:
    if not v.witness:
        return ""
    inner = ", ".join(f"{k}={_fmt_val(x)}" for k, x in v.witness.items())
    return f" (witness: {inner})"


def _fmt_val(x: int | bool) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


def report_text(report: LocalizationReport) -> str:
    """Human-readable report in the style of the prover log examples."""
    lines = []
    d = report.detection.verdict
    if d.is_valid:
        lines.append(f"function {report.function}: Valid (no contract violation found)")
        lines.append(f"semantics: {report.semantics}")
        return "\n".join(lines)
    status = "error detected" if d.is_invalid else f"verdict {d} treated as incorrect"
    lines.append(f"function {report.function}: {status}{_witness_text(d)}")
    for oc in report.detection.obligations:
        lines.append(f"  {oc.id}: {oc.verdict} [{oc.time_sec:.3f}s]")
    reported = report.reported
    plural = "s" if len(reported) != 1 else ""
    lines.append(f"reports {len(reported)} potential error location{plural}:")
    for cr in reported:
        loc = cr.candidate.location
        suffix = ""
        if loc.original_text and loc.original_text != loc.normalized_text:
            suffix = f"  (origin: {loc.original_text})"
        flag = "  [loop-scoped]" if cr.candidate.loop_scoped else ""
        lines.append(f"  {loc.normalized_text} in line {loc.line}{suffix}{flag}")
    others = [c for c in report.candidates if c.overall != OVERALL_REPORTED]
    if others:
        lines.append("other candidates:")
        for cr in others:
            loc = cr.candidate.location
            reason = ""
            if cr.overall == OVERALL_INCONCLUSIVE:
                reasons = {oc.verdict.reason for oc in cr.obligations if oc.verdict.is_unknown}
                reason = f" ({', '.join(sorted(r for r in reasons if r))})"
            lines.append(f"  C{cr.candidate.id} {loc.normalized_text} in line {loc.line}: {cr.overall}{reason}")
    lines.append(f"mode: {report.mode}; semantics: {report.semantics}")
    lines.append(
        f"timings: detection {report.detect_sec:.3f}s, total {report.total_sec:.3f}s"
    )
    return "\n".join(lines)
