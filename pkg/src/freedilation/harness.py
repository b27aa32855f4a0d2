"""Scenario ingestion, theorem suites, and report assembly.

A scenario file describes a family of contractions with states and budgets;
the suite builds the requested dilation model and runs every applicable
certificate, collecting residuals, witnesses, and timings into a report that
is byte-identical across runs with the same seed (timing fields excluded).
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ._version import __version__
from .dilation import (
    BudgetError,
    DilationResult,
    doubly_commuting_dilation,
    double_commutation_residual,
    finite_unitary_dilation,
    verify_power_dilation,
)
from .free_product import (
    FreeDilationScenario,
    alternating_words_within,
    free_unitary_dilation,
    restricted_unitarity_residual,
)
from .ncprob import (
    CheckReport,
    Element,
    Word,
    center,
    faithfulness_check,
    free_independence_check,
    free_mixed_moment_oracle,
    make_tensor_independent,
    parse_word,
    state_moment,
    tensor_independence_check,
    trace_check,
    word_moment,
)
from .operator_core import Embedding, State, adjoint, operator_norm
from .serialization import (
    matrix_from_obj,
    matrix_to_obj,
    state_from_obj,
    state_to_obj,
)

MODES = ("single", "doubly", "tensor", "free")


class IngestError(Exception):
    """A scenario or data file failed to load or validate."""


@dataclass
class Scenario:
    """A fully validated problem description: factors, mode, and budgets."""

    mode: str
    factors: list[tuple[np.ndarray, State]]
    degree: int = 3
    trunc: int = 4
    check_degree: int = 3
    max_alt: int = 4
    samples: int = 100
    tol: float = 1e-8
    seed: int = 0
    sources: tuple[tuple[str, str], ...] = field(default_factory=tuple, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise IngestError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.factors:
            raise IngestError("scenario needs at least one factor")
        if self.mode == "single" and len(self.factors) != 1:
            raise IngestError(f"single mode takes exactly one factor, got {len(self.factors)}")
        for key in ("degree", "trunc", "check_degree", "max_alt"):
            if getattr(self, key) < 1:
                raise IngestError(f"budget {key} must be >= 1, got {getattr(self, key)}")
        if self.samples < 0:
            raise IngestError(f"samples must be >= 0, got {self.samples}")
        if self.tol <= 0:
            raise IngestError(f"tol must be positive, got {self.tol}")
        for idx, (mat, st) in enumerate(self.factors):
            dim = st.vector.size if st.kind == "vector" else st.density.shape[0]
            if mat.shape != (dim, dim):
                raise IngestError(
                    f"factors[{idx}]: matrix shape {mat.shape} does not match state dim {dim}"
                )
        if self.mode in ("doubly",):
            dims = {m.shape[0] for m, _ in self.factors}
            if len(dims) != 1:
                raise IngestError(f"doubly mode needs factors on a common space, got dims {sorted(dims)}")

    def to_obj(self) -> dict:
        return {
            "mode": self.mode,
            "factors": [
                {"matrix": matrix_to_obj(m), "state": state_to_obj(s)}
                for m, s in self.factors
            ],
            "degree": self.degree,
            "trunc": self.trunc,
            "check_degree": self.check_degree,
            "max_alt": self.max_alt,
            "samples": self.samples,
            "tol": self.tol,
            "seed": self.seed,
        }


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _load_json(path: Path) -> object:
    try:
        text = path.read_text()
    except OSError as exc:
        raise IngestError(f"{path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _resolve_part(value, base_dir: Path, sources: list, loader: Callable, what: str):
    """A factor part is either an inline object or a path to a JSON file."""
    if isinstance(value, str):
        part_path = (base_dir / value).resolve()
        obj = _load_json(part_path)
        sources.append((str(part_path), _sha256(part_path.read_bytes())))
    else:
        obj = value
    try:
        return loader(obj)
    except (ValueError, KeyError, TypeError) as exc:
        raise IngestError(f"{what}: {exc}") from None


def scenario_from_obj(obj: dict, base_dir: Path | str = ".", sources=()) -> Scenario:
    if not isinstance(obj, dict):
        raise IngestError(f"scenario must be a JSON object, got {type(obj).__name__}")
    base_dir = Path(base_dir)
    sources = list(sources)
    raw_factors = obj.get("factors")
    if not isinstance(raw_factors, list) or not raw_factors:
        raise IngestError("scenario field 'factors' must be a nonempty list")
    factors: list[tuple[np.ndarray, State]] = []
    for idx, entry in enumerate(raw_factors):
        if not isinstance(entry, dict) or "matrix" not in entry:
            raise IngestError(f"factors[{idx}]: expected an object with a 'matrix' field")
        mat = _resolve_part(
            entry["matrix"], base_dir, sources, matrix_from_obj, f"factors[{idx}].matrix"
        )
        if entry.get("state") is None:
            st = State.basis_vector(mat.shape[0], 0)
        else:
            st = _resolve_part(
                entry["state"], base_dir, sources, state_from_obj, f"factors[{idx}].state"
            )
        factors.append((mat, st))
    mode = obj.get("mode", "single" if len(factors) == 1 else "free")
    kwargs = {}
    for key in ("degree", "trunc", "check_degree", "max_alt", "samples", "seed"):
        if key in obj:
            if not isinstance(obj[key], int) or isinstance(obj[key], bool):
                raise IngestError(f"scenario field {key!r} must be an integer, got {obj[key]!r}")
            kwargs[key] = obj[key]
    if "tol" in obj:
        if not isinstance(obj["tol"], (int, float)) or isinstance(obj["tol"], bool):
            raise IngestError(f"scenario field 'tol' must be a number, got {obj['tol']!r}")
        kwargs["tol"] = float(obj["tol"])
    try:
        return Scenario(
            mode=mode, factors=factors, sources=tuple(sources), **kwargs
        )
    except (ValueError, TypeError) as exc:
        raise IngestError(str(exc)) from None


def ingest(path: str | Path, overrides: dict | None = None) -> Scenario:
    """Load and fully validate a scenario file; flag overrides applied on top."""
    path = Path(path)
    obj = _load_json(path)
    sources = [(str(path.resolve()), _sha256(path.read_bytes()))]
    sc = scenario_from_obj(obj, path.parent, sources)
    if overrides:
        clean = {k: v for k, v in overrides.items() if v is not None}
        if clean:
            sc = replace(sc, **clean)
    return sc


def emit(sc: Scenario, path: str | Path | None = None) -> str:
    """Canonical JSON for a scenario (matrices inlined); optionally written out."""
    text = json.dumps(sc.to_obj(), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


# ---------------------------------------------------------------------------
# model construction


@dataclass
class Model:
    """A constructed dilation model: generators, state, and the raw parts."""

    gens: dict[int, np.ndarray]
    state: State
    dilation: DilationResult | None = None
    free: FreeDilationScenario | None = None
    factor_models: list[tuple[dict[int, np.ndarray], State]] = field(default_factory=list)
    ambient_dim: int = 0


def _embedded_state(res: DilationResult, st: State) -> State:
    j = res.embedding.isometry
    if st.kind == "vector":
        return State.from_vector(j @ st.vector)
    return State.from_density(j @ st.density @ adjoint(j))


def build_model(sc: Scenario) -> Model:
    """Construct the dilation model a scenario's mode calls for."""
    if sc.mode == "single":
        t, st = sc.factors[0]
        res = finite_unitary_dilation(t, sc.degree, sc.tol)
        emb = _embedded_state(res, st)
        return Model(
            gens={1: res.unitaries[0]},
            state=emb,
            dilation=res,
            factor_models=[({1: res.unitaries[0]}, emb)],
            ambient_dim=res.ambient_dim,
        )
    if sc.mode == "doubly":
        ts = [t for t, _ in sc.factors]
        res = doubly_commuting_dilation(ts, sc.degree, sc.tol)
        emb = _embedded_state(res, sc.factors[0][1])
        return Model(
            gens={i + 1: u for i, u in enumerate(res.unitaries)},
            state=emb,
            dilation=res,
            ambient_dim=res.ambient_dim,
        )
    if sc.mode == "tensor":
        parts = []
        factor_models = []
        for t, st in sc.factors:
            r = finite_unitary_dilation(t, sc.degree, sc.tol)
            emb = _embedded_state(r, st)
            parts.append((r.unitaries[0], emb))
            factor_models.append(({1: r.unitaries[0]}, emb))
        gens, joint = make_tensor_independent(parts)
        return Model(
            gens=gens,
            state=joint,
            factor_models=factor_models,
            ambient_dim=joint.vector.size if joint.kind == "vector" else joint.density.shape[0],
        )
    fds = free_unitary_dilation(sc.factors, sc.degree, sc.trunc, sc.tol)
    return Model(
        gens=fds.fock_gens(),
        state=fds.vacuum,
        free=fds,
        factor_models=[fds.factor_model(i) for i in range(1, fds.n_factors + 1)],
        ambient_dim=fds.dim,
    )


# ---------------------------------------------------------------------------
# word grammar for products with centering


_CENTER_RE = re.compile(r"c\(([^()]*)\)|(\S+)")


def parse_product(text: str) -> list[tuple[bool, Word]]:
    """Parse a product expression: a plain signed-power word, with any number
    of ``c(...)`` groups whose state mean is subtracted before multiplying.

    Consecutive plain tokens form one word; each ``c(...)`` group is its own
    factor of the product.
    """
    out: list[tuple[bool, Word]] = []
    plain: list[str] = []

    def flush() -> None:
        if plain:
            out.append((False, parse_word(" ".join(plain))))
            plain.clear()

    for m in _CENTER_RE.finditer(text):
        if m.group(1) is not None:
            flush()
            out.append((True, parse_word(m.group(1))))
        else:
            plain.append(m.group(2))
    flush()
    if not out:
        out.append((False, Word(())))
    return out


def evaluate_product(text: str, model: Model) -> complex:
    parts = parse_product(text)
    elements: list[Element] = []
    for centered, w in parts:
        el = Element.from_word(w)
        if centered:
            el = center(el, model.state, model.gens)
        elements.append(el)
    return state_moment(model.state, model.gens, elements)


def moment_budget_check(sc: Scenario, word: Word) -> None:
    """Refuse vacuum-moment words outside the free truncation budget.

    A product touches words of length at most its factor-block count, so the
    moment is exact iff that count stays within the truncation length; any
    centered expansion only shortens words, so checking the full concatenation
    covers every term.
    """
    if sc.mode != "free":
        return
    blocks = word.blocks()
    if len(blocks) > sc.trunc:
        raise BudgetError(
            f"word has {len(blocks)} factor blocks, exceeding the truncation length {sc.trunc}; "
            "vacuum moments are exact only up to that alternation depth"
        )


# ---------------------------------------------------------------------------
# word sweeps


def signed_alternating_words(
    n_factors: int, max_blocks: int, per_run_max: int, total_max: int
) -> list[tuple[tuple[int, int], ...]]:
    """Signed-power run sequences: adjacent runs differ in factor or sign,
    factor blocks at most ``max_blocks``, each ``|k| <= per_run_max``, total
    ``sum |k| <= total_max``."""
    out: list[tuple[tuple[int, int], ...]] = []
    ids = list(range(1, n_factors + 1))

    def blocks_of(runs) -> int:
        count = 0
        last = None
        for f, _ in runs:
            if f != last:
                count += 1
                last = f
        return count

    def rec(prefix: tuple[tuple[int, int], ...], budget: int) -> None:
        if prefix:
            out.append(prefix)
        if budget == 0:
            return
        for i in ids:
            for sign in (1, -1):
                if prefix and prefix[-1][0] == i and (prefix[-1][1] > 0) == (sign > 0):
                    continue
                for k in range(1, min(per_run_max, budget) + 1):
                    cand = prefix + ((i, sign * k),)
                    if blocks_of(cand) > max_blocks:
                        continue
                    rec(cand, budget - k)

    rec((), total_max)
    out.sort(key=lambda runs: (sum(abs(k) for _, k in runs), len(runs), runs))
    return out


def ordered_words(n_factors: int, max_power: int) -> list[tuple[tuple[int, int], ...]]:
    """One signed power per factor in order 1..n, all ``|k| <= max_power``."""
    import itertools

    powers = range(-max_power, max_power + 1)
    out = []
    for combo in itertools.product(powers, repeat=n_factors):
        word = tuple((i + 1, k) for i, k in enumerate(combo) if k != 0)
        out.append(word)
    return sorted(set(out), key=lambda w: (len(w), w))


# ---------------------------------------------------------------------------
# suite checks


def _fmt_runs(runs) -> str:
    return Word.from_runs(runs).format()


def _check_unitarity(sc: Scenario, model: Model) -> CheckReport:
    worst = 0.0
    witness = None
    if model.free is not None:
        for i in range(1, model.free.n_factors + 1):
            res = restricted_unitarity_residual(model.free, i)
            if res >= worst:
                if res > worst or witness is None:
                    witness = {"factor": i, "restricted_to": f"words shorter than {sc.trunc}"}
                worst = max(worst, res)
    else:
        eye = np.eye(model.ambient_dim)
        for i, u in sorted(model.gens.items()):
            res = operator_norm(adjoint(u) @ u - eye)
            if res >= worst:
                if res > worst or witness is None:
                    witness = {"factor": i}
                worst = max(worst, res)
    return CheckReport(
        name="unitarity", residual=worst, tol=sc.tol, passed=worst <= sc.tol, witness=witness
    )


def _check_power_dilation(sc: Scenario, model: Model) -> CheckReport:
    ts = [t for t, _ in sc.factors]
    worst = -1.0
    witness = None
    if model.free is not None:
        words = alternating_words_within(
            model.free.n_factors, min(sc.max_alt, sc.trunc), sc.degree
        )
        for runs in words:
            r = verify_power_dilation(model.free, None, runs, sc.tol)
            if r.residual > worst:
                worst = r.residual
                witness = {"word": _fmt_runs(runs)}
        name = "dilation_identity"
    elif sc.mode == "tensor":
        for i, (fm_gens, _) in enumerate(model.factor_models, start=1):
            t = ts[i - 1]
            u = fm_gens[1]
            small = t.shape[0]
            res = DilationResult(
                unitaries=(u,),
                embedding=Embedding.coordinate(u.shape[0], range(small)),
                degree=sc.degree,
            )
            for k in range(-sc.degree, sc.degree + 1):
                r = verify_power_dilation(res, [t], [(1, k)], sc.tol)
                if r.residual > worst:
                    worst = r.residual
                    witness = {"factor": i, "word": _fmt_runs([(1, k)])}
        name = "power_dilation"
    else:
        for runs in ordered_words(len(ts), sc.degree):
            r = verify_power_dilation(model.dilation, ts, runs, sc.tol)
            if r.residual > worst:
                worst = r.residual
                witness = {"word": _fmt_runs(runs) if runs else "1"}
        name = "power_dilation"
    worst = max(worst, 0.0)
    return CheckReport(
        name=name,
        residual=worst,
        tol=sc.tol,
        passed=worst <= sc.tol,
        witness=witness,
        details={"degree": sc.degree},
    )


def _check_oracle(sc: Scenario, model: Model) -> CheckReport:
    fds = model.free
    marginals = {}
    for i, (fm_gens, fm_state) in enumerate(model.factor_models, start=1):
        marginals[i] = (
            lambda w, g=fm_gens, s=fm_state: word_moment(s, g, w)
        )
    words = signed_alternating_words(
        fds.n_factors, min(sc.max_alt, sc.trunc), sc.degree, 2 * sc.degree
    )
    worst = 0.0
    witness = None
    for runs in words:
        w = Word.from_runs(runs)
        lhs = word_moment(model.state, model.gens, w)
        rhs = free_mixed_moment_oracle(marginals, w)
        res = abs(lhs - rhs)
        if res >= worst:
            if res > worst or witness is None:
                witness = {
                    "word": w.format(),
                    "vacuum_moment": [lhs.real, lhs.imag],
                    "oracle_moment": [rhs.real, rhs.imag],
                }
            worst = max(worst, res)
    return CheckReport(
        name="oracle_equivalence",
        residual=worst,
        tol=sc.tol,
        passed=worst <= sc.tol,
        witness=witness,
        details={"words": len(words), "max_blocks": min(sc.max_alt, sc.trunc)},
    )


def _check_faithfulness(sc: Scenario, model: Model) -> CheckReport:
    degree = min(sc.check_degree, sc.degree)
    worst_gap = 0
    witness = None
    all_ok = True
    per_factor = []
    for i, (fm_gens, fm_state) in enumerate(model.factor_models, start=1):
        rep = faithfulness_check(fm_state, fm_gens, degree)
        per_factor.append({"factor": i, **rep.to_obj()})
        if not rep.faithful_on_span:
            all_ok = False
        if rep.rank_gap >= worst_gap:
            if rep.rank_gap > worst_gap or witness is None:
                witness = {"factor": i, "span_dim": rep.span_dim, "gram_rank": rep.gram_rank}
            worst_gap = max(worst_gap, rep.rank_gap)
    return CheckReport(
        name="faithfulness",
        residual=float(worst_gap),
        tol=0.5,
        passed=all_ok,
        witness=witness,
        details={"degree": degree, "per_factor": per_factor},
    )


def _check_double_commutation(sc: Scenario, model: Model) -> CheckReport:
    ops = [model.gens[i] for i in sorted(model.gens)]
    res = double_commutation_residual(ops)
    return CheckReport(
        name="double_commutation",
        residual=res,
        tol=sc.tol,
        passed=res <= sc.tol,
        witness=None,
        details={"operators": len(ops)},
    )


def suite_plan(sc: Scenario, model: Model) -> list[tuple[str, Callable[[], CheckReport]]]:
    """Named check thunks applicable to the scenario's mode, in run order."""
    plan: list[tuple[str, Callable[[], CheckReport]]] = [
        ("unitarity", lambda: _check_unitarity(sc, model)),
    ]
    name = "dilation_identity" if sc.mode == "free" else "power_dilation"
    plan.append((name, lambda: _check_power_dilation(sc, model)))
    if sc.mode == "doubly":
        plan.append(("double_commutation", lambda: _check_double_commutation(sc, model)))
    if sc.mode == "tensor":
        plan.append(
            (
                "tensor_independence",
                lambda: tensor_independence_check(
                    model.state,
                    model.gens,
                    degree=min(sc.check_degree, 3),
                    samples=sc.samples,
                    tol=sc.tol,
                    seed=sc.seed,
                ),
            )
        )
    if sc.mode == "free" and model.free.n_factors >= 2:
        plan.append(
            (
                "free_independence",
                lambda: free_independence_check(
                    model.state,
                    model.gens,
                    max_len=min(sc.max_alt, sc.trunc),
                    degree=min(sc.check_degree, sc.degree),
                    samples=sc.samples,
                    tol=sc.tol,
                    seed=sc.seed,
                ),
            )
        )
        plan.append(
            (
                "traciality",
                lambda: trace_check(
                    model.state,
                    model.gens,
                    degree=min(sc.check_degree, 3),
                    samples=sc.samples,
                    tol=sc.tol,
                    seed=sc.seed,
                ),
            )
        )
        plan.append(("oracle_equivalence", lambda: _check_oracle(sc, model)))
    if sc.mode in ("single", "tensor", "free"):
        plan.append(("faithfulness", lambda: _check_faithfulness(sc, model)))
    return plan


@dataclass
class Report:
    scenario: dict
    checks: list[dict]
    overall_pass: bool
    version: str = __version__
    inputs: list[dict] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "version": self.version,
            "scenario": self.scenario,
            "inputs": self.inputs,
            "checks": self.checks,
            "overall_pass": self.overall_pass,
        }


def run_theorem_suite(sc: Scenario, subset: Sequence[str] | None = None) -> Report:
    """Build the scenario's model and run every applicable check.

    Construction failures become a failing report entry rather than an
    exception; ``subset`` restricts the check names to run.
    """
    entries: list[dict] = []
    t0 = time.perf_counter()
    try:
        model = build_model(sc)
        construction = {
            "name": "construction",
            "residual": 0.0,
            "tol": sc.tol,
            "passed": True,
            "witness": None,
            "details": {"ambient_dim": model.ambient_dim, "mode": sc.mode},
        }
        if model.free is not None:
            construction["details"]["fock_dim"] = model.free.dim
            construction["details"]["base_fock_dim"] = model.free.fock_h.dim
        construction["seconds"] = round(time.perf_counter() - t0, 6)
        entries.append(construction)
    except (ValueError, KeyError) as exc:
        entries.append(
            {
                "name": "construction",
                "residual": float("inf"),
                "tol": sc.tol,
                "passed": False,
                "witness": {"error": str(exc)},
                "details": {"mode": sc.mode},
                "seconds": round(time.perf_counter() - t0, 6),
            }
        )
        return Report(
            scenario=sc.to_obj(),
            checks=entries,
            overall_pass=False,
            inputs=[{"path": p, "sha256": h} for p, h in sc.sources],
        )

    for name, thunk in suite_plan(sc, model):
        if subset is not None and name not in subset:
            continue
        t0 = time.perf_counter()
        try:
            rep = thunk()
            entry = rep.to_obj()
        except (ValueError, KeyError) as exc:
            entry = {
                "name": name,
                "residual": float("inf"),
                "tol": sc.tol,
                "passed": False,
                "witness": {"error": str(exc)},
                "details": {},
            }
        entry["seconds"] = round(time.perf_counter() - t0, 6)
        entries.append(entry)

    return _finalize_report(sc, entries)


def _finalize_report(sc: Scenario, entries: list[dict]) -> Report:
    for entry in entries:
        entry.setdefault("seconds", 0.0)
        if isinstance(entry.get("residual"), float) and not np.isfinite(entry["residual"]):
            entry["residual"] = float("inf")
    overall = all(entry["passed"] for entry in entries)
    return Report(
        scenario=sc.to_obj(),
        checks=entries,
        overall_pass=overall,
        inputs=[{"path": p, "sha256": h} for p, h in sc.sources],
    )


def report_fingerprint(obj: dict) -> str:
    """Canonical JSON with timing fields removed, for determinism comparison."""

    def strip(x):
        if isinstance(x, dict):
            return {k: strip(v) for k, v in sorted(x.items()) if k != "seconds"}
        if isinstance(x, list):
            return [strip(v) for v in x]
        return x

    return json.dumps(strip(obj), sort_keys=True)


def render_text(report_obj: dict) -> str:
    """Aligned human-readable table for a report."""
    lines = [f"version {report_obj.get('version', '?')}"]
    sc = report_obj.get("scenario", {})
    if sc:
        lines.append(
            f"mode={sc.get('mode')} factors={len(sc.get('factors', []))} "
            f"degree={sc.get('degree')} trunc={sc.get('trunc')} seed={sc.get('seed')}"
        )
    rows = []
    for entry in report_obj.get("checks", []):
        rows.append(
            (
                entry["name"],
                f"{entry['residual']:.3e}",
                f"{entry['tol']:.1e}",
                "pass" if entry["passed"] else "FAIL",
                json.dumps(entry.get("witness")) if entry.get("witness") else "-",
            )
        )
    if rows:
        widths = [max(len(r[i]) for r in rows + [("check", "residual", "tol", "ok", "witness")]) for i in range(5)]
        header = ("check", "residual", "tol", "ok", "witness")
        lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for r in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    lines.append(
        "overall: " + ("pass" if report_obj.get("overall_pass") else "FAIL")
    )
    return "\n".join(lines)
