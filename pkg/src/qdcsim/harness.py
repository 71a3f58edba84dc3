"""Seeded experiment runner and report writer.

An experiment is a JSON document::

    {"name": "clean", "scenario": "clean_session", "seeds": [0, 1, 2],
     "session": {"package_length": 6}, "message": {"packages": 100}}

Scenarios: ``tomography``, ``clean_session``, ``attack_session`` and
``walk_geometry``. Each seed runs independently and rows come back in seed
order, so the report does not depend on how seeds were scheduled.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .adversary import WalkGuesser, eve_information_leakage, make_strategy
from .basis_walk import STEP_ARC, walk_init, walk_states
from .errors import ConfigError
from .protocol import Session, SessionConfig, random_payloads
from .qubit import unit_axis
from .rng import label_digest, rng_stream
from .tomography import ASSIGNMENT_RULES, bob_determine_basis, eve_estimate_basis

SCENARIOS = ("tomography", "clean_session", "attack_session", "walk_geometry")
FORMATS = ("table", "delimited", "structured")
REFERENCE_AXIS = (0.5, 0.5, 1 / math.sqrt(2))

_SESSION_FIELDS = {
    "package_length": int,
    "shared_secret_seed": int,
    "basis_change_period": int,
    "error_rate_threshold": float,
    "monitoring_window": int,
    "eve_on_feedback": bool,
    "max_attempts": int,
    "initial_start": list,
    "initial_heading": list,
}


@dataclass
class ExperimentSpec:
    name: str
    scenario: str
    seeds: list[int]
    session: dict[str, Any] = field(default_factory=dict)
    strategy: dict[str, Any] | None = None
    message: dict[str, Any] = field(default_factory=lambda: {"packages": 100})
    tomography: dict[str, Any] = field(default_factory=dict)
    walk: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        if not isinstance(data, dict):
            raise ConfigError("$", "experiment must be a mapping")
        unknown = set(data) - {"name", "scenario", "seeds", "session", "strategy", "message", "tomography", "walk"}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        for key in ("name", "scenario", "seeds"):
            if key not in data:
                raise ConfigError(key, "required field missing")
        spec = cls(**copy.deepcopy(data))
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scenario": self.scenario,
            "seeds": list(self.seeds),
            "session": self.session,
            "strategy": self.strategy,
            "message": self.message,
            "tomography": self.tomography,
            "walk": self.walk,
        }

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"must be one of {SCENARIOS}")
        if not isinstance(self.seeds, list) or not self.seeds:
            raise ConfigError("seeds", "at least one seed is required")
        for i, s in enumerate(self.seeds):
            if not isinstance(s, int) or isinstance(s, bool) or not 0 <= s < 2**64:
                raise ConfigError(f"seeds[{i}]", "seeds are 64-bit unsigned integers")
        for key, value in self.session.items():
            if key not in _SESSION_FIELDS:
                raise ConfigError(f"session.{key}", "unknown field")
        if self.scenario in ("clean_session", "attack_session"):
            self.session_config(self.seeds[0])
            if not ("packages" in self.message or "payloads" in self.message):
                raise ConfigError("message", "needs 'packages' or 'payloads'")
        if self.scenario == "attack_session":
            if not self.strategy or "kind" not in self.strategy:
                raise ConfigError("strategy.kind", "attack_session needs a strategy")
            self.make_adversary(self.seeds[0])
        if self.scenario == "tomography":
            k = self.tomography.get("K")
            if not isinstance(k, int) or k < 2:
                raise ConfigError("tomography.K", "must be an integer >= 2")
            try:
                unit_axis(self.tomography.get("axis", REFERENCE_AXIS))
            except ValueError as exc:
                raise ConfigError("tomography.axis", str(exc)) from exc
            if self.tomography.get("mode", "bob") not in ("bob", "eve"):
                raise ConfigError("tomography.mode", "must be 'bob' or 'eve'")
            if self.tomography.get("assignment", "round_robin") not in ASSIGNMENT_RULES:
                raise ConfigError("tomography.assignment", f"must be one of {sorted(ASSIGNMENT_RULES)}")
        if self.scenario == "walk_geometry":
            steps = self.walk.get("steps")
            if not isinstance(steps, int) or steps < 1:
                raise ConfigError("walk.steps", "must be a positive integer")

    def session_config(self, seed: int) -> SessionConfig:
        opts = dict(self.session)
        start = opts.pop("initial_start", None)
        heading = opts.pop("initial_heading", None)
        try:
            init = walk_init(start, heading) if start is not None else walk_init()
        except ValueError as exc:
            raise ConfigError("session.initial_start", str(exc)) from exc
        # each seed gets its own secret so walks differ between runs
        base = int(opts.pop("shared_secret_seed", 0))
        secret = base ^ label_digest(f"secret/{seed}")
        for key, value in opts.items():
            kind = _SESSION_FIELDS[key]
            if kind in (int, float) and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise ConfigError(f"session.{key}", f"expected {kind.__name__}")
            if kind is bool and not isinstance(value, bool):
                raise ConfigError(f"session.{key}", "expected a boolean")
        return SessionConfig(initial_basis=init, shared_secret_seed=secret, **opts)

    def make_adversary(self, seed: int):
        if not self.strategy:
            return None
        params = dict(self.strategy)
        kind = params.pop("kind")
        params.pop("required_changes", None)  # scoring option, not a strategy parameter
        cfg = self.session_config(seed)
        if kind in ("fixed_axis", "intercept_resend"):
            params = _resolve_axis(params, cfg)
        elif kind == "walk_guesser":
            params.setdefault("guess_seed", seed)
            params["init"] = cfg.initial_basis
        try:
            return make_strategy(kind, **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError("strategy", str(exc)) from exc


def _resolve_axis(params: dict, cfg: SessionConfig) -> dict:
    """Accept ``axis`` directly or ``mismatch`` (radians away from the initial basis, toward its heading)."""
    if "mismatch" in params:
        arc = float(params.pop("mismatch"))
        n, h = cfg.initial_basis.current, cfg.initial_basis.heading
        params["axis"] = tuple(n.scale(math.cos(arc)).plus(h.scale(math.sin(arc))))
    if "axis" not in params:
        raise ConfigError("strategy.axis", "fixed-axis strategies need 'axis' or 'mismatch'")
    return params


@dataclass
class SimReport:
    name: str
    scenario: str
    columns: list[str]
    rows: list[dict[str, Any]]
    aggregate: dict[str, Any]
    duration_s: float = 0.0


def aggregate_rows(rows: list[dict], columns: list[str]) -> dict[str, Any]:
    """Mean of every numeric column (booleans as fractions), ignoring missing values."""
    agg: dict[str, Any] = {"seeds": len(rows)}
    for col in columns:
        if col == "seed":
            continue
        values = [r[col] for r in rows if r.get(col) is not None]
        if not values:
            agg[col] = None
        elif all(isinstance(v, (bool, int, float)) for v in values):
            agg[col] = math.fsum(float(v) for v in values) / len(values)
        else:
            agg[col] = None
    return agg


# per-scenario single-seed runners --------------------------------------------------------

def _payloads(spec: ExperimentSpec, cfg: SessionConfig, seed: int) -> list[str]:
    if "payloads" in spec.message:
        return list(spec.message["payloads"])
    return random_payloads(cfg.scheme, int(spec.message["packages"]), rng_stream(seed, "message"))


def _run_session(spec: ExperimentSpec, seed: int, transcript_dir=None) -> dict:
    cfg = spec.session_config(seed)
    eve = spec.make_adversary(seed) if spec.scenario == "attack_session" else None
    session = Session(cfg, seed, eve, record=transcript_dir is not None)
    result = session.run(_payloads(spec, cfg, seed))
    if transcript_dir is not None:
        session.transcript.write(f"{transcript_dir}/{spec.name}-{seed}.jsonl")
    row = {
        "seed": seed,
        "packages_sent": len(result.sent),
        "packages_delivered": len(result.delivered),
        "delivered_bit_error_rate": result.delivered_bit_error_rate,
        "aborted": result.aborted,
        "packages_to_abort": result.attempts_to_abort,
        "package_errors": result.errors,
        "basis_changes": result.basis_changes,
        "eve_bit_accuracy": None,
        "eve_guessed_all": None,
        "delayed_carriers": result.delayed_carriers,
    }
    if eve is not None and eve.record.guessed_bits:
        row["eve_bit_accuracy"] = eve_information_leakage(eve.record, session.intercepted_truth)
    if isinstance(eve, WalkGuesser):
        need = int(spec.strategy.get("required_changes", 8)) if spec.strategy else 8
        matches = eve.record.guess_matches
        row["eve_guessed_all"] = len(matches) >= need and all(matches[:need])
    return row


def _run_tomography(spec: ExperimentSpec, seed: int) -> dict:
    t = spec.tomography
    axis = unit_axis(t.get("axis", REFERENCE_AXIS))
    k = int(t["K"])
    rng = rng_stream(seed, "tomography")
    if t.get("mode", "bob") == "bob":
        est = bob_determine_basis(axis, k, rng)
    else:
        # Alice alternates the two states of one basis: balanced traffic of 3K carriers
        stream = [(i % 2, axis) for i in range(3 * k)]
        est = eve_estimate_basis(stream, t.get("assignment", "round_robin"), rng)
    row = {"seed": seed}
    for name, m, a in zip("xyz", est.mean, axis):
        row[f"est_{name}"] = m
        row[f"err_{name}"] = m - a
    row["std_error"] = max(est.std_error)
    return row


def walk_residuals(init, bits) -> dict:
    states = walk_states(init, bits)
    pts = np.array([init.current] + [s.current for s in states])
    heads = np.array([init.heading] + [s.heading for s in states])
    arcs = np.arccos(np.clip(np.einsum("ij,ij->i", pts[:-1], pts[1:]), -1, 1))
    # incoming tangent at point k is heads[k]; outgoing direction is the chord's tangent
    outgoing = pts[1:] - np.einsum("ij,ij->i", pts[1:], pts[:-1])[:, None] * pts[:-1]
    outgoing /= np.linalg.norm(outgoing, axis=1)[:, None]
    turns = np.einsum("ij,ij->i", heads[:-1], outgoing)
    return {
        "max_arc_residual": float(np.max(np.abs(arcs - STEP_ARC))),
        "max_turn_residual": float(np.max(np.abs(turns))),
        "max_norm_residual": float(np.max(np.abs(np.linalg.norm(pts, axis=1) - 1))),
    }


def _run_walk(spec: ExperimentSpec, seed: int) -> dict:
    steps = int(spec.walk["steps"])
    bits = rng_stream(seed, "walk").integers(0, 2, size=steps).tolist()
    return {"seed": seed, "steps": steps, **walk_residuals(walk_init(), bits)}


_RUNNERS = {
    "tomography": _run_tomography,
    "clean_session": _run_session,
    "attack_session": _run_session,
    "walk_geometry": _run_walk,
}


def run_seed(spec: ExperimentSpec, seed: int, transcript_dir=None) -> dict:
    if spec.scenario in ("clean_session", "attack_session"):
        return _run_session(spec, seed, transcript_dir)
    return _RUNNERS[spec.scenario](spec, seed)


def _run_seed_job(args):
    spec_dict, seed, transcript_dir = args
    return run_seed(ExperimentSpec.from_dict(spec_dict), seed, transcript_dir)


def run_experiment(spec: ExperimentSpec, workers: int = 1, transcript_dir=None) -> SimReport:
    spec.validate()
    start = time.perf_counter()
    if workers > 1 and len(spec.seeds) > 1:
        jobs = [(spec.to_dict(), s, transcript_dir) for s in spec.seeds]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_seed_job, jobs))
    else:
        rows = [run_seed(spec, s, transcript_dir) for s in spec.seeds]
    columns = list(rows[0])
    return SimReport(spec.name, spec.scenario, columns, rows, aggregate_rows(rows, columns), time.perf_counter() - start)


# report emission ----------------------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_report(report: SimReport, fmt: str = "table", timing: bool = False) -> str:
    if fmt not in FORMATS:
        raise ConfigError("format", f"must be one of {FORMATS}")
    agg_row = {"seed": "aggregate", **{c: report.aggregate.get(c) for c in report.columns if c != "seed"}}
    if fmt == "structured":
        doc = {
            "name": report.name,
            "scenario": report.scenario,
            "columns": report.columns,
            "rows": report.rows,
            "aggregate": report.aggregate,
        }
        if timing:
            doc["duration_s"] = report.duration_s
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "delimited":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows + [agg_row]:
            writer.writerow([_cell(row.get(c)) for c in report.columns])
        return buf.getvalue()
    table = [report.columns] + [[_cell(r.get(c)) for c in report.columns] for r in report.rows]
    table.append([_cell(agg_row.get(c)) if not isinstance(agg_row.get(c), float) else f"{agg_row[c]:.6g}" for c in report.columns])
    widths = [max(len(line[i]) for line in table) for i in range(len(report.columns))]
    lines = [f"# {report.name} ({report.scenario})"]
    for j, line in enumerate(table):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(line, widths)).rstrip())
        if j == 0 or j == len(table) - 2:
            lines.append("  ".join("-" * w for w in widths))
    if timing:
        lines.append(f"# duration {report.duration_s:.3f} s")
    return "\n".join(lines) + "\n"


def emit_report(report: SimReport, fmt: str = "table", path=None, timing: bool = False) -> str:
    """Render ``report`` and write it to ``path`` if given. Output is byte-stable unless ``timing`` is set."""
    text = render_report(report, fmt, timing)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


# config loading -----------------------------------------------------------------------------

def parse_override(text: str) -> tuple[list[str], Any]:
    if "=" not in text:
        raise ConfigError(text, "override must look like field.path=value")
    path, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path.split("."), value


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    data = copy.deepcopy(data)
    for text in overrides:
        keys, value = parse_override(text)
        node = data
        for key in keys[:-1]:
            nxt = node.get(key)
            if nxt is None:
                nxt = node[key] = {}
            if not isinstance(nxt, dict):
                raise ConfigError(".".join(keys), f"{key} is not a mapping")
            node = nxt
        node[keys[-1]] = value
    return data


def load_spec(path, overrides: list[str] = ()) -> ExperimentSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    return ExperimentSpec.from_dict(apply_overrides(data, list(overrides)))
