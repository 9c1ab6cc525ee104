"""Experiment configuration: YAML parsing, validation with defaults, serialisation.

A config is a single YAML mapping. Validation collects every problem before
failing and fills in defaults, so ``validate(serialize(cfg)) == cfg``.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Any

import yaml

from .models import MAX_FULL_SITES, MAX_SECTOR_SITES

EXPERIMENTS = ("spectrum", "eigencoherence", "majorization", "dynamics", "rmt", "shorttime")
BASES = ("site", "mean_field", "computational")
MEASURES = ("c2", "c_rel", "c_l1", "pr2")

MODEL_KINDS = {
    "spectrum": ("xxz_defect", "tfim"),
    "eigencoherence": ("xxz_defect", "tfim"),
    "majorization": ("xxz_defect_pair",),
    "dynamics": ("tfim",),
    "rmt": (),
    "shorttime": ("k_local",),
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem as ``field: message``."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    experiment: str
    model: dict | None = None
    basis: Any = None
    time: dict | None = None
    ensemble: dict | None = None
    analysis: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"experiment": self.experiment}
        for key in ("model", "basis", "time", "ensemble", "analysis", "output"):
            val = getattr(self, key)
            if val not in (None, {}):
                out[key] = copy.deepcopy(val)
        return out

    @property
    def needs_seed(self) -> bool:
        return self.ensemble is not None


def serialize(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)


# ---------------------------------------------------------------------------
# field checkers: each returns the cleaned value or records an error


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, where: str, msg: str):
        self.errors.append(f"{where}: {msg}")

    def block(self, raw: dict, name: str, required: bool) -> dict | None:
        if name not in raw or raw[name] is None:
            if required:
                self.fail(name, "required block missing")
            return None
        if not isinstance(raw[name], dict):
            self.fail(name, "must be a mapping")
            return None
        return raw[name]

    def integer(self, blk: dict, where: str, key: str, default=None, lo=None, hi=None, required=False):
        path = f"{where}.{key}"
        if key not in blk:
            if required:
                self.fail(path, "required field missing")
            return default
        val = blk[key]
        if isinstance(val, bool) or not isinstance(val, int):
            self.fail(path, f"expected an integer, got {val!r}")
            return default
        if lo is not None and val < lo:
            self.fail(path, f"must be >= {lo}, got {val}")
        if hi is not None and val > hi:
            self.fail(path, f"must be <= {hi}, got {val}")
        return val

    def number(self, blk: dict, where: str, key: str, default=None, required=False, positive=False):
        path = f"{where}.{key}"
        if key not in blk:
            if required:
                self.fail(path, "required field missing")
            return default
        val = blk[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.fail(path, f"expected a number, got {val!r}")
            return default
        val = float(val)
        if val != val or val in (float("inf"), float("-inf")):
            self.fail(path, "must be finite")
        elif positive and val <= 0:
            self.fail(path, f"must be positive, got {val}")
        return val

    def unknown(self, blk: dict, where: str, allowed):
        for key in blk:
            if key not in allowed:
                self.fail(f"{where}.{key}", f"unknown field; allowed: {', '.join(sorted(allowed))}")


def _check_model(c: _Checker, raw: dict, experiment: str) -> dict | None:
    kinds = MODEL_KINDS[experiment]
    blk = c.block(raw, "model", required=bool(kinds) and experiment != "shorttime")
    if blk is None:
        return None
    if not kinds:
        c.fail("model", f"experiment '{experiment}' takes no model block")
        return None
    kind = blk.get("kind", kinds[0] if len(kinds) == 1 else None)
    if kind not in kinds:
        c.fail("model.kind", f"unknown kind {kind!r} for '{experiment}'; valid kinds: {', '.join(kinds)}")
        return None
    out: dict = {"kind": kind}
    if kind in ("xxz_defect", "xxz_defect_pair"):
        L = c.integer(blk, "model", "L", lo=2, hi=MAX_SECTOR_SITES, required=True)
        out["L"] = L
        Lv = L if isinstance(L, int) else 0
        out["n_up"] = c.integer(blk, "model", "n_up", default=Lv // 3, lo=0, hi=Lv or None)
        if Lv and isinstance(out["n_up"], int) and 0 <= out["n_up"] <= Lv and math.comb(Lv, out["n_up"]) < 2:
            c.fail("model.n_up", "magnetisation sector must have dimension >= 2")
        if kind == "xxz_defect":
            delta = c.integer(blk, "model", "delta", required=True)
            if isinstance(delta, int) and Lv and not 1 <= delta <= Lv:
                c.fail("model.delta", f"defect site out of range: {delta} not in [1, {Lv}]")
            out["delta"] = delta
            keys = {"kind", "L", "n_up", "delta"}
        else:
            for key, default in (("delta_integrable", 1), ("delta_chaotic", Lv // 2)):
                val = c.integer(blk, "model", key, default=default)
                if isinstance(val, int) and Lv and not 1 <= val <= Lv:
                    c.fail(f"model.{key}", f"defect site out of range: {val} not in [1, {Lv}]")
                out[key] = val
            keys = {"kind", "L", "n_up", "delta_integrable", "delta_chaotic"}
        for key, default in (("omega", 0.0), ("epsilon_delta", 0.5), ("J_xy", 1.0), ("J_z", 0.5)):
            out[key] = c.number(blk, "model", key, default=default)
        c.unknown(blk, "model", keys | {"omega", "epsilon_delta", "J_xy", "J_z"})
    elif kind == "tfim":
        L = c.integer(blk, "model", "L", lo=2, hi=MAX_FULL_SITES, required=True)
        out["L"] = L
        out["g"] = c.number(blk, "model", "g", required=True)
        out["h"] = c.number(blk, "model", "h", required=True)
        allowed = {"kind", "L", "g", "h"}
        if experiment == "dynamics":
            Lv = L if isinstance(L, int) else None
            out["v_site"] = c.integer(blk, "model", "v_site", default=1, lo=1, hi=Lv)
            out["w_site"] = c.integer(blk, "model", "w_site", default=Lv, lo=1, hi=Lv)
            allowed |= {"v_site", "w_site"}
        c.unknown(blk, "model", allowed)
    elif kind == "k_local":
        Ls = blk.get("L_values")
        if not isinstance(Ls, list) or not Ls or not all(isinstance(x, int) and not isinstance(x, bool) for x in Ls):
            c.fail("model.L_values", "required non-empty list of integers")
            Ls = []
        elif any(not 1 <= x <= MAX_FULL_SITES for x in Ls):
            c.fail("model.L_values", f"entries must lie in [1, {MAX_FULL_SITES}]")
        ks = blk.get("k_values", [1])
        if not isinstance(ks, list) or not ks:
            c.fail("model.k_values", "must be a non-empty list of integers or 'L'")
            ks = []
        for k in ks:
            if k == "L":
                continue
            if isinstance(k, bool) or not isinstance(k, int) or k < 1:
                c.fail("model.k_values", f"invalid entry {k!r}; use positive integers or 'L'")
            elif Ls and k > min(Ls):
                c.fail("model.k_values", f"k={k} exceeds the smallest L={min(Ls)}")
        out["L_values"] = list(Ls)
        out["k_values"] = list(ks)
        c.unknown(blk, "model", {"kind", "L_values", "k_values"})
    return out


def _check_basis(c: _Checker, raw: dict, experiment: str, model: dict | None):
    basis = raw.get("basis")
    if experiment not in ("eigencoherence", "majorization"):
        if basis is not None:
            c.fail("basis", f"not used by experiment '{experiment}'")
        return None
    basis = "site" if basis is None else basis
    if experiment == "majorization":
        if basis not in ("site", "mean_field"):
            c.fail("basis", f"unknown basis {basis!r}; valid: site, mean_field")
        return basis
    if isinstance(basis, dict):
        if set(basis) != {"file"} or not isinstance(basis["file"], str):
            c.fail("basis", "custom basis must be given as {file: <path to .npy unitary>}")
        return basis
    if basis not in BASES:
        c.fail("basis", f"unknown basis {basis!r}; valid: {', '.join(BASES)} or {{file: path}}")
    elif basis == "mean_field" and model is not None and model.get("kind") != "xxz_defect":
        c.fail("basis", "mean_field basis is defined for the xxz_defect model only")
    return basis


def _check_time(c: _Checker, raw: dict, experiment: str) -> dict | None:
    required = experiment in ("dynamics", "rmt")
    blk = c.block(raw, "time", required)
    if blk is None:
        return None
    if not required:
        c.fail("time", f"not used by experiment '{experiment}'")
        return None
    out = {
        "t_min": c.number(blk, "time", "t_min", default=0.0),
        "t_max": c.number(blk, "time", "t_max", required=True),
        "dt": c.number(blk, "time", "dt", required=True, positive=True),
    }
    c.unknown(blk, "time", {"t_min", "t_max", "dt"})
    if all(isinstance(out[k], float) for k in out):
        if out["t_max"] <= out["t_min"]:
            c.fail("time.t_max", "must exceed t_min")
        elif out["dt"] > out["t_max"] - out["t_min"]:
            c.fail("time.dt", "must not exceed t_max - t_min")
        elif (out["t_max"] - out["t_min"]) / out["dt"] > 1e6:
            c.fail("time.dt", "grid exceeds 10^6 points")
    return out


def _check_ensemble(c: _Checker, raw: dict, experiment: str) -> dict | None:
    required = experiment == "rmt"
    blk = c.block(raw, "ensemble", required)
    if blk is None:
        return None
    if experiment not in ("rmt", "shorttime"):
        c.fail("ensemble", f"not used by experiment '{experiment}'")
    valid = ("GOE", "GUE") if experiment == "rmt" else ("GUE",)
    kind = blk.get("kind")
    if kind not in valid:
        c.fail("ensemble.kind", f"unknown kind {kind!r}; valid kinds: {', '.join(valid)}")
    out = {
        "kind": kind,
        "d": c.integer(blk, "ensemble", "d", lo=2, hi=4096, required=True),
        "samples": c.integer(blk, "ensemble", "samples", lo=1, required=True),
    }
    if "seed" not in blk:
        c.fail("ensemble.seed", "seed is mandatory whenever sampling occurs")
        out["seed"] = None
    else:
        out["seed"] = c.integer(blk, "ensemble", "seed", lo=0, hi=2**64 - 1)
    c.unknown(blk, "ensemble", {"kind", "d", "samples", "seed"})
    return out


def _check_analysis(c: _Checker, raw: dict, experiment: str) -> dict:
    blk = c.block(raw, "analysis", required=False) or {}
    out: dict = {}
    if experiment == "eigencoherence":
        ms = blk.get("measures", list(MEASURES))
        if not isinstance(ms, list) or any(m not in MEASURES for m in ms):
            c.fail("analysis.measures", f"must be a list drawn from {', '.join(MEASURES)}")
        out["measures"] = ms
        allowed = {"measures"}
    elif experiment == "majorization":
        ws = blk.get("windows", [1.0, 0.2])
        if not isinstance(ws, list) or not ws or any(
            isinstance(w, bool) or not isinstance(w, (int, float)) or not 0 < w <= 1 for w in ws
        ):
            c.fail("analysis.windows", "must be a non-empty list of fractions in (0, 1]")
        else:
            ws = [float(w) for w in ws]
        out["windows"] = ws
        allowed = {"windows"}
    elif experiment == "spectrum":
        out["fraction"] = c.number(blk, "analysis", "fraction", default=0.8, positive=True)
        if isinstance(out["fraction"], float) and out["fraction"] > 1:
            c.fail("analysis.fraction", "must lie in (0, 1]")
        allowed = {"fraction"}
    elif experiment == "rmt":
        conv = blk.get("convention", "distinct")
        if conv not in ("distinct", "all"):
            c.fail("analysis.convention", f"unknown convention {conv!r}; valid: distinct, all")
        out["convention"] = conv
        allowed = {"convention"}
    else:
        allowed = set()
    c.unknown(blk, "analysis", allowed)
    return out


def _check_output(c: _Checker, raw: dict) -> dict:
    blk = c.block(raw, "output", required=False) or {}
    out: dict = {"format": blk.get("format", "csv")}
    if out["format"] != "csv":
        c.fail("output.format", f"unsupported format {out['format']!r}; valid: csv")
    if "directory" in blk:
        if not isinstance(blk["directory"], str) or not blk["directory"]:
            c.fail("output.directory", "must be a non-empty string")
        out["directory"] = blk["directory"]
    c.unknown(blk, "output", {"format", "directory"})
    return out


def from_mapping(raw) -> ExperimentConfig:
    """Validate a parsed mapping; raise ``ConfigError`` with every problem found."""
    c = _Checker()
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: config must be a mapping"])
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError([f"experiment: unknown kind {exp!r}; valid kinds: {', '.join(EXPERIMENTS)}"])
    model = _check_model(c, raw, exp)
    basis = _check_basis(c, raw, exp, model)
    time = _check_time(c, raw, exp)
    ensemble = _check_ensemble(c, raw, exp)
    analysis = _check_analysis(c, raw, exp)
    output = _check_output(c, raw)
    if exp == "shorttime" and model is None and ensemble is None:
        c.fail("model", "shorttime needs a k_local model block or a GUE ensemble block")
    c.unknown(raw, "<root>", {"experiment", "model", "basis", "time", "ensemble", "analysis", "output"})
    if c.errors:
        raise ConfigError(c.errors)
    return ExperimentConfig(exp, model, basis, time, ensemble, analysis, output)


def validate(text: str) -> ExperimentConfig:
    """Parse YAML ``text`` and validate it."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "<parse>"
        raise ConfigError([f"{where}: {getattr(exc, 'problem', None) or exc}"]) from None
    return from_mapping(raw)
