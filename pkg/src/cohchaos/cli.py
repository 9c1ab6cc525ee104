"""Batch runner: ``cohchaos run|validate|list-experiments``.

Each run writes CSV tables plus ``manifest.json`` into the output directory,
chosen in order from ``--output-dir``, ``output.directory`` in the config, the
``COHCHAOS_OUTPUT_DIR`` environment variable, and ``./cohchaos-output``.
Exit codes: 0 success, 2 invalid config, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .coherence import eigenstate_coherence_scan
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, serialize, validate
from .dynamics import UnitaryEigensystem, otoc_cgp_decomposition, time_grid
from .ensembles import EnsembleSpec, sample_gue, sample_haar_unitary
from .linalg import OrthonormalBasis, eigh, evolve
from .majorization import eigenstate_majorization_flags
from .models import (
    TfimParams,
    XxzDefectParams,
    build_tfim,
    build_xxz_defect,
    mean_field_decomposition,
    sigma_z_diagonal,
)
from .rmt import gue_cgp_bound_check, klocal_short_time_scan, r4_single, short_time_cgp_curvature, spacing_statistics
from .utils import central_slice

ENV_OUTPUT_DIR = "COHCHAOS_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "cohchaos-output"

DESCRIPTIONS = {
    "spectrum": "eigenvalues, normalised spacings and gap ratios of an XXZ-defect or TFIM Hamiltonian",
    "eigencoherence": "coherence measures of every eigenstate in a chosen basis, with GOE normalisation",
    "majorization": "pairwise majorization of integrable vs chaotic XXZ eigenstates and window fractions",
    "dynamics": "edge OTOC of the TFIM with its CGP / off-diagonal decomposition over a time grid",
    "rmt": "four-point spectral form factor and the GUE CGP bound over a time grid",
    "shorttime": "short-time CGP curvature for the commuting k-local family or random GUE instances",
}

Table = tuple[list[str], list[tuple]]


@dataclass(frozen=True)
class RunManifest:
    config_sha256: str
    version: str
    experiment: str
    wall_time_seconds: float
    files: tuple[dict, ...]
    flags: dict

    def to_json(self) -> str:
        payload = {
            "config_sha256": self.config_sha256,
            "version": self.version,
            "experiment": self.experiment,
            "wall_time_seconds": self.wall_time_seconds,
            "files": list(self.files),
            "flags": self.flags,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % (float(x) + 0.0)  # no negative zero
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> int:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{path.name}: row width {len(row)} != header width {len(header)}")
            w.writerow([_fmt(x) for x in row])
    return len(rows)


# ---------------------------------------------------------------------------
# experiments


def _xxz(m: dict, delta: int) -> XxzDefectParams:
    return XxzDefectParams(
        L=m["L"], n_up=m["n_up"], delta=delta, omega=m["omega"],
        epsilon_delta=m["epsilon_delta"], J_xy=m["J_xy"], J_z=m["J_z"],
    )


def _hamiltonian(m: dict) -> np.ndarray:
    if m["kind"] == "xxz_defect":
        return build_xxz_defect(_xxz(m, m["delta"]))
    return build_tfim(TfimParams(m["L"], m["g"], m["h"]))


def _spectrum(cfg: ExperimentConfig, flags: dict) -> dict[str, Table]:
    spec = eigh(_hamiltonian(cfg.model))
    stats = spacing_statistics(spec, fraction=cfg.analysis["fraction"])
    flags["min_gap"] = spec.min_gap
    flags["mean_gap_ratio"] = stats.mean_ratio
    return {
        "spectrum.csv": (["index", "energy"], list(enumerate(spec.eigenvalues))),
        "spacings.csv": (["index", "spacing"], list(enumerate(stats.spacings))),
        "gap_ratios.csv": (["index", "ratio"], list(enumerate(stats.ratios))),
    }


def _basis(cfg: ExperimentConfig, d: int, flags: dict, delta: int | None = None) -> OrthonormalBasis:
    basis = cfg.basis
    if isinstance(basis, dict):
        vecs = np.load(basis["file"])
        b = OrthonormalBasis(vecs)
        if b.dimension != d:
            raise ValueError(f"custom basis has dimension {b.dimension}, model has {d}")
        return b
    if basis == "mean_field":
        m = cfg.model
        mf = mean_field_decomposition(_xxz(m, m["delta"] if delta is None else delta))
        flags["basis_min_gap"] = mf.min_gap
        flags["basis_degenerate"] = mf.is_degenerate()
        return mf.basis
    return OrthonormalBasis.computational(d)


def _eigencoherence(cfg: ExperimentConfig, flags: dict) -> dict[str, Table]:
    spec = eigh(_hamiltonian(cfg.model))
    b = _basis(cfg, spec.dimension, flags)
    reports = eigenstate_coherence_scan(None, b, cfg.analysis["measures"], spec=spec)
    flags["hamiltonian_min_gap"] = spec.min_gap
    return {"eigencoherence.csv": (list(reports[0].FIELDS), [r.row() for r in reports])}


def _majorization(cfg: ExperimentConfig, flags: dict) -> dict[str, Table]:
    m = cfg.model
    si = eigh(build_xxz_defect(_xxz(m, m["delta_integrable"])))
    sc = eigh(build_xxz_defect(_xxz(m, m["delta_chaotic"])))
    # both partners are dephased in one basis; the mean-field option uses the chaotic chain's
    b = _basis(cfg, si.dimension, flags, delta=m["delta_chaotic"])
    ok = eigenstate_majorization_flags(None, None, b, si, sc)
    rows = [(k, si.eigenvalues[k], sc.eigenvalues[k], bool(ok[k])) for k in range(ok.size)]
    fr = []
    for w in cfg.analysis["windows"]:
        sel = ok[central_slice(ok.size, w)]
        fr.append((w, int(sel.size), int(sel.sum()), float(sel.mean())))
    return {
        "majorization.csv": (["index", "energy_integrable", "energy_chaotic", "majorized"], rows),
        "fractions.csv": (["window", "states", "majorized", "fraction"], fr),
    }


def _dynamics(cfg: ExperimentConfig, flags: dict) -> dict[str, Table]:
    m = cfg.model
    p = TfimParams(m["L"], m["g"], m["h"])
    spec = eigh(build_tfim(p))
    vsys = UnitaryEigensystem.diagonal(sigma_z_diagonal(p.L, m["v_site"]))
    wsys = UnitaryEigensystem.diagonal(sigma_z_diagonal(p.L, m["w_site"]))
    tg = cfg.time
    rows = []
    worst = 0.0
    for t in time_grid(tg["t_min"], tg["t_max"], tg["dt"]):
        dec = otoc_cgp_decomposition(vsys, wsys, evolve(spec, t))
        worst = max(worst, dec.residual)
        rows.append((t, dec.total, dec.cgp_part, dec.offdiag_part))
    flags["max_decomposition_residual"] = worst
    flags["regime"] = p.regime
    return {"dynamics.csv": (["t", "otoc", "cgp_part", "offdiag_part"], rows)}


def _ensemble(cfg: ExperimentConfig) -> EnsembleSpec:
    e = cfg.ensemble
    return EnsembleSpec(e["kind"], e["d"], e["samples"], e["seed"])


def _rmt(cfg: ExperimentConfig, flags: dict) -> dict[str, Table]:
    ens = _ensemble(cfg)
    tg = cfg.time
    times = time_grid(tg["t_min"], tg["t_max"], tg["dt"])
    vals = np.array([r4_single(np.linalg.eigvalsh(h), times, cfg.analysis["convention"]) for h in ens])
    mean = vals.mean(axis=0)
    err = vals.std(axis=0, ddof=1) / math.sqrt(ens.samples) if ens.samples > 1 else np.zeros_like(mean)
    out = {"sff.csv": (["t", "r4", "r4_stderr"], list(zip(times, mean, err)))}
    if ens.kind == "GUE":
        rows = gue_cgp_bound_check(ens, None, times)
        flags["bound_holds_everywhere"] = all(r.holds for r in rows)
        out["bound.csv"] = (
            ["t", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "holds"],
            [(r.t, r.lhs, r.lhs_stderr, r.rhs, r.rhs_stderr, r.holds) for r in rows],
        )
    return out


def _shorttime(cfg: ExperimentConfig, flags: dict) -> dict[str, Table]:
    out = {}
    if cfg.model is not None:
        rows = []
        for k in cfg.model["k_values"]:
            for r in klocal_short_time_scan(cfg.model["L_values"], k):
                rows.append((r.L, r.k, r.norm_inf, r.trace_h2, r.finite_difference, r.normalized, r.inverse_terms))
        out["shorttime_klocal.csv"] = (
            ["L", "k", "norm_inf", "trace_h2", "finite_difference", "normalized", "inverse_terms"], rows
        )
    if cfg.ensemble is not None:
        ens = _ensemble(cfg)
        rows = []
        for i in range(ens.samples):
            rng = ens.rng(i)
            h = sample_gue(ens.d, rng)
            b = OrthonormalBasis(sample_haar_unitary(ens.d, rng))
            r = short_time_cgp_curvature(h, b)
            rows.append((i, r.analytic, r.finite_difference, r.kappa, r.q_bound, r.bound_chain_holds))
        out["curvature.csv"] = (["sample", "analytic", "finite_difference", "kappa", "q_bound", "bound_holds"], rows)
    return out


RUNNERS: dict[str, Callable[[ExperimentConfig, dict], dict[str, Table]]] = {
    "spectrum": _spectrum,
    "eigencoherence": _eigencoherence,
    "majorization": _majorization,
    "dynamics": _dynamics,
    "rmt": _rmt,
    "shorttime": _shorttime,
}


def resolve_output_dir(cfg: ExperimentConfig, override: str | None = None) -> Path:
    return Path(override or cfg.output.get("directory") or os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(cfg: ExperimentConfig, output_dir: str | None = None) -> RunManifest:
    """Execute a validated config and write its CSV tables and manifest."""
    start = time.perf_counter()
    outdir = resolve_output_dir(cfg, output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    flags: dict = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tables = RUNNERS[cfg.experiment](cfg, flags)
    if caught:
        flags["warnings"] = sorted({str(w.message) for w in caught})
    files = []
    for name in sorted(tables):
        header, rows = tables[name]
        path = outdir / name
        n = write_csv(path, header, rows)
        files.append({"name": name, "rows": n, "sha256": _sha256(path)})
    cfg_hash = hashlib.sha256(serialize(cfg).encode()).hexdigest()
    manifest = RunManifest(
        cfg_hash, __version__, cfg.experiment, round(time.perf_counter() - start, 6), tuple(files),
        {k: _jsonable(v) for k, v in sorted(flags.items())},
    )
    (outdir / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest


def _jsonable(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


# ---------------------------------------------------------------------------
# command line


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cohchaos", description="coherence-based chaos diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None)
    p_val = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    p_val.add_argument("config")
    sub.add_parser("list-experiments", help="list experiment kinds")
    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in EXPERIMENTS:
            print(f"{name}\t{DESCRIPTIONS[name]}")
        return 0
    try:
        cfg = validate(_read(args.config))
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        for err in exc.errors:
            print(f"invalid config: {err}", file=sys.stderr)
        return 2
    if args.command == "validate":
        sys.stdout.write(serialize(cfg))
        return 0
    try:
        manifest = run(cfg, args.output_dir)
    except Exception as exc:  # surfaced as a runtime failure with its message
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for f in manifest.files:
        print(f"{f['name']}\t{f['rows']} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
