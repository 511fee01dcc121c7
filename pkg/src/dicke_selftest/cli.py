"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .bounds import certify, swap_count, swap_count_oracle, total_bound
from .core import DomainError
from .experiment import ExperimentSpec, NoiseSpec, apply_noise, load_experiment, reference_experiment
from .isometry import state_distance
from .reporting import csv_text, dumps
from .statistics import CSV_COLUMNS, verify

COMMANDS = ("verify", "certify", "bound", "sweep", "oracle")
SWEEP_COLUMNS = (
    "n",
    "k",
    "noise_kind",
    "noise_param",
    "epsilon",
    "empirical_distance",
    "fidelity",
    "delta1",
    "total_bound",
    "bound_respected",
)
CERTIFY_COLUMNS = SWEEP_COLUMNS
BOUND_COLUMNS = (
    "n",
    "k",
    "epsilon",
    "branch_norm",
    "relabel_error",
    "xz_overlap_bound",
    "delta1",
    "swap_count",
    "first_term",
    "second_term",
    "total",
    "first_term_sqrt_variant",
)
ORACLE_COLUMNS = ("n", "k", "formula", "enumeration", "match")
DEFAULT_GRID = (0.0, 0.005, 0.01, 0.02)

DEFAULTS = {
    "n": 4,
    "k": 2,
    "noise": "none",
    "shots": "exact",
    "seed": None,
    "eps": None,
    "tolerance": None,
    "strict": False,
    "out": None,
    "format": "json",
    "experiment": None,
    "max_n": 10,
    "grid": None,
}


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    command: str
    n: int = 4
    k: int = 2
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    shots: int = 0
    seed: int | None = None
    eps: float | None = None
    tolerance: float | None = None
    strict: bool = False
    out: str | None = None
    format: str = "json"
    experiment: str | None = None
    max_n: int = 10
    grid: tuple[float, ...] = DEFAULT_GRID
    sweep_kinds: tuple[str, ...] = ("state", "rotation")


def parse_noise(text: str, seed: int | None) -> NoiseSpec:
    """``none``, ``state:THETA``, ``rotation:THETA[,THETA...]``, or ``shots:COUNT``.

    A single rotation angle rotates party 1's X; a list gives one X angle per party.
    """
    kind, _, param = text.partition(":")
    try:
        if kind == "none":
            return NoiseSpec()
        if kind == "state":
            return NoiseSpec("state", theta=float(param), seed=seed)
        if kind == "rotation":
            angles = [float(t) for t in param.split(",")]
            rotations = tuple((p, "X", t) for p, t in enumerate(angles, start=1) if t != 0.0)
            return NoiseSpec("rotation", rotations=rotations)
        if kind == "shots":
            return NoiseSpec("shots", shots=int(param), seed=seed)
    except (ValueError, DomainError) as exc:
        raise UsageError("--noise", str(exc)) from exc
    raise UsageError("--noise", f"unknown noise kind {kind!r}")


def _parse_shots(value) -> int:
    if value in (None, "exact", 0, "0"):
        return 0
    try:
        shots = int(value)
    except ValueError:
        raise UsageError("--shots", f"expected a count or 'exact', got {value!r}") from None
    if shots < 0:
        raise UsageError("--shots", "must be nonnegative")
    return shots


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dicke-selftest", description="Dicke-state self-testing verifier.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat JSON file with the same keys as the flags")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--noise", help="none | state:THETA | rotation:THETA[,...] | shots:COUNT (sweep: kind only)")
    p.add_argument("--shots", help="sample count, or 'exact'")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--tolerance", type=float, help="fail (exit 1) when epsilon exceeds this")
    p.add_argument("--strict", action="store_true", default=None, help="fail when the bound is violated")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--experiment", help="experiment JSON overriding the generated one")
    p.add_argument("--max-n", dest="max_n", type=int)
    p.add_argument("--grid", help="comma-separated noise parameters for sweep")
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise UsageError("--config", f"cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError("--config", f"{args.config} is not valid JSON: {exc}") from exc
        unknown = set(doc) - set(DEFAULTS) - {"max-n"}
        if unknown:
            raise UsageError("--config", f"unknown keys {sorted(unknown)}")
        if "max-n" in doc:
            doc["max_n"] = doc.pop("max-n")
        merged.update(doc)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    cfg = RunConfig(command=args.command)
    cfg.n, cfg.k = int(merged["n"]), int(merged["k"])
    cfg.seed = None if merged["seed"] is None else int(merged["seed"])
    cfg.shots = _parse_shots(merged["shots"])
    cfg.eps = None if merged["eps"] is None else float(merged["eps"])
    cfg.tolerance = None if merged["tolerance"] is None else float(merged["tolerance"])
    cfg.strict = bool(merged["strict"])
    cfg.out = merged["out"]
    cfg.format = merged["format"]
    if cfg.format not in ("json", "csv"):
        raise UsageError("--format", f"expected json or csv, got {cfg.format!r}")
    cfg.experiment = merged["experiment"]
    cfg.max_n = int(merged["max_n"])
    if merged["grid"] is not None:
        try:
            cfg.grid = tuple(float(v) for v in str(merged["grid"]).split(","))
        except ValueError as exc:
            raise UsageError("--grid", str(exc)) from exc

    noise_text = str(merged["noise"])
    if cfg.command == "sweep":
        kind = noise_text.partition(":")[0]
        if kind not in ("none", "state", "rotation"):
            raise UsageError("--noise", f"sweep supports state or rotation, got {kind!r}")
        if kind != "none":
            cfg.sweep_kinds = (kind,)
        if "state" in cfg.sweep_kinds and cfg.seed is None:
            raise UsageError("--seed", "state-noise sweeps are stochastic and need a seed")
    else:
        cfg.noise = parse_noise(noise_text, cfg.seed)
        if cfg.noise.kind == "shots":
            cfg.shots = cfg.noise.shots
    if cfg.shots and cfg.seed is None:
        raise UsageError("--seed", "shot sampling is stochastic and needs a seed")

    if cfg.command == "bound" and cfg.eps is None:
        raise UsageError("--eps", "bound needs --eps")
    if cfg.command == "bound" and cfg.eps < 0:
        raise UsageError("--eps", "must be nonnegative")
    if cfg.command != "oracle" and cfg.experiment is None:
        if cfg.n < 2 or not 1 <= cfg.k <= cfg.n - 1:
            raise UsageError("--k", f"need 1 <= k <= n-1 with n >= 2, got n={cfg.n}, k={cfg.k}")
    return cfg


def build_experiment(cfg: RunConfig) -> ExperimentSpec:
    if cfg.experiment:
        try:
            exp = load_experiment(cfg.experiment)
        except OSError as exc:
            raise UsageError("--experiment", f"cannot read {cfg.experiment}: {exc.strerror}") from exc
        except (DomainError, json.JSONDecodeError) as exc:
            raise UsageError("--experiment", f"{cfg.experiment}: {exc}") from exc
    else:
        exp = reference_experiment(cfg.n, cfg.k)
    try:
        return apply_noise(exp, cfg.noise)
    except DomainError as exc:
        raise UsageError("--noise", str(exc)) from exc


def sweep_rows(cfg: RunConfig) -> list[dict]:
    rows = []
    base = reference_experiment(cfg.n, cfg.k)
    for kind in cfg.sweep_kinds:
        for param in cfg.grid:
            if kind == "state":
                noise = NoiseSpec("state", theta=param, seed=cfg.seed)
            else:
                noise = NoiseSpec("rotation", rotations=((1, "X", param),))
            exp = apply_noise(base, noise)
            eps = verify(exp, shots=cfg.shots, seed=cfg.seed).epsilon
            dist = state_distance(exp)
            bound = total_bound(cfg.n, cfg.k, eps)
            rows.append(
                {
                    "n": cfg.n,
                    "k": cfg.k,
                    "noise_kind": kind,
                    "noise_param": param,
                    "epsilon": eps,
                    "empirical_distance": dist.l2_distance,
                    "fidelity": dist.dicke_fidelity,
                    "delta1": bound.delta1,
                    "total_bound": bound.total,
                    "bound_respected": dist.l2_distance <= bound.total,
                }
            )
    return rows


def oracle_rows(max_n: int) -> list[dict]:
    rows = []
    for n in range(2, max_n + 1):
        for k in range(1, n):
            formula, enum = swap_count(n, k), swap_count_oracle(n, k)
            rows.append({"n": n, "k": k, "formula": formula, "enumeration": enum, "match": formula == enum})
    return rows


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command; returns ``(exit_status, rendered_output)``."""
    status = 0
    if cfg.command == "verify":
        report = verify(build_experiment(cfg), shots=cfg.shots, seed=cfg.seed)
        doc = report.to_dict()
        if cfg.format == "csv":
            text = csv_text(CSV_COLUMNS, doc["entries"])
        else:
            text = dumps(doc)
        if cfg.tolerance is not None and report.epsilon > cfg.tolerance:
            status = 1
    elif cfg.command == "certify":
        exp = build_experiment(cfg)
        report = certify(exp, shots=cfg.shots, seed=cfg.seed)
        if cfg.format == "csv":
            row = {
                "n": report.n,
                "k": report.k,
                "noise_kind": cfg.noise.kind,
                "noise_param": cfg.noise.param,
                "epsilon": report.epsilon,
                "empirical_distance": report.empirical_distance,
                "fidelity": report.dicke_fidelity,
                "delta1": report.bound.delta1,
                "total_bound": report.bound.total,
                "bound_respected": report.bound_respected,
            }
            text = csv_text(CERTIFY_COLUMNS, [row])
        else:
            text = dumps(report.to_dict())
        if cfg.strict and not report.bound_respected:
            status = 1
        if cfg.tolerance is not None and report.epsilon > cfg.tolerance:
            status = 1
    elif cfg.command == "bound":
        doc = total_bound(cfg.n, cfg.k, cfg.eps).to_dict()
        text = csv_text(BOUND_COLUMNS, [doc]) if cfg.format == "csv" else dumps(doc)
    elif cfg.command == "sweep":
        rows = sweep_rows(cfg)
        text = csv_text(SWEEP_COLUMNS, rows) if cfg.format == "csv" else dumps({"rows": rows})
        if cfg.strict and not all(r["bound_respected"] for r in rows):
            status = 1
    else:
        if not 2 <= cfg.max_n <= 20:
            raise UsageError("--max-n", "must lie in [2, 20]")
        rows = oracle_rows(cfg.max_n)
        text = csv_text(ORACLE_COLUMNS, rows) if cfg.format == "csv" else dumps({"rows": rows})
        if not all(r["match"] for r in rows):
            status = 1
    return status, text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        status, text = run(cfg)
    except UsageError as exc:
        print(f"dicke-selftest: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"dicke-selftest: error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as exc:
            print(f"dicke-selftest: error: cannot write {cfg.out}: {exc.strerror}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
