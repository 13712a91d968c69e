"""Command-line entry point.

Subcommands::

    qlls table [--measures flat,bures,classical] [--n 2,4] [--out FILE]
    qlls verify-designs [--tmax 6]
    qlls simulate CONFIG [--seed S] [--out FILE] [--reference analytic|discretized] [--workers W]

``--workers 0`` runs the K repetitions on every available core.
    qlls discord

Exit codes: 0 success, 2 configuration error, 3 estimation failure (some
``(M, k)`` row had no successful run; the CSV is still written).

Experiment files are plain ``key = value`` lines; ``#`` starts a comment.
Keys: ``n``, ``N``, ``K``, ``measure`` (flat|bures), ``design``
(clifford|icosahedral), ``estimator`` (est1|est2), ``master_seed``, exactly
one of ``M`` (integer) or ``M_list`` (comma-separated integers, ascending),
and optionally ``output`` (path).
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analytics import ANALYTIC_COLUMNS, QuadratureSpec, analytic_rows, get_measure
from .designs import DESIGNS, frame_potential, get_design, haar_frame_potential
from .discord import DISCORD_CLOSED_FORM, bloch_components, global_discord_2q, pauli_coefficients, rho2_flat
from .errors import ConfigError, DomainError
from .protocol import RunConfig, convergence_sweep

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATION = 0, 2, 3

SIMULATE_COLUMNS = ("measure", "estimator", "n", "k", "M", "K", "mean", "variance", "mse", "failed_runs")

_REQUIRED = ("n", "N", "K", "measure", "design", "estimator", "master_seed")
_OPTIONAL = ("M", "M_list", "output")


@dataclass(frozen=True)
class ExperimentFile:
    n: int
    N: int
    M_list: tuple[int, ...]
    K: int
    measure: str
    design: str
    estimator: str
    master_seed: int
    output: str | None = None


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def parse_experiment(text: str) -> ExperimentFile:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _REQUIRED + _OPTIONAL:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    if ("M" in values) == ("M_list" in values):
        raise ConfigError("give exactly one of 'M' or 'M_list'")
    if "M" in values:
        M_list = (_int("M", values["M"]),)
    else:
        M_list = tuple(_int("M_list", v.strip()) for v in values["M_list"].split(",") if v.strip())
        if not M_list:
            raise ConfigError("M_list is empty")
    return ExperimentFile(
        n=_int("n", values["n"]),
        N=_int("N", values["N"]),
        M_list=M_list,
        K=_int("K", values["K"]),
        measure=values["measure"],
        design=values["design"],
        estimator=values["estimator"],
        master_seed=_int("master_seed", values["master_seed"]),
        output=values.get("output"),
    )


def fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format(x, ".12g")
    return str(x)


def _csv(header: str, columns: Sequence[str], rows: Sequence[dict]) -> str:
    lines = [header, ",".join(columns)]
    lines += [",".join(fmt(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def design_for(n: int):
    """Smallest available design of order at least ``n + 1``."""
    for name in ("clifford", "icosahedral"):
        d = get_design(name)
        if d.declared_t >= n + 1:
            return d
    raise ConfigError(f"no available design has order >= {n + 1} (n = {n})")


def table_csv(measures: Sequence[str], n_list: Sequence[int]) -> str:
    rows = []
    for m in measures:
        spec = get_measure(m)
        for n in n_list:
            design = None if spec.unitary_part == "identity" else design_for(n)
            rows += analytic_rows(spec, n, design, QuadratureSpec())
    header = f"# qlls table schema={SCHEMA_VERSION} version={__version__}"
    return _csv(header, ANALYTIC_COLUMNS, rows)


def verify_designs_report(tmax: int = 6) -> str:
    lines = [f"{'design':<12} {'t':>2} {'frame_potential':>18} {'haar':>6}  result"]
    for name in DESIGNS:
        d = get_design(name)
        for t in range(1, tmax + 1):
            fp = frame_potential(d, t)
            haar = haar_frame_potential(t)
            ok = abs(fp - haar) <= 1e-6
            lines.append(f"{name:<12} {t:>2} {fp:>18.12f} {haar:>6}  {'pass' if ok else 'fail'}")
    return "\n".join(lines) + "\n"


def simulate_csv(exp: ExperimentFile, reference: str = "analytic", workers: int | None = 1) -> tuple[str, bool]:
    """CSV text and whether any row had no successful run."""
    try:
        design = get_design(exp.design)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    config = RunConfig(
        n=exp.n, N=exp.N, M=exp.M_list[0], K=exp.K, measure=exp.measure,
        design=design, estimator=exp.estimator, master_seed=exp.master_seed,
    )
    sweep = convergence_sweep(config, exp.M_list, reference, workers)
    rows, flagged = [], False
    for summary in sweep:
        for k, e in enumerate(summary.entries):
            flagged |= e.flagged
            rows.append(
                {
                    "measure": exp.measure, "estimator": exp.estimator, "n": exp.n, "k": k,
                    "M": summary.config.M, "K": exp.K, "mean": e.mean, "variance": e.variance,
                    "mse": e.mse, "failed_runs": e.failed,
                }
            )
    header = (
        f"# qlls simulate schema={SCHEMA_VERSION} version={__version__} "
        f"seed={exp.master_seed} design={exp.design} N={exp.N} reference={reference}"
    )
    return _csv(header, SIMULATE_COLUMNS, rows), flagged


def discord_report() -> str:
    rho = rho2_flat(get_design("clifford"))
    T = pauli_coefficients(rho)
    b1, b2 = bloch_components(rho)
    value = global_discord_2q(rho)
    return (
        f"pauli coefficients (xx, yy, zz): {T[0, 0]:.12f} {T[1, 1]:.12f} {T[2, 2]:.12f}\n"
        f"max off-diagonal correlation:    {np.abs(T - np.diag(np.diag(T))).max():.3e}\n"
        f"local bloch vectors:             {max(abs(b1).max(), abs(b2).max()):.3e}\n"
        f"global discord (nats):           {value:.6f}\n"
        f"closed-form reference:           {DISCORD_CLOSED_FORM:.6f}\n"
    )


def _csv_list(text: str, conv=str) -> list:
    return [conv(v.strip()) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlls", description="Quantum Laplace rule of succession toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="conditional probabilities from every deterministic evaluator")
    t.add_argument("--measures", default="classical,flat,bures")
    t.add_argument("--n", dest="n_list", default="2,4")
    t.add_argument("--out")

    v = sub.add_parser("verify-designs", help="frame potentials against Haar values")
    v.add_argument("--tmax", type=int, default=6)

    s = sub.add_parser("simulate", help="run the sampling protocol from an experiment file")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--reference", choices=("analytic", "discretized"), default="analytic")
    s.add_argument("--workers", type=int, default=1, help="worker processes; 0 uses every core")

    sub.add_parser("discord", help="two-coin state of the flat measure and its global discord")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "table":
            _emit(table_csv(_csv_list(args.measures), _csv_list(args.n_list, int)), args.out)
        elif args.command == "verify-designs":
            sys.stdout.write(verify_designs_report(args.tmax))
        elif args.command == "discord":
            sys.stdout.write(discord_report())
        elif args.command == "simulate":
            try:
                text = Path(args.config).read_text()
            except OSError as err:
                raise ConfigError(f"cannot read {args.config}: {err}") from None
            exp = parse_experiment(text)
            if args.seed is not None:
                exp = ExperimentFile(**{**exp.__dict__, "master_seed": args.seed})
            workers = args.workers if args.workers > 0 else None
            csv_text, flagged = simulate_csv(exp, args.reference, workers)
            _emit(csv_text, args.out or exp.output)
            if flagged:
                print("warning: some (M, k) rows had no successful run", file=sys.stderr)
                return EXIT_ESTIMATION
    except (ConfigError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
