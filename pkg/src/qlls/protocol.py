"""Simulated measurement protocol: data acquisition, the two estimators, validation.

Each shot draws a segment ``i`` with probability ``omega_i``, one eigenstate
label per register (``0`` with probability ``w_i(0)``), a design element
``U`` uniformly, and measures every register of ``U|a_j>`` in the
computational basis.  Bit 0 means head.

Labels are drawn per register so that the register product state is the
discretized ``Lambda_i^{(x)(n+1)}`` conjugated by a common ``U``.  Sharing one
label across all registers would instead prepare a mixture of pure product
states, whose conditional probabilities are the classical Laplace values.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .analytics import discrete_weights, p_discretized, p_qlls
from .designs import DesignSet
from .errors import ConfigError, UndefinedEstimateError

__all__ = [
    "RunConfig",
    "AcquisitionRecord",
    "Acquisition",
    "ValidationEntry",
    "ValidationSummary",
    "run_stream",
    "acquire",
    "measure_registers",
    "estimate1",
    "estimate1_all",
    "estimate2",
    "plug_in_estimate",
    "projector_classes",
    "validate",
    "run_single",
    "run_experiment",
    "convergence_sweep",
    "loglog_slope",
    "reference_values",
]

ESTIMATORS = ("est1", "est2")


@dataclass(frozen=True)
class RunConfig:
    n: int
    N: int
    M: int
    K: int
    measure: str
    design: DesignSet = field(repr=False)
    estimator: str = "est1"
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ConfigError(f"n must be >= 0, got {self.n}")
        for name in ("N", "M", "K"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.measure not in ("flat", "bures"):
            raise ConfigError(f"measure must be 'flat' or 'bures', got {self.measure!r}")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.design.declared_t < self.n + 1:
            raise ConfigError(
                f"design {self.design.name!r} has order {self.design.declared_t}, "
                f"need >= n + 1 = {self.n + 1}"
            )
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")


class AcquisitionRecord(NamedTuple):
    u_index: int
    i: int
    a: tuple[int, ...]
    bits: tuple[int, ...]


@dataclass(frozen=True)
class Acquisition:
    """Columnar batch of shots.

    ``i`` is the 1-based segment index; ``a`` and ``bits`` have one column
    per register, ``n + 1`` in total.
    """

    u_index: np.ndarray
    i: np.ndarray
    a: np.ndarray
    bits: np.ndarray

    def __len__(self) -> int:
        return len(self.u_index)

    def records(self) -> Iterator[AcquisitionRecord]:
        for u, i, a, b in zip(self.u_index, self.i, self.a, self.bits):
            yield AcquisitionRecord(int(u), int(i), tuple(int(x) for x in a), tuple(int(x) for x in b))

    @classmethod
    def from_records(cls, records: Sequence[AcquisitionRecord], registers: int) -> "Acquisition":
        m = len(records)
        u = np.fromiter((r.u_index for r in records), dtype=np.int64, count=m)
        i = np.fromiter((r.i for r in records), dtype=np.int64, count=m)
        a = np.array([r.a for r in records], dtype=np.uint8).reshape(m, registers)
        bits = np.array([r.bits for r in records], dtype=np.uint8).reshape(m, registers)
        return cls(u, i, a, bits)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u_index", "i", "a", "bits"])
        for r in self.records():
            w.writerow([r.u_index, r.i, "".join(map(str, r.a)), "".join(map(str, r.bits))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Acquisition":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("no records in CSV")
        registers = len(rows[0]["bits"])
        recs = [
            AcquisitionRecord(
                int(r["u_index"]),
                int(r["i"]),
                tuple(int(c) for c in r["a"]),
                tuple(int(c) for c in r["bits"]),
            )
            for r in rows
        ]
        return cls.from_records(recs, registers)


def run_stream(master_seed: int, run_index: int, M: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by ``(master_seed, M, run_index)``."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(M, run_index))
    return np.random.Generator(np.random.Philox(seq))


def measure_registers(
    design: DesignSet,
    u_index: np.ndarray,
    labels: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Computational-basis outcomes of ``U|a>`` per register; 0 with probability ``|<0|U|a>|^2``."""
    p_head = np.abs(design.elements[u_index[:, None], 0, labels]) ** 2
    return (rng.random(labels.shape) >= p_head).astype(np.uint8)


def acquire(config: RunConfig, rng: np.random.Generator) -> Acquisition:
    M, regs = config.M, config.n + 1
    dw = discrete_weights(config.measure, config.N)
    seg = rng.choice(config.N, size=M, p=dw.omega)
    labels = (rng.random((M, regs)) >= dw.w0[seg][:, None]).astype(np.uint8)
    u = rng.integers(0, len(config.design), size=M)
    bits = measure_registers(config.design, u, labels, rng)
    return Acquisition(u.astype(np.int64), seg.astype(np.int64) + 1, labels, bits)


def _head_counts(acq: Acquisition, n: int) -> np.ndarray:
    return (acq.bits[:, :n] == 0).sum(axis=1)


def estimate1(acq: Acquisition, n: int, k: int) -> float:
    """Head frequency of register ``n + 1`` among shots with exactly ``k`` heads in registers ``1..n``."""
    if len(acq) == 0:
        raise UndefinedEstimateError("no records")
    sel = _head_counts(acq, n) == k
    if not sel.any():
        raise UndefinedEstimateError(f"no shots with {k} heads among the first {n} registers")
    return float(np.mean(acq.bits[sel, n] == 0))


def estimate1_all(acq: Acquisition, n: int) -> np.ndarray:
    """:func:`estimate1` for every ``k``; NaN where the sift is empty."""
    heads = _head_counts(acq, n)
    target = acq.bits[:, n] == 0
    shots = np.bincount(heads, minlength=n + 1)
    hits = np.bincount(heads, weights=target, minlength=n + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(shots > 0, hits / np.maximum(shots, 1), np.nan)


@lru_cache(maxsize=None)
def _projector_classes(design: DesignSet) -> tuple[np.ndarray, int]:
    # The register outcome law of U depends on U only through U^dagger P U,
    # i.e. through the first row of U up to phase.
    keys: list[np.ndarray] = []
    labels = np.empty(len(design), dtype=np.int64)
    for j, U in enumerate(design.elements):
        row = U[0]
        proj = np.outer(row.conj(), row)
        for c, K in enumerate(keys):
            if np.abs(K - proj).max() < 1e-8:
                labels[j] = c
                break
        else:
            labels[j] = len(keys)
            keys.append(proj)
    labels.setflags(write=False)
    return labels, len(keys)


def projector_classes(design: DesignSet) -> tuple[np.ndarray, int]:
    """Label each element by its measured projector ``U^dagger P U``; returns ``(labels, count)``."""
    return _projector_classes(design)


def plug_in_estimate(qhat: np.ndarray, present: np.ndarray, omega: np.ndarray, n: int) -> np.ndarray:
    """Discretized conditional probability with measured head frequencies plugged in.

    ``qhat`` and ``present`` have shape ``(N, cells)``.  Each segment
    contributes the mean over its observed cells; ``omega`` is renormalized
    over segments with at least one observed cell.  Returns one value per
    ``k = 0..n``, NaN where the denominator vanishes.
    """
    counts = present.sum(axis=1)
    seg_ok = counts > 0
    if not seg_ok.any():
        raise UndefinedEstimateError("no observed cells")
    q = qhat[seg_ok]
    mask = present[seg_ok]
    wts = omega[seg_ok] / math.fsum(omega[seg_ok]) / counts[seg_ok]
    out = np.empty(n + 1)
    for k in range(n + 1):
        tail = (1 - q) ** (n - k)
        num = math.fsum((wts[:, None] * np.where(mask, q ** (k + 1) * tail, 0.0)).ravel())
        den = math.fsum((wts[:, None] * np.where(mask, q**k * tail, 0.0)).ravel())
        out[k] = num / den if den > 0 else np.nan
    return out


def estimate2(acq: Acquisition, config: RunConfig) -> np.ndarray:
    """Plug-in estimator for every ``k``.

    Per (segment, measured projector) cell, the head frequency pooled over
    registers ``1..n`` (register ``n + 1`` excluded) replaces ``tr(Lambda_i Pi)``.
    """
    if len(acq) == 0:
        raise UndefinedEstimateError("no records")
    n, N = config.n, config.N
    labels, ncls = projector_classes(config.design)
    cell = (acq.i - 1) * ncls + labels[acq.u_index]
    shots = np.bincount(cell, minlength=N * ncls)
    heads = np.bincount(cell, weights=_head_counts(acq, n), minlength=N * ncls)
    present = shots > 0
    qhat = np.zeros(N * ncls)
    if n > 0:
        qhat[present] = heads[present] / (n * shots[present])
    omega = discrete_weights(config.measure, N).omega
    return plug_in_estimate(qhat.reshape(N, ncls), present.reshape(N, ncls), omega, n)


@dataclass(frozen=True)
class ValidationEntry:
    mean: float
    variance: float
    mse: float
    failed: int
    succeeded: int
    reference: float

    @property
    def bias(self) -> float:
        return self.mean - self.reference

    @property
    def standard_error(self) -> float:
        """Standard error of the mean, from the population variance."""
        if self.succeeded < 2:
            return math.nan
        return math.sqrt(self.variance / (self.succeeded - 1))

    @property
    def flagged(self) -> bool:
        return self.succeeded == 0


def validate(estimates: Sequence[float], reference: float) -> ValidationEntry:
    """Mean, population variance and ``sqrt(bias^2 + variance)`` over successful runs.

    Failed runs (NaN) are excluded and counted.
    """
    est = np.asarray(estimates, dtype=float)
    ok = est[~np.isnan(est)]
    if ok.size == 0:
        raise UndefinedEstimateError("every run failed")
    mean = math.fsum(ok) / ok.size
    variance = max(0.0, math.fsum(ok**2) / ok.size - mean**2)
    mse = math.sqrt((mean - reference) ** 2 + variance)
    return ValidationEntry(mean, variance, mse, int(est.size - ok.size), int(ok.size), reference)


@dataclass(frozen=True)
class ValidationSummary:
    config: RunConfig
    entries: tuple[ValidationEntry, ...]
    estimates: np.ndarray = field(repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(e, name) for e in self.entries])


def reference_values(config: RunConfig, reference: str = "analytic") -> list[float]:
    n = config.n
    if reference == "analytic":
        return [p_qlls(config.measure, n, k) for k in range(n + 1)]
    if reference == "discretized":
        return [p_discretized(config.measure, n, k, config.design, config.N) for k in range(n + 1)]
    raise ConfigError(f"reference must be 'analytic' or 'discretized', got {reference!r}")


def run_single(config: RunConfig, run_index: int) -> np.ndarray:
    """One acquisition plus the configured estimator; NaN marks undefined estimates."""
    rng = run_stream(config.master_seed, run_index, config.M)
    acq = acquire(config, rng)
    if config.estimator == "est1":
        return estimate1_all(acq, config.n)
    return estimate2(acq, config)


def run_experiment(
    config: RunConfig,
    reference: str = "analytic",
    workers: int | None = 1,
) -> ValidationSummary:
    """K independent runs, validated per ``k`` against the reference values.

    Runs are reduced in run-index order, so the result does not depend on
    ``workers``.
    """
    refs = reference_values(config, reference)
    if workers is not None and workers <= 1:
        results = [run_single(config, r) for r in range(config.K)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_single, [config] * config.K, range(config.K)))
    est = np.array(results).reshape(config.K, config.n + 1)
    entries = []
    for k in range(config.n + 1):
        try:
            entries.append(validate(est[:, k], refs[k]))
        except UndefinedEstimateError:
            entries.append(ValidationEntry(math.nan, math.nan, math.nan, config.K, 0, refs[k]))
    return ValidationSummary(config, tuple(entries), est)


def convergence_sweep(
    config: RunConfig,
    M_list: Sequence[int],
    reference: str = "analytic",
    workers: int | None = 1,
) -> list[ValidationSummary]:
    if list(M_list) != sorted(M_list):
        raise ConfigError("M_list must be sorted ascending")
    return [run_experiment(replace(config, M=int(M)), reference, workers) for M in M_list]


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])
