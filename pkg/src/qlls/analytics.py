"""Deterministic conditional probabilities for the quantum coin-toss problem.

Four evaluators of ``p(n, k)``, the probability of a head on coin ``n + 1``
given ``k`` heads among the first ``n`` coins:

* :func:`p_classical` -- the Laplace rule ``(k + 1) / (n + 2)``.
* :func:`p_qlls` -- closed form as the Laplace rule times ``I(n+1, k+1) / I(n, k)``.
* :func:`p_design_exact` -- design average over projectors, exact eigenvalue
  integral by Gauss-Legendre quadrature.
* :func:`p_discretized` -- the same with the eigenvalue integral replaced by
  the N-segment midpoint sum; the deterministic limit of the sampling protocol.

Every evaluator reduces to the scalar ``q = tr(Lambda Pi) = lam c + (1 - lam)(1 - c)``
with ``c = |U_00|^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .designs import DesignSet
from .errors import DomainError, PreconditionError

__all__ = [
    "MeasureSpec",
    "FLAT",
    "BURES",
    "CLASSICAL",
    "get_measure",
    "QuadratureSpec",
    "DiscreteWeights",
    "p_classical",
    "p_classical_beta",
    "I_value",
    "p_qlls",
    "p_design_exact",
    "discrete_weights",
    "p_discretized",
    "duality_residual",
    "head_overlaps",
    "analytic_rows",
    "ANALYTIC_COLUMNS",
]


@dataclass(frozen=True)
class MeasureSpec:
    """Product measure ``df(lam) dnu(U)`` with a reparametrization ``lam = g(x)``.

    ``h(x) = f(g(x)) g'(x)`` is stored in closed form so that endpoint
    singularities of ``f`` never get evaluated.
    """

    family: str
    g: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    g_prime: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    f_density: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    h: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    unitary_part: str = "haar"

    def __post_init__(self):
        if self.family not in ("classical", "flat", "bures"):
            raise DomainError(f"unknown measure family {self.family!r}")
        if self.unitary_part not in ("haar", "identity"):
            raise DomainError(f"unknown unitary part {self.unitary_part!r}")
        if self.family == "classical" and self.unitary_part != "identity":
            raise DomainError("the classical measure fixes U to the identity")


def _identity(x):
    return np.asarray(x, dtype=float)


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _bures_f(lam):
    lam = np.asarray(lam, dtype=float)
    return (2 / np.pi) * (2 * lam - 1) ** 2 / np.sqrt(lam * (1 - lam))


FLAT = MeasureSpec("flat", _identity, _one, _one, _one)
BURES = MeasureSpec(
    "bures",
    g=lambda x: np.sin(np.pi * np.asarray(x, dtype=float) / 2) ** 2,
    g_prime=lambda x: (np.pi / 2) * np.sin(np.pi * np.asarray(x, dtype=float)),
    f_density=_bures_f,
    h=lambda x: 2 * np.cos(np.pi * np.asarray(x, dtype=float)) ** 2,
)
CLASSICAL = MeasureSpec("classical", _identity, _one, _one, _one, unitary_part="identity")

_MEASURES = {"flat": FLAT, "bures": BURES, "classical": CLASSICAL}


def get_measure(measure: str | MeasureSpec) -> MeasureSpec:
    if isinstance(measure, MeasureSpec):
        return measure
    try:
        return _MEASURES[measure]
    except KeyError:
        raise DomainError(f"unknown measure {measure!r}; choose from {sorted(_MEASURES)}") from None


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre rule on the reparametrized variable ``x in [0, 1]``."""

    nodes: int = 200

    def rule(self) -> tuple[np.ndarray, np.ndarray]:
        t, w = np.polynomial.legendre.leggauss(self.nodes)
        return (t + 1) / 2, w / 2


@dataclass(frozen=True)
class DiscreteWeights:
    N: int
    delta: np.ndarray
    omega: np.ndarray
    w0: np.ndarray


def _check_nk(n: int, k: int) -> None:
    if n < 0 or not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got n={n}, k={k}")


def p_classical(n: int, k: int) -> float:
    _check_nk(n, k)
    return (k + 1) / (n + 2)


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def p_classical_beta(n: int, k: int) -> float:
    """Ratio of Beta integrals ``B(n-k+1, k+2) / B(n-k+1, k+1)``."""
    _check_nk(n, k)
    return math.exp(_log_beta(n - k + 1, k + 2) - _log_beta(n - k + 1, k + 1))


def I_value(measure: str | MeasureSpec, n: int, k: int) -> float:
    """Double sum over ``j <= k``, ``l <= n - k`` with ``r = k - j + l``.

    Flat terms carry ``B(n-r+1, r+1)``; Bures terms carry
    ``(2/pi) [(n-2r)^2 + n + 1] / [(r+1/2)(n-r+1/2)] B(n-r+3/2, r+3/2)``.
    All summands are positive.
    """
    _check_nk(n, k)
    family = get_measure(measure).family
    if family not in ("flat", "bures"):
        raise DomainError(f"I_value is defined for flat and bures, not {family!r}")
    terms = []
    for j in range(k + 1):
        for l in range(n - k + 1):
            r = k - j + l
            log_c = math.log(math.comb(j + l, j)) + math.log(math.comb(n - j - l, k - j))
            if family == "flat":
                terms.append(math.exp(log_c + _log_beta(n - r + 1, r + 1)))
            else:
                pref = (2 / math.pi) * ((n - 2 * r) ** 2 + n + 1) / ((r + 0.5) * (n - r + 0.5))
                terms.append(pref * math.exp(log_c + _log_beta(n - r + 1.5, r + 1.5)))
    return math.fsum(terms)


def p_qlls(measure: str | MeasureSpec, n: int, k: int) -> float:
    _check_nk(n, k)
    return (k + 1) / (n + 2) * I_value(measure, n + 1, k + 1) / I_value(measure, n, k)


def head_overlaps(design: DesignSet | None) -> np.ndarray:
    """``|U_00|^2`` for every element; ``[1.0]`` when ``design`` is None (U fixed to 1)."""
    if design is None:
        return np.ones(1)
    return np.abs(design.elements[:, 0, 0]) ** 2


def _conditional(lams, wts, c, n, k) -> float:
    # q[node, element] = tr(Lambda(lam) Pi_U)
    lams = np.asarray(lams, dtype=float)[:, None]
    q = lams * c[None, :] + (1 - lams) * (1 - c[None, :])
    tail = (1 - q) ** (n - k)
    wts = np.asarray(wts, dtype=float)[:, None]
    num = math.fsum((wts * q ** (k + 1) * tail).ravel())
    den = math.fsum((wts * q**k * tail).ravel())
    return num / den


def _resolve_design(spec: MeasureSpec, design: DesignSet | None, order: int) -> DesignSet | None:
    if spec.unitary_part == "identity":
        return None
    if design is None:
        raise PreconditionError(f"the {spec.family} measure needs a unitary design")
    if design.declared_t < order:
        raise PreconditionError(
            f"design {design.name!r} has order {design.declared_t}, need >= {order}"
        )
    return design


def p_design_exact(
    measure: str | MeasureSpec,
    n: int,
    k: int,
    design: DesignSet | None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Design-averaged conditional probability with the eigenvalue integral done by quadrature.

    The same projector multiset serves numerator and denominator, since an
    ``(n+1)``-design is also an ``n``-design.  For the classical measure the
    design is ignored and ``U`` is fixed to the identity.
    """
    _check_nk(n, k)
    spec = get_measure(measure)
    design = _resolve_design(spec, design, n + 1)
    x, w = quad.rule()
    return _conditional(spec.g(x), w * spec.h(x), head_overlaps(design), n, k)


def discrete_weights(measure: str | MeasureSpec, N: int) -> DiscreteWeights:
    """Midpoints ``(i - 1/2)/N``, normalized weights ``h(delta)``, head weights ``g(delta)``."""
    if N < 1:
        raise DomainError(f"segment count must be >= 1, got {N}")
    spec = get_measure(measure)
    delta = (np.arange(1, N + 1) - 0.5) / N
    h = spec.h(delta)
    omega = h / math.fsum(h)
    w0 = np.clip(spec.g(delta), 0.0, 1.0)
    for a in (delta, omega, w0):
        a.setflags(write=False)
    return DiscreteWeights(N, delta, omega, w0)


def p_discretized(
    measure: str | MeasureSpec,
    n: int,
    k: int,
    design: DesignSet | None,
    N: int = 50,
) -> float:
    """Conditional probability of the N-segment discretized state (no sampling)."""
    _check_nk(n, k)
    spec = get_measure(measure)
    design = _resolve_design(spec, design, n + 1)
    dw = discrete_weights(spec, N)
    return _conditional(dw.w0, dw.omega, head_overlaps(design), n, k)


def duality_residual(p_fn: Callable[[int, int], float], n: int, k: int) -> float:
    """``p(n, k) + p(n, n - k) - 1``."""
    _check_nk(n, k)
    return p_fn(n, k) + p_fn(n, n - k) - 1.0


ANALYTIC_COLUMNS = (
    "measure",
    "n",
    "k",
    "p_classical",
    "p_qlls",
    "p_design_exact",
    "p_discretized_N50",
)


def analytic_rows(
    measure: str | MeasureSpec,
    n: int,
    design: DesignSet | None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> list[dict]:
    """One row per ``k = 0..n`` with every evaluator.

    For the classical measure the ``p_qlls`` column holds the Beta-integral
    evaluator.
    """
    spec = get_measure(measure)
    rows = []
    for k in range(n + 1):
        qlls = p_classical_beta(n, k) if spec.family == "classical" else p_qlls(spec, n, k)
        rows.append(
            {
                "measure": spec.family,
                "n": n,
                "k": k,
                "p_classical": p_classical(n, k),
                "p_qlls": qlls,
                "p_design_exact": p_design_exact(spec, n, k, design, quad),
                "p_discretized_N50": p_discretized(spec, n, k, design, 50),
            }
        )
    return rows
