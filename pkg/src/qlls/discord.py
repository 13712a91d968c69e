"""Two-coin state ``rho_2 = int dmu(rho) rho (x) rho`` and its global quantum discord.

The discord is minimized over one projective measurement axis per qubit,
each given by polar/azimuthal angles.  Measuring both qubits is a pinching
``Phi``, so ``S(rho || Phi(rho)) = S(Phi(rho)) - S(rho)`` and the objective
reduces to Shannon entropies of outcome probabilities; the grid search uses
that reduction, and the reported minimum is re-evaluated through explicit
relative entropies.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

from .analytics import FLAT, MeasureSpec, QuadratureSpec, get_measure
from .designs import DesignSet
from .errors import PreconditionError
from .su2 import IDENTITY, PAULI_X, PAULI_Y, PAULI_Z, check_density

__all__ = [
    "rho2",
    "rho2_flat",
    "pauli_coefficients",
    "bloch_components",
    "von_neumann_entropy",
    "relative_entropy",
    "measurement_projectors",
    "discord_objective",
    "global_discord_2q",
    "DISCORD_CLOSED_FORM",
]

EIG_CLAMP = 1e-14
PAULIS = (np.asarray(PAULI_X), np.asarray(PAULI_Y), np.asarray(PAULI_Z))

# Reference expression printed alongside the numerical minimum.
DISCORD_CLOSED_FORM = (
    1
    - (5 / 3) * math.log(2)
    - math.log(3)
    + (5 / 9) * math.log(5)
    + (7 / 18) * math.log(7)
)


def rho2(
    measure: str | MeasureSpec,
    design: DesignSet,
    quad: QuadratureSpec = QuadratureSpec(),
) -> np.ndarray:
    """Materialize the 4x4 two-coin state by design average and eigenvalue quadrature."""
    spec = get_measure(measure)
    if spec.unitary_part != "haar":
        raise PreconditionError("rho2 is built for Haar-type measures")
    if design.declared_t < 2:
        raise PreconditionError(f"design {design.name!r} must be at least a 2-design")
    x, w = quad.rule()
    lam = spec.g(x)
    wts = w * spec.h(x)
    U = design.elements
    out = np.zeros((4, 4), dtype=complex)
    for lj, wj in zip(lam, wts):
        rho = U @ np.diag([lj, 1 - lj]) @ U.conj().transpose(0, 2, 1)
        out += wj * np.einsum("mab,mcd->acbd", rho, rho).reshape(4, 4)
    out /= len(U) * math.fsum(wts)
    return out


def rho2_flat(design: DesignSet, quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    return rho2(FLAT, design, quad)


def pauli_coefficients(rho: ArrayLike) -> np.ndarray:
    """3x3 real matrix ``T[a, b] = tr(rho sigma_a (x) sigma_b)``."""
    rho = np.asarray(rho, dtype=complex)
    return np.array(
        [[np.trace(rho @ np.kron(sa, sb)).real for sb in PAULIS] for sa in PAULIS]
    )


def bloch_components(rho: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Local Bloch vectors ``(tr(rho sigma_a (x) 1), tr(rho 1 (x) sigma_a))``."""
    rho = np.asarray(rho, dtype=complex)
    I = np.asarray(IDENTITY)
    first = np.array([np.trace(rho @ np.kron(s, I)).real for s in PAULIS])
    second = np.array([np.trace(rho @ np.kron(I, s)).real for s in PAULIS])
    return first, second


def _entropy_of_probs(p: np.ndarray, axis=-1) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    logs = np.log(np.where(p > EIG_CLAMP, p, 1.0))
    return -(p * logs).sum(axis=axis)


def von_neumann_entropy(rho: ArrayLike) -> float:
    """Natural-log entropy with ``0 log 0 = 0``."""
    return float(_entropy_of_probs(np.linalg.eigvalsh(np.asarray(rho, dtype=complex))))


def _logm_psd(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(rho)
    return vals, vecs, np.log(np.clip(vals, EIG_CLAMP, None))


def relative_entropy(rho: ArrayLike, sigma: ArrayLike) -> float:
    """``S(rho || sigma) = tr[rho log rho - rho log sigma]`` in nats.

    Eigenvalues are clamped at 1e-14 inside the logarithms; zero eigenvalues
    of ``rho`` contribute nothing.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    rv, _, _ = _logm_psd(rho)
    sv, svecs, slog = _logm_psd(sigma)
    log_sigma = (svecs * slog) @ svecs.conj().T
    return float(-_entropy_of_probs(rv) - np.trace(rho @ log_sigma).real)


def measurement_projectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Projectors ``(1 +/- n.sigma) / 2`` for the axis at polar ``theta``, azimuth ``phi``."""
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    ns = sum(c * s for c, s in zip(n, PAULIS))
    I = np.asarray(IDENTITY)
    return (I + ns) / 2, (I - ns) / 2


def _partial_traces(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("ajbj->ab", r), np.einsum("jajb->ab", r)


def _pinch(rho: np.ndarray, projectors: list[np.ndarray]) -> np.ndarray:
    return sum(P @ rho @ P for P in projectors)


def discord_objective(rho: ArrayLike, angles) -> float:
    """``S(rho || Phi(rho)) - sum_j S(rho_j || Phi_j(rho_j))`` at the given axes.

    ``angles = (theta1, phi1, theta2, phi2)``.  Evaluated with explicit
    relative entropies.
    """
    rho = np.asarray(rho, dtype=complex)
    P1 = measurement_projectors(angles[0], angles[1])
    P2 = measurement_projectors(angles[2], angles[3])
    joint = [np.kron(a, b) for a in P1 for b in P2]
    r1, r2 = _partial_traces(rho)
    total = relative_entropy(rho, _pinch(rho, joint))
    local = relative_entropy(r1, _pinch(r1, list(P1))) + relative_entropy(r2, _pinch(r2, list(P2)))
    return total - local


def _axes(theta, phi):
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


def _fast_objective(T, b1, b2, S_rho, S_1, S_2, th1, ph1, th2, ph2):
    # Outcome probabilities of +/- n1 and +/- n2 for rho = (1 + b1.s (x) 1 + 1 (x) b2.s + T s(x)s)/4
    n1 = _axes(th1, ph1)
    n2 = _axes(th2, ph2)
    x1 = n1 @ b1
    x2 = n2 @ b2
    corr = np.einsum("...a,ab,...b->...", n1, T, n2)
    probs = np.stack(
        [(1 + s1 * x1 + s2 * x2 + s1 * s2 * corr) / 4 for s1 in (1, -1) for s2 in (1, -1)],
        axis=-1,
    )
    m1 = np.stack([(1 + x1) / 2, (1 - x1) / 2], axis=-1)
    m2 = np.stack([(1 + x2) / 2, (1 - x2) / 2], axis=-1)
    return (
        _entropy_of_probs(probs) - S_rho
        - (_entropy_of_probs(m1) - S_1)
        - (_entropy_of_probs(m2) - S_2)
    )


def global_discord_2q(
    rho: ArrayLike,
    grid: int = 24,
    step_tol: float = 1e-6,
    base: float = math.e,
) -> float:
    """Global quantum discord of a two-qubit state.

    A ``grid x grid`` mesh over (theta, phi) for each qubit is searched
    jointly, then refined by coordinate descent with a halving step until
    the step falls below ``step_tol``.  The result is in units of
    ``log(base)`` (nats by default) and clipped at zero.
    """
    rho = check_density(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got {rho.shape}")
    T = pauli_coefficients(rho)
    b1, b2 = bloch_components(rho)
    r1, r2 = _partial_traces(rho)
    consts = (von_neumann_entropy(rho), von_neumann_entropy(r1), von_neumann_entropy(r2))

    def f(th1, ph1, th2, ph2):
        return _fast_objective(T, b1, b2, *consts, th1, ph1, th2, ph2)

    thetas = (np.arange(grid) + 0.5) * np.pi / grid
    phis = np.arange(grid) * 2 * np.pi / grid
    TH1, PH1, TH2, PH2 = np.meshgrid(thetas, phis, thetas, phis, indexing="ij")
    vals = f(TH1, PH1, TH2, PH2)
    idx = np.unravel_index(np.argmin(vals), vals.shape)
    x = np.array([thetas[idx[0]], phis[idx[1]], thetas[idx[2]], phis[idx[3]]])
    best = float(f(*x))

    step = np.pi / grid
    while step >= step_tol:
        improved = False
        for d in range(4):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[d] += sign * step
                val = float(f(*trial))
                if val < best - 1e-15:
                    x, best, improved = trial, val, True
        if not improved:
            step /= 2

    value = max(0.0, discord_objective(rho, x))
    return value / math.log(base)
