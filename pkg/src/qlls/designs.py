"""Finite single-qubit unitary designs and their frame-potential certification.

Two groups are built by brute-force closure of exact generators, keeping one
representative per global-phase class:

* Clifford group (24 elements), generators ``S = diag(1, i)`` and
  ``H = [[1, 1], [1, -1]] / sqrt(2)``.  Exact 3-design.
* Icosahedral rotation group (60 elements).  Exact 5-design.  Generators, as
  unit quaternions ``a + b i + c j + d k`` mapped to
  ``[[a + i b, c + i d], [-c + i d, a - i b]]``:

  - order-5 rotation: ``(phi, 1/phi, 1, 0) / 2`` with ``phi = (1 + sqrt(5)) / 2``
    (rotation by 2 pi / 5),
  - order-2 rotation: ``(0, 1, 0, 0)`` (rotation by pi about x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ConstructionError
from .su2 import HADAMARD, phase_invariant_distance

__all__ = [
    "DesignSet",
    "clifford_design",
    "icosahedral_design",
    "get_design",
    "frame_potential",
    "haar_frame_potential",
    "verify_design",
    "save_design",
    "load_design",
]

DEDUP_TOL = 1e-6
CERTIFY_TOL = 1e-6

_SQRT5 = math.sqrt(5.0)
_PHI = (1.0 + _SQRT5) / 2.0


@dataclass(frozen=True, eq=False)
class DesignSet:
    """Projective representatives of a finite unitary design.

    Compared and hashed by identity.
    """

    name: str
    elements: np.ndarray = field(repr=False)
    declared_t: int

    def __post_init__(self):
        els = np.array(self.elements, dtype=complex)
        if els.ndim != 3 or els.shape[1:] != (2, 2):
            raise ValueError(f"elements must have shape (m, 2, 2), got {els.shape}")
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index_of(self, U, tol: float = DEDUP_TOL) -> int | None:
        """Index of the element equal to ``U`` up to phase, else None."""
        for j, V in enumerate(self.elements):
            if phase_invariant_distance(U, V) < tol:
                return j
        return None


def _quaternion(a: float, b: float, c: float, d: float) -> np.ndarray:
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def _close(generators: list[np.ndarray], limit: int) -> list[np.ndarray]:
    # Breadth-first closure; left-multiplying by generators reaches the whole
    # group because every element is a word in the generators.
    elements = [np.eye(2, dtype=complex)]
    frontier = list(elements)
    while frontier:
        new = []
        for A in frontier:
            for g in generators:
                C = g @ A
                if all(phase_invariant_distance(C, V) >= DEDUP_TOL for V in elements):
                    elements.append(C)
                    new.append(C)
                    if len(elements) > limit:
                        raise ConstructionError(f"closure exceeded {limit} elements")
        frontier = new
    return elements


@lru_cache(maxsize=None)
def clifford_design() -> DesignSet:
    """The 24 projective single-qubit Clifford elements (declared 3-design)."""
    S = np.diag([1.0, 1j])
    els = _close([S, np.asarray(HADAMARD)], limit=24)
    if len(els) != 24:
        raise ConstructionError(f"Clifford closure gave {len(els)} elements, expected 24")
    return DesignSet("clifford", np.array(els), declared_t=3)


@lru_cache(maxsize=None)
def icosahedral_design() -> DesignSet:
    """The 60 projective icosahedral rotations (declared 5-design)."""
    r5 = _quaternion(_PHI / 2, 1 / (2 * _PHI), 0.5, 0.0)
    r2 = _quaternion(0.0, 1.0, 0.0, 0.0)
    els = _close([r5, r2], limit=60)
    if len(els) != 60:
        raise ConstructionError(f"icosahedral closure gave {len(els)} elements, expected 60")
    return DesignSet("icosahedral", np.array(els), declared_t=5)


DESIGNS = {"clifford": clifford_design, "icosahedral": icosahedral_design}


def get_design(name: str) -> DesignSet:
    try:
        return DESIGNS[name]()
    except KeyError:
        raise ValueError(f"unknown design {name!r}; choose from {sorted(DESIGNS)}") from None


def frame_potential(design: DesignSet, t: int) -> float:
    """``(1/|C|^2) sum_{U,V} |tr(U^dagger V)|^{2t}`` with compensated summation."""
    if t < 1:
        raise ValueError("t must be >= 1")
    els = design.elements
    overlaps = np.abs(np.einsum("aji,bji->ab", els.conj(), els))
    return math.fsum((overlaps ** (2 * t)).ravel()) / len(els) ** 2


def haar_frame_potential(t: int) -> int:
    """Haar value of the frame potential on SU(2): the Catalan number ``C_t``."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return math.comb(2 * t, t) // (t + 1)


def verify_design(design: DesignSet, t: int, tol: float = CERTIFY_TOL) -> bool:
    """True iff the frame potential matches Haar for every order ``1..t``."""
    return all(
        abs(frame_potential(design, s) - haar_frame_potential(s)) <= tol
        for s in range(1, t + 1)
    )


def save_design(design: DesignSet, path: str | Path) -> None:
    """Write one element per line: re/im of the four entries, row-major, 17 digits."""
    lines = []
    for U in design.elements:
        fields = []
        for z in U.ravel():
            fields += [f"{z.real:.17g}", f"{z.imag:.17g}"]
        lines.append(" ".join(fields))
    Path(path).write_text("\n".join(lines) + "\n")


def load_design(path: str | Path, name: str, declared_t: int) -> DesignSet:
    rows = np.loadtxt(path, ndmin=2)
    if rows.shape[1] != 8:
        raise ValueError(f"expected 8 fields per line, got {rows.shape[1]}")
    els = (rows[:, 0::2] + 1j * rows[:, 1::2]).reshape(-1, 2, 2)
    return DesignSet(name, els, declared_t)
