"""Orthonormal outcome bases of a finite-dimensional system.

A basis is a labeled unitary matrix whose columns are the outcome vectors
of one sharp measurement.  Every column carries a fixed global-phase gauge
(first component of magnitude above ``PHASE_PIVOT_TOL`` is real and
non-negative) so that all downstream phase-sensitive quantities have a
deterministic representative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotOrthonormal,
)

#: Gram-matrix deviation accepted on user-supplied columns.
GRAM_INPUT_TOL = 1e-8
#: Gram-matrix deviation guaranteed after internal re-orthonormalization.
GRAM_INTERNAL_TOL = 1e-10
#: Smallest component magnitude usable as a phase pivot.
PHASE_PIVOT_TOL = 1e-12


def _as_square_complex(columns) -> np.ndarray:
    try:
        mat = np.array(columns, dtype=np.complex128)
    except (ValueError, TypeError) as exc:
        raise DimensionMismatch(f"ragged or non-numeric column data: {exc}") from None
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {mat.shape}")
    return mat


def _gram_defect(mat: np.ndarray) -> float:
    dim = mat.shape[0]
    eye = np.eye(dim)
    left = np.max(np.abs(mat.conj().T @ mat - eye))
    right = np.max(np.abs(mat @ mat.conj().T - eye))
    return float(max(left, right))


def _fix_column_phases(mat: np.ndarray) -> np.ndarray:
    out = np.array(mat, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k]
        pivots = np.flatnonzero(np.abs(col) > PHASE_PIVOT_TOL)
        if pivots.size == 0:
            raise NotOrthonormal(f"column {k} is numerically zero")
        pivot = col[pivots[0]]
        out[:, k] = col * (np.conj(pivot) / abs(pivot))
    return out


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Basis:
    """Immutable orthonormal basis with outcome labels and optional values."""

    dim: int
    vectors: np.ndarray  # (dim, dim); column k is outcome k
    labels: tuple[str, ...]
    values: np.ndarray | None = None  # real outcome values, shape (dim,)

    def column(self, k: int) -> np.ndarray:
        self.check_index(k)
        return self.vectors[:, k]

    def check_index(self, k: int) -> None:
        if not 0 <= k < self.dim:
            raise IndexOutOfRange(f"outcome index {k} outside 0..{self.dim - 1}")

    def overlap(self, j: int, other: "Basis", k: int) -> complex:
        """Amplitude <self_j | other_k>."""
        self.check_index(j)
        other.check_index(k)
        return complex(np.vdot(self.vectors[:, j], other.vectors[:, k]))

    def overlaps_with(self, other: "Basis") -> np.ndarray:
        """Matrix of amplitudes <self_j | other_k>, shape (dim, dim)."""
        if self.dim != other.dim:
            raise DimensionMismatch(f"dim {self.dim} vs {other.dim}")
        return self.vectors.conj().T @ other.vectors

    def compatible_with(self, other: "Basis", tol: float = 1e-12) -> bool:
        return (
            self.dim == other.dim
            and float(np.max(np.abs(self.vectors - other.vectors))) <= tol
        )

    def value(self, k: int) -> float:
        self.check_index(k)
        if self.values is None:
            from .errors import MissingValues

            raise MissingValues(f"basis has no outcome values (label {self.labels[k]})")
        return float(self.values[k])

    def to_json(self, indent: int | None = None) -> str:
        payload = {
            "dim": self.dim,
            "labels": list(self.labels),
            "values": None if self.values is None else [float(v) for v in self.values],
            "re": [[float(v) for v in row] for row in self.vectors.real],
            "im": [[float(v) for v in row] for row in self.vectors.imag],
        }
        return json.dumps(payload, sort_keys=True, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "Basis":
        payload = json.loads(text)
        mat = np.array(payload["re"], dtype=np.float64) + 1j * np.array(
            payload["im"], dtype=np.float64
        )
        mat = _as_square_complex(mat)
        if mat.shape[0] != payload["dim"]:
            raise DimensionMismatch("declared dim does not match matrix shape")
        defect = _gram_defect(mat)
        if defect > GRAM_INPUT_TOL:
            raise NotOrthonormal(f"Gram defect {defect:.3e} exceeds {GRAM_INPUT_TOL}")
        values = payload.get("values")
        # Round-trip fidelity: stored floats are used verbatim, with no
        # re-orthonormalization or re-phasing.
        return cls(
            dim=int(payload["dim"]),
            vectors=_freeze(mat),
            labels=tuple(str(s) for s in payload["labels"]),
            values=None if values is None else _freeze(np.array(values, dtype=np.float64)),
        )


@dataclass(frozen=True)
class ErgodicTable:
    """Squared-overlap transition probabilities between two bases."""

    rows: Basis
    cols: Basis
    probs: np.ndarray  # probs[x, y] = |<row_x | col_y>|^2

    def column_sums(self) -> np.ndarray:
        return self.probs.sum(axis=0)


def _default_labels(dim: int) -> tuple[str, ...]:
    return tuple(str(k) for k in range(dim))


def make_basis(
    columns,
    labels: Sequence[str] | None = None,
    values: Sequence[float] | None = None,
) -> Basis:
    """Validate, re-orthonormalize, and gauge-fix a set of basis columns.

    Parameters
    ----------
    columns : array_like
        Square complex matrix; column k is outcome k's vector.
    labels : sequence of str, optional
        Outcome names; defaults to "0", "1", ...
    values : sequence of float, optional
        Real outcome values (one per column).

    Raises
    ------
    NotOrthonormal
        If the Gram matrix deviates from the identity by more than 1e-8.
    DimensionMismatch
        On ragged input, dim < 2, or label/value length mismatch.
    """
    mat = _as_square_complex(columns)
    dim = mat.shape[0]
    if dim < 2:
        raise DimensionMismatch(f"need dim >= 2, got {dim}")
    defect = _gram_defect(mat)
    if defect > GRAM_INPUT_TOL:
        raise NotOrthonormal(f"Gram defect {defect:.3e} exceeds {GRAM_INPUT_TOL}")
    # Nearest unitary via polar decomposition; a no-op (to rounding) for
    # already-unitary input, which keeps the phase convention idempotent.
    u, _, vh = np.linalg.svd(mat)
    mat = u @ vh
    mat = _fix_column_phases(mat)
    internal = _gram_defect(mat)
    if internal > GRAM_INTERNAL_TOL:
        raise NotOrthonormal(f"internal Gram defect {internal:.3e}")

    if labels is None:
        label_tuple = _default_labels(dim)
    else:
        label_tuple = tuple(str(s) for s in labels)
        if len(label_tuple) != dim:
            raise DimensionMismatch(f"{len(label_tuple)} labels for dim {dim}")
    value_arr = None
    if values is not None:
        value_arr = np.array(values, dtype=np.float64)
        if value_arr.shape != (dim,):
            raise DimensionMismatch(f"{value_arr.shape} values for dim {dim}")
        value_arr = _freeze(value_arr)
    return Basis(dim=dim, vectors=_freeze(mat), labels=label_tuple, values=value_arr)


def computational_basis(dim: int, values: Sequence[float] | None = None) -> Basis:
    """Identity-column basis {|0>, ..., |dim-1>}."""
    return make_basis(np.eye(dim, dtype=np.complex128), values=values)


def fourier_basis(dim: int) -> Basis:
    """Discrete Fourier basis; column k has components exp(2i pi jk/d)/sqrt(d).

    Mutually unbiased with the computational basis: |<j|f_k>|^2 = 1/d.
    """
    if dim < 2:
        raise DimensionMismatch(f"need dim >= 2, got {dim}")
    j = np.arange(dim)
    mat = np.exp(2j * np.pi * np.outer(j, j) / dim) / np.sqrt(dim)
    return make_basis(mat, labels=[f"f{k}" for k in range(dim)])


def haar_random_basis(dim: int, seed: int) -> Basis:
    """Haar-uniform random basis, deterministic for a fixed seed.

    Draws a complex standard-normal matrix and orthonormalizes by QR with
    the R-diagonal phase correction that makes the resulting unitary
    exactly Haar-distributed (plain QR is not, because the QR phase gauge
    is not uniform).
    """
    if dim < 2:
        raise DimensionMismatch(f"need dim >= 2, got {dim}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return make_basis(q, labels=[f"u{k}" for k in range(dim)])


def ergodic_prob(basis_x: Basis, x: int, basis_y: Basis, y: int) -> float:
    """Transition probability |<x|y>|^2 between two outcome vectors."""
    if basis_x.dim != basis_y.dim:
        raise DimensionMismatch(f"dim {basis_x.dim} vs {basis_y.dim}")
    amp = basis_x.overlap(x, basis_y, y)
    return float(abs(amp) ** 2)


def ergodic_table(basis_x: Basis, basis_y: Basis) -> ErgodicTable:
    """Full table of transition probabilities |<x|y>|^2."""
    probs = np.abs(basis_x.overlaps_with(basis_y)) ** 2
    return ErgodicTable(rows=basis_x, cols=basis_y, probs=_freeze(probs))
