"""Vectors, inner products, and state quasiprobabilities from conditionals.

Everything here is built from conditional and transition probabilities
alone; the matching linear-algebra quantities serve only as test oracles.
A fixed reference outcome b supplies the phase standard: the reconstructed
amplitudes equal the conventional ones in the gauge where every overlap
with b is real and non-negative, so comparisons against raw amplitudes
must re-gauge first (see :func:`reference_gauge_amplitudes`).
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .basis import Basis, ergodic_prob
from .ccp import (
    CcpTable,
    IMAG_RESIDUE_TOL,
    ORTHOGONALITY_CUTOFF,
    ccp_table,
)
from .errors import (
    BasisMismatch,
    DimensionMismatch,
    NumericsError,
    OrthogonalCondition,
    ZeroReferenceOverlap,
)

REFERENCE_OVERLAP_FLOOR = 1e-14


def reconstruct_vector(table: CcpTable, a: int, b_ref: int) -> np.ndarray:
    """Unit vector of outcome a in the intermediate basis, from conditionals.

    Component m is sqrt(p(a|b_ref)/p(m|b_ref)) * p(m|a,b_ref).  The result
    has unit norm and equals the amplitude column <m|a> in the gauge fixed
    by the reference outcome, up to one global phase.
    """
    col = table.column(a, b_ref)
    p_m_b = np.abs(
        table.m_basis.vectors.conj().T @ table.b_basis.vectors[:, b_ref]
    ) ** 2
    if np.any(p_m_b <= REFERENCE_OVERLAP_FLOOR):
        raise ZeroReferenceOverlap(
            "reference outcome is orthogonal to an intermediate outcome"
        )
    p_a_b = ergodic_prob(table.a_basis, a, table.b_basis, b_ref)
    return np.sqrt(p_a_b / p_m_b) * col


def reference_gauge_amplitudes(
    basis_m: Basis, basis_a: Basis, a: int, basis_b: Basis, b_ref: int
) -> np.ndarray:
    """Oracle amplitudes <m|a> re-gauged so every <b_ref|.> is real positive.

    This is the linear-algebra counterpart of :func:`reconstruct_vector`:
    each vector is rotated by the phase of its overlap with the reference
    outcome, the gauge in which the reconstruction identity is exact.
    """
    b_vec = basis_b.vectors[:, b_ref]
    amps = basis_m.vectors.conj().T @ basis_a.vectors[:, a]
    beta = np.angle(basis_m.vectors.conj().T @ b_vec)  # Arg <m|b_ref>
    alpha = np.angle(np.vdot(basis_a.vectors[:, a], b_vec))  # Arg <a|b_ref>
    return amps * np.exp(1j * (alpha - beta))


def align_global_phase(candidate: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Rotate ``candidate`` by the single phase that best matches ``target``."""
    overlap = np.vdot(target, candidate)
    if abs(overlap) == 0.0:
        return candidate
    return candidate * (np.conj(overlap) / abs(overlap))


def _paired_conditionals(
    basis_t: Basis,
    t: int,
    basis_m: Basis,
    basis_s: Basis,
    s: int,
    basis_b: Basis,
    b_ref: int,
) -> np.ndarray:
    """Products p(t|m,b) p(m|s,b) over m, finite at <b|m> = 0.

    Where the intermediate overlap <b|m> is above cutoff, both
    conditionals are formed separately and multiplied; at (numerically)
    orthogonal intermediates the product is assigned its analytic limit
    <b|t><t|m><m|s>/<b|s>, in which <b|m> cancels.
    """
    if len({basis_t.dim, basis_m.dim, basis_s.dim, basis_b.dim}) != 1:
        raise DimensionMismatch("all four bases must share one dimension")
    b_vec = basis_b.vectors[:, b_ref]
    b_s = complex(np.vdot(b_vec, basis_s.vectors[:, s]))
    if abs(b_s) <= ORTHOGONALITY_CUTOFF:
        raise OrthogonalCondition("initial outcome orthogonal to the reference")
    b_t = complex(np.vdot(b_vec, basis_t.vectors[:, t]))
    b_m = np.conj(basis_m.vectors.conj().T @ b_vec)  # <b|m>
    t_m = np.conj(basis_m.vectors.conj().T @ basis_t.vectors[:, t])  # <t|m>
    m_s = basis_m.vectors.conj().T @ basis_s.vectors[:, s]  # <m|s>
    limit = b_t * t_m * m_s / b_s
    fine = np.abs(b_m) > ORTHOGONALITY_CUTOFF
    out = np.array(limit)
    out[fine] = (b_t * t_m[fine] / b_m[fine]) * (b_m[fine] * m_s[fine] / b_s)
    return out


def inner_product_ccp(
    basis_f: Basis,
    f: int,
    basis_a: Basis,
    a: int,
    basis_m: Basis,
    basis_b: Basis,
    b_ref: int,
) -> complex:
    """Inner product <f|a> assembled from conditionals through basis M.

    Returns sqrt(p(a|b)/p(f|b)) * sum_m p(f|m,b) p(m|a,b).  The magnitude
    equals |<f|a>|; the phase is fixed by the reference outcome and is
    independent of the intermediate basis M.
    """
    p_f_b = ergodic_prob(basis_f, f, basis_b, b_ref)
    p_a_b = ergodic_prob(basis_a, a, basis_b, b_ref)
    if p_f_b <= REFERENCE_OVERLAP_FLOOR:
        raise OrthogonalCondition("target outcome orthogonal to the reference")
    terms = _paired_conditionals(basis_f, f, basis_m, basis_a, a, basis_b, b_ref)
    return complex(np.sqrt(p_a_b / p_f_b) * terms.sum())


def born_rule_coherence(
    basis_f: Basis,
    f: int,
    basis_a: Basis,
    a: int,
    basis_m: Basis,
    reference: tuple[Basis, int],
) -> float:
    """Transition probability p(f|a) from the conditional double sum.

    Evaluates sum_{m,m'} (p(m|a,b) p(a|m',b)) (p(m'|f,b) p(f|m,b)) at the
    reference condition.  The summand is Hermitian under swapping (m, m'),
    so the total is real; it equals |<f|a>|^2.
    """
    basis_b, b_ref = reference
    # Grouped per index so each factor pair stays finite at <b|m> = 0:
    # summand[m, m'] = (p(m|a,b) p(f|m,b)) * (p(a|m',b) p(m'|f,b)).
    left = _paired_conditionals(basis_f, f, basis_m, basis_a, a, basis_b, b_ref)
    right = _paired_conditionals(basis_a, a, basis_m, basis_f, f, basis_b, b_ref)
    summand = np.outer(left, right)
    total = complex(summand.sum())
    if abs(total.imag) >= IMAG_RESIDUE_TOL / 10:
        raise NumericsError(f"imaginary residue {total.imag:.3e} in coherence sum")
    return float(total.real)


@dataclass(frozen=True)
class JointQuasiProb:
    """Complex joint quasiprobability of a state over a basis pair.

    ``vals[a, b]`` sums to one and has real non-negative marginals.  The
    auxiliary ``sandwich[a, b] = <a|rho|b>`` stores the overlap-free factor
    of each entry so predictions stay finite even at orthogonal (a, b)
    pairs, where the conditional alone diverges but the product does not.
    """

    a_basis: Basis
    b_basis: Basis
    vals: np.ndarray  # (dim, dim), complex
    sandwich: np.ndarray | None = None  # (dim, dim), complex

    @property
    def dim(self) -> int:
        return self.a_basis.dim

    def total(self) -> complex:
        return complex(self.vals.sum())

    def marginal_a(self) -> np.ndarray:
        return self.vals.sum(axis=1)

    def marginal_b(self) -> np.ndarray:
        return self.vals.sum(axis=0)

    def to_json(self, indent: int | None = None) -> str:
        payload = {
            "a_basis": json.loads(self.a_basis.to_json()),
            "b_basis": json.loads(self.b_basis.to_json()),
            "re": self.vals.real.tolist(),
            "im": self.vals.imag.tolist(),
            "sandwich_re": None if self.sandwich is None else self.sandwich.real.tolist(),
            "sandwich_im": None if self.sandwich is None else self.sandwich.imag.tolist(),
        }
        return json.dumps(payload, sort_keys=True, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "JointQuasiProb":
        payload = json.loads(text)
        vals = np.array(payload["re"], dtype=np.float64) + 1j * np.array(
            payload["im"], dtype=np.float64
        )
        sandwich = None
        if payload.get("sandwich_re") is not None:
            sandwich = np.array(payload["sandwich_re"], dtype=np.float64) + 1j * np.array(
                payload["sandwich_im"], dtype=np.float64
            )
            sandwich.setflags(write=False)
        vals.setflags(write=False)
        return cls(
            a_basis=Basis.from_json(json.dumps(payload["a_basis"])),
            b_basis=Basis.from_json(json.dumps(payload["b_basis"])),
            vals=vals,
            sandwich=sandwich,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("a_label,b_label,re,im\n")
        for a in range(self.dim):
            for b in range(self.dim):
                v = self.vals[a, b]
                buf.write(
                    f"{self.a_basis.labels[a]},{self.b_basis.labels[b]},"
                    f"{float(v.real)!r},{float(v.imag)!r}\n"
                )
        return buf.getvalue()


def _validate_joint(vals: np.ndarray) -> None:
    total = vals.sum()
    if abs(total - 1.0) >= 1e-9:
        raise NumericsError(f"joint total {total} deviates from 1")
    for marg in (vals.sum(axis=0), vals.sum(axis=1)):
        if np.max(np.abs(marg.imag)) >= 1e-9 or np.min(marg.real) <= -1e-9:
            raise NumericsError("joint marginals are not real non-negative")


def pure_state_joint(
    state: tuple[Basis, int], basis_a: Basis, basis_b: Basis
) -> JointQuasiProb:
    """Joint quasiprobability of a sharply prepared outcome over (A, B).

    Entry (a, b) is conj(p(m|a,b)) p(b|a) = <a|m><m|b><b|a>, evaluated in
    the product form, which stays finite at orthogonal (a, b) pairs where
    the conditional factor alone is undefined.
    """
    basis_m, m = state
    if basis_m.dim != basis_a.dim or basis_m.dim != basis_b.dim:
        raise DimensionMismatch("state and joint bases must share one dimension")
    basis_m.check_index(m)
    psi = basis_m.vectors[:, m]
    a_psi = basis_a.vectors.conj().T @ psi  # <a|m>
    psi_b = np.conj(basis_b.vectors.conj().T @ psi)  # <m|b>
    sandwich = np.outer(a_psi, psi_b)  # <a|m><m|b>
    b_a = basis_b.overlaps_with(basis_a)  # <b|a>, [b, a]
    vals = sandwich * b_a.T
    _validate_joint(vals)
    vals.setflags(write=False)
    sandwich.setflags(write=False)
    return JointQuasiProb(a_basis=basis_a, b_basis=basis_b, vals=vals, sandwich=sandwich)


def mix_joints(joints, weights) -> JointQuasiProb:
    """Convex mixture of joint quasiprobabilities over a common basis pair.

    Plain statistical mixing; this extension beyond sharply prepared
    states is a convenience of this implementation.
    """
    joints = list(joints)
    weights = np.asarray(weights, dtype=np.float64)
    if len(joints) == 0 or weights.shape != (len(joints),):
        raise DimensionMismatch("need one weight per joint")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be non-negative and sum to one")
    first = joints[0]
    for j in joints[1:]:
        if not (
            j.a_basis.compatible_with(first.a_basis)
            and j.b_basis.compatible_with(first.b_basis)
        ):
            raise BasisMismatch("joints are defined over different basis pairs")
    vals = sum(w * j.vals for w, j in zip(weights, joints))
    sandwich = None
    if all(j.sandwich is not None for j in joints):
        sandwich = sum(w * j.sandwich for w, j in zip(weights, joints))
        sandwich.setflags(write=False)
    vals.setflags(write=False)
    return JointQuasiProb(
        a_basis=first.a_basis, b_basis=first.b_basis, vals=vals, sandwich=sandwich
    )


def predict_outcome_prob(joint: JointQuasiProb, basis_m: Basis, m: int) -> float:
    """Probability of outcome m predicted from a joint quasiprobability.

    Evaluates p(m) = sum_{a,b} p(m|a,b) rho(a,b).  When the joint carries
    its sandwich factor the sum is evaluated in the overlap-free form
    <b|m><m|a> <a|rho|b>, exact for every basis pair; otherwise undefined
    (a, b) pairs are skipped, which is only valid when their weight is
    negligible.
    """
    if basis_m.dim != joint.dim:
        raise BasisMismatch(f"dim {basis_m.dim} vs joint dim {joint.dim}")
    basis_m.check_index(m)
    m_a = (basis_m.vectors.conj().T @ joint.a_basis.vectors)[m, :]  # <m|a>
    b_m = np.conj((basis_m.vectors.conj().T @ joint.b_basis.vectors)[m, :])  # <b|m>
    if joint.sandwich is not None:
        total = complex(np.einsum("a,b,ab->", m_a, b_m, joint.sandwich))
    else:
        table = ccp_table(basis_m, joint.a_basis, joint.b_basis)
        weighted = np.where(table.defined_mask, table.vals[m] * joint.vals, 0.0)
        total = complex(weighted.sum())
    if abs(total.imag) >= 1e-10:
        raise NumericsError(f"imaginary residue {total.imag:.3e} in prediction")
    prob = float(total.real)
    if prob < -1e-9 or prob > 1.0 + 1e-9:
        raise NumericsError(f"predicted probability {prob} outside [0, 1]")
    return prob
