"""Ground-truth stabilizer fidelity by exhaustive Lagrangian maximization.

Every stabilizer state is the joint +1 eigenstate of a signed Lagrangian
group: pick a Lagrangian V and one of 2^n valid sign patterns.  The sign
patterns are the characters of V relative to a base pattern coming from
ordered products of the reduced-basis generators (the all-plus pattern is
not always a group: e.g. the span of XX and ZZ contains -YY).  The best
fidelity over one V is then a single Walsh-Hadamard transform of signed
expectations, and the oracle maximizes over all Lagrangians (n <= 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapExceededError, CertificateError, ValidationError
from .gf2 import GF2Subspace, WeylLabel, enumerate_lagrangians
from .state import PureState, char_distribution, fwht, weyl_expectation_table, weyl_matrix

__all__ = [
    "ORACLE_QUBIT_CAP",
    "FidelityReport",
    "weyl_product_phase",
    "lagrangian_mass",
    "best_character_fidelity",
    "stabilizer_fidelity_exact",
    "twirl_purity",
]

ORACLE_QUBIT_CAP = 4


def weyl_product_phase(x: WeylLabel, y: WeylLabel) -> tuple[WeylLabel, int]:
    """W_x W_y = i^t W_(x+y); returns (x+y, t mod 4)."""
    if x.n != y.n:
        raise ValidationError(f"qubit-count mismatch: {x.n} vs {y.n}")
    t = (
        (x.x1 & x.x2).bit_count()
        + (y.x1 & y.x2).bit_count()
        + 2 * (x.x2 & y.x1).bit_count()
        - ((x.x1 ^ y.x1) & (x.x2 ^ y.x2)).bit_count()
    ) % 4
    return x ^ y, t


def _require_lagrangian(V: GF2Subspace) -> None:
    if not V.is_lagrangian:
        raise ValidationError("subspace is not Lagrangian")


def _group_elements_and_signs(V: GF2Subspace) -> tuple[np.ndarray, np.ndarray]:
    """Packed members of V (basis-combination order) and the base sign pattern.

    Entry c is the product W_{b_i1} W_{b_i2} ... over the set bits of c,
    which equals sign[c] * W_{elements[c]}; the products are Hermitian, so
    every sign is +-1.
    """
    n = V.n
    count = 1 << V.dim
    elements = np.zeros(count, dtype=np.int64)
    phase_exp = np.zeros(count, dtype=np.int64)
    for c in range(1, count):
        low = c & -c
        rest = c ^ low
        gen = V.basis[low.bit_length() - 1]
        prod, t = weyl_product_phase(
            WeylLabel(gen, n), WeylLabel(int(elements[rest]), n)
        )
        elements[c] = prod.bits
        phase_exp[c] = (phase_exp[rest] + t) % 4
    if np.any(phase_exp % 2):
        raise CertificateError("non-Hermitian product in a commuting group (engine bug)")
    signs = np.where(phase_exp == 0, 1.0, -1.0)
    return elements, signs


@lru_cache(maxsize=8)
def _lagrangian_table(n: int) -> tuple[tuple[GF2Subspace, ...], np.ndarray, np.ndarray]:
    """All Lagrangians of F2^(2n) (lexicographic), stacked elements and signs."""
    subspaces = tuple(enumerate_lagrangians(n))
    elements = np.zeros((len(subspaces), 1 << n), dtype=np.int64)
    signs = np.zeros((len(subspaces), 1 << n), dtype=np.float64)
    for i, V in enumerate(subspaces):
        elements[i], signs[i] = _group_elements_and_signs(V)
    return subspaces, elements, signs


@dataclass(frozen=True)
class FidelityReport:
    f_s: float
    argmax_lagrangian: GF2Subspace
    argmax_character: int  # n-bit character index relative to the base signs
    lagrangian_masses: dict


def lagrangian_mass(state: PureState, V: GF2Subspace) -> float:
    """sum_{x in V} p(x), a lower bound on the stabilizer fidelity."""
    _require_lagrangian(V)
    if state.n != V.n:
        raise ValidationError(f"qubit-count mismatch: state n={state.n}, V n={V.n}")
    p = char_distribution(state)
    return float(p.values[np.fromiter(V.element_bits, dtype=np.int64)].sum())


def best_character_fidelity(state: PureState, V: GF2Subspace) -> dict:
    """Max fidelity against the 2^n stabilizer states whose group is +-V.

    Computed as max_t 2^-n sum_c s0(c) (-1)^(t.c) <W_elem(c)> over the
    character index t, one Walsh-Hadamard transform of the signed
    expectations.
    """
    _require_lagrangian(V)
    if state.n != V.n:
        raise ValidationError(f"qubit-count mismatch: state n={state.n}, V n={V.n}")
    expect = weyl_expectation_table(state)
    elements, signs = _group_elements_and_signs(V)
    fidelities = fwht(signs * expect[elements]) / (1 << V.n)
    t = int(np.argmax(fidelities))
    return {"fidelity": float(fidelities[t]), "character": t}


def stabilizer_fidelity_exact(state: PureState) -> FidelityReport:
    """Exhaustive max |<psi|S>|^2 over all stabilizer states (n <= 4)."""
    if state.n > ORACLE_QUBIT_CAP:
        raise CapExceededError(
            f"exhaustive oracle capped at n={ORACLE_QUBIT_CAP}, got {state.n}"
        )
    subspaces, elements, signs = _lagrangian_table(state.n)
    expect = weyl_expectation_table(state)
    fidelities = fwht(signs * expect[elements]) / (1 << state.n)
    per_lagrangian = fidelities.max(axis=1)
    best = int(np.argmax(per_lagrangian))  # first max = lexicographically smallest
    p = char_distribution(state)
    masses = {
        V: float(p.values[elements[i]].sum()) for i, V in enumerate(subspaces)
    }
    return FidelityReport(
        f_s=float(per_lagrangian[best]),
        argmax_lagrangian=subspaces[best],
        argmax_character=int(np.argmax(fidelities[best])),
        lagrangian_masses=masses,
    )


def twirl_purity(state: PureState, V: GF2Subspace) -> float:
    """Purity of the V-twirled state, cross-checked densely against the p mass.

    Tr[(2^-n sum_{x in V} W_x psi W_x)^2] equals sum_{y in V} p(y); both
    routes are computed and must agree to 1e-9.
    """
    _require_lagrangian(V)
    if V.n > ORACLE_QUBIT_CAP:
        raise CapExceededError(f"dense twirl capped at n={ORACLE_QUBIT_CAP}")
    if state.n != V.n:
        raise ValidationError(f"qubit-count mismatch: state n={state.n}, V n={V.n}")
    psi = np.outer(state.amplitudes, np.conj(state.amplitudes))
    acc = np.zeros_like(psi)
    for bits in V.element_bits:
        w = weyl_matrix(WeylLabel(bits, V.n))
        acc += w @ psi @ w.conj().T
    acc /= 1 << V.n
    dense = float(np.trace(acc @ acc).real)
    mass = lagrangian_mass(state, V)
    if abs(dense - mass) > 1e-9:
        raise CertificateError(
            f"twirl identity failed: dense {dense!r} vs mass {mass!r} (engine bug)"
        )
    return mass
