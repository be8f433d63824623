"""Bit-exact symplectic linear algebra over F2^(2n).

Weyl-operator labels are vectors x = (x1, x2) in F2^n x F2^n, packed into a
single int with x1 in the low n bits and x2 in the high n bits.  The
lexicographic (numeric) order on this packing fixes every "choose an
element" step, so all constructions here are deterministic.

Subspaces carry a canonical reduced basis (pivot = highest set bit, rows
strictly decreasing), which makes them hashable and comparable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator

from .errors import CapExceededError, ValidationError

__all__ = [
    "WeylLabel",
    "GF2Subspace",
    "SymplecticDecomposition",
    "symplectic_form",
    "span_and_classify",
    "symplectic_gram_schmidt",
    "extend_to_lagrangian",
    "isotropic_cover",
    "enumerate_lagrangians",
    "enumerate_subspaces",
    "random_subspace",
    "parse_subspace",
    "format_subspace",
]


@dataclass(frozen=True, order=True)
class WeylLabel:
    """A vector in F2^(2n) naming the Weyl operator W_x.

    ``bits`` packs x1 (low n bits) and x2 (high n bits); bit i of each half
    is qubit i.  The zero label names the identity.
    """

    bits: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"qubit count must be >= 1, got {self.n}")
        if not 0 <= self.bits < 1 << (2 * self.n):
            raise ValidationError(f"label 0x{self.bits:x} out of range for n={self.n}")

    @property
    def x1(self) -> int:
        return self.bits & ((1 << self.n) - 1)

    @property
    def x2(self) -> int:
        return self.bits >> self.n

    @classmethod
    def from_halves(cls, x1: int, x2: int, n: int) -> "WeylLabel":
        if not (0 <= x1 < 1 << n and 0 <= x2 < 1 << n):
            raise ValidationError(f"halves ({x1}, {x2}) out of range for n={n}")
        return cls(x1 | (x2 << n), n)

    @classmethod
    def from_string(cls, text: str) -> "WeylLabel":
        """Parse a 2n-character 0/1 string, x1 half first, leftmost char = qubit 0."""
        text = text.strip()
        if len(text) % 2 or not text or set(text) - {"0", "1"}:
            raise ValidationError(f"not a 2n-character 0/1 string: {text!r}")
        n = len(text) // 2
        bits = 0
        for i, ch in enumerate(text):
            if ch == "1":
                bits |= 1 << i
        return cls(bits, n)

    def to_string(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(2 * self.n))

    def __xor__(self, other: "WeylLabel") -> "WeylLabel":
        if self.n != other.n:
            raise ValidationError(f"qubit-count mismatch: {self.n} vs {other.n}")
        return WeylLabel(self.bits ^ other.bits, self.n)

    def is_zero(self) -> bool:
        return self.bits == 0


def symplectic_form(x: WeylLabel, y: WeylLabel) -> int:
    """<x1,y2> + <x2,y1> mod 2; equals 1 iff W_x and W_y anticommute."""
    if x.n != y.n:
        raise ValidationError(f"qubit-count mismatch: {x.n} vs {y.n}")
    return _form_bits(x.bits, y.bits, x.n)


def _form_bits(a: int, b: int, n: int) -> int:
    mask = (1 << n) - 1
    v = ((a & mask) & (b >> n)) ^ ((a >> n) & (b & mask))
    return v.bit_count() & 1


def _reduce_rows(rows: Iterable[int]) -> tuple[int, ...]:
    """Canonical reduced basis: pivots are highest set bits, rows descending."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            # Re-eliminate the new pivot from earlier rows.
            for i, b in enumerate(basis[:-1]):
                basis[i] = min(b, b ^ row)
    return tuple(sorted(basis, reverse=True))


def _in_span(vec: int, basis: Iterable[int]) -> bool:
    for b in basis:
        vec = min(vec, vec ^ b)
    return vec == 0


@dataclass(frozen=True, order=True)
class GF2Subspace:
    """A subspace of F2^(2n) held as its canonical reduced basis."""

    basis: tuple[int, ...]
    n: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return 1 << self.dim

    @cached_property
    def is_isotropic(self) -> bool:
        return all(
            _form_bits(a, b, self.n) == 0
            for a, b in itertools.combinations(self.basis, 2)
        )

    @cached_property
    def is_lagrangian(self) -> bool:
        return self.is_isotropic and self.dim == self.n

    @cached_property
    def k(self) -> int:
        return len(symplectic_gram_schmidt(self).hyperbolic_pairs)

    @cached_property
    def m(self) -> int:
        return len(symplectic_gram_schmidt(self).isotropic_part)

    def labels(self) -> tuple[WeylLabel, ...]:
        return tuple(WeylLabel(b, self.n) for b in self.basis)

    @cached_property
    def element_bits(self) -> tuple[int, ...]:
        """All 2^dim packed members, in subset-combination order (element 0 first)."""
        elems = [0]
        for b in self.basis:
            elems += [e ^ b for e in elems]
        return tuple(elems)

    def contains(self, label: WeylLabel) -> bool:
        if label.n != self.n:
            raise ValidationError(f"qubit-count mismatch: {label.n} vs {self.n}")
        return _in_span(label.bits, self.basis)


def span_and_classify(generators: list[WeylLabel]) -> GF2Subspace:
    """Span of the given labels as a canonical subspace.

    The isotropic/lagrangian flags and the (k, m) decomposition sizes are
    available as cached properties on the result.
    """
    if not generators:
        raise ValidationError("need at least one generator")
    n = generators[0].n
    if any(g.n != n for g in generators):
        raise ValidationError("generators mix qubit counts")
    return GF2Subspace(_reduce_rows(g.bits for g in generators), n)


@dataclass(frozen=True)
class SymplecticDecomposition:
    """Hyperbolic pairs plus commuting leftovers spanning a subspace.

    Pairs (z_i, x_i) satisfy [z_i, x_i] = 1 and have form 0 with every other
    listed generator; the isotropic part commutes with everything listed.
    2k + m equals the dimension of the decomposed subspace.
    """

    hyperbolic_pairs: tuple[tuple[WeylLabel, WeylLabel], ...]
    isotropic_part: tuple[WeylLabel, ...]
    n: int

    @property
    def k(self) -> int:
        return len(self.hyperbolic_pairs)

    @property
    def m(self) -> int:
        return len(self.isotropic_part)


def symplectic_gram_schmidt(V: GF2Subspace) -> SymplecticDecomposition:
    """Split V into k hyperbolic pairs and m commuting generators (2k+m = dim V)."""
    n = V.n
    rows = list(V.basis)
    pairs: list[tuple[int, int]] = []
    while True:
        hit = next(
            (
                (i, j)
                for i in range(len(rows))
                for j in range(i + 1, len(rows))
                if _form_bits(rows[i], rows[j], n)
            ),
            None,
        )
        if hit is None:
            break
        i, j = hit
        z, x = rows[i], rows[j]
        pairs.append((z, x))
        rest = []
        for t, w in enumerate(rows):
            if t in (i, j):
                continue
            if _form_bits(w, x, n):
                w ^= z
            if _form_bits(w, z, n):
                w ^= x
            rest.append(w)
        rows = list(_reduce_rows(rest))
    iso = _reduce_rows(rows)
    if 2 * len(pairs) + len(iso) != V.dim:
        raise AssertionError("decomposition lost rank")  # pragma: no cover
    return SymplecticDecomposition(
        tuple((WeylLabel(z, n), WeylLabel(x, n)) for z, x in pairs),
        tuple(WeylLabel(b, n) for b in iso),
        n,
    )


def extend_to_lagrangian(V0: GF2Subspace) -> GF2Subspace:
    """Smallest-label greedy extension of an isotropic subspace to a Lagrangian."""
    if not V0.is_isotropic:
        raise ValidationError("subspace is not isotropic")
    n = V0.n
    basis = list(V0.basis)
    for cand in range(1, 1 << (2 * n)):
        if len(basis) == n:
            break
        if _in_span(cand, basis):
            continue
        if all(_form_bits(cand, b, n) == 0 for b in basis):
            basis = list(_reduce_rows(basis + [cand]))
    result = GF2Subspace(_reduce_rows(basis), n)
    if not result.is_lagrangian:
        raise AssertionError("greedy extension fell short")  # pragma: no cover
    return result


# ---------------------------------------------------------------------------
# Isotropic coverings via a symplectic spread of F2^(2k).
#
# The hyperbolic block of V is isomorphic to F2^(2k) with the standard form;
# a spread is a family of 2^k + 1 Lagrangian subspaces of that block meeting
# pairwise only in 0, so together they cover every element.  Adjoining the
# commuting generators of V to each spread member covers all of V with
# 2^k + 1 isotropic subspaces.
# ---------------------------------------------------------------------------

# Irreducible polynomials over F2 for GF(2^k), packed with the leading bit set.
_GF_POLY = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
}


def _gf_mul(a: int, b: int, k: int) -> int:
    poly = _GF_POLY[k]
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> k & 1:
            a ^= poly
    return acc


def _gf_trace(a: int, k: int) -> int:
    acc, cur = 0, a
    for _ in range(k):
        acc ^= cur
        cur = _gf_mul(cur, cur, k)
    return acc & 1  # trace lands in F2


@lru_cache(maxsize=None)
def _symplectic_spread(k: int) -> tuple[tuple[int, ...], ...]:
    """2^k + 1 pairwise-disjoint Lagrangian bases of F2^(2k), standard form.

    Built from GF(2^k): the form tr(a*d) + tr(b*c) on pairs (a, b) is the
    standard one once the second coordinate is written in the trace-dual
    basis.  Members are the b-axis plus one "slope s" subspace per field
    element; packing is low k bits / high k bits.
    """
    if k < 1 or k not in _GF_POLY:
        raise CapExceededError(f"no spread table for k={k}")
    # Gram matrix of the trace form in the monomial basis, as columns.
    gram_cols = [
        sum(_gf_trace(_gf_mul(1 << i, 1 << j, k), k) << i for i in range(k))
        for j in range(k)
    ]
    members = [tuple(ej << k for ej in (1 << j for j in range(k)))]  # b-axis
    for s in range(1 << k):
        basis = []
        for i in range(k):
            prod_bits = _gf_mul(s, 1 << i, k)
            # Coordinates of s*t^i in the trace-dual basis: G @ bits(prod).
            coord = 0
            for row in range(k):
                acc = 0
                for j in range(k):
                    acc ^= (gram_cols[j] >> row & 1) & (prod_bits >> j & 1)
                coord |= acc << row
            basis.append((1 << i) | (coord << k))
        members.append(tuple(basis))
    return tuple(members)


def isotropic_cover(V: GF2Subspace) -> list[GF2Subspace]:
    """Cover V with at most 2^k + 1 isotropic subspaces of V (k from its decomposition)."""
    if V.dim == 0:
        return [V]
    dec = symplectic_gram_schmidt(V)
    if dec.k == 0:
        return [V]
    n, k = V.n, dec.k
    z = [p[0].bits for p in dec.hyperbolic_pairs]
    x = [p[1].bits for p in dec.hyperbolic_pairs]
    iso = [t.bits for t in dec.isotropic_part]

    def embed(vec: int) -> int:
        out = 0
        for i in range(k):
            if vec >> i & 1:
                out ^= z[i]
            if vec >> (k + i) & 1:
                out ^= x[i]
        return out

    parts = []
    for member in _symplectic_spread(k):
        rows = [embed(v) for v in member] + iso
        part = GF2Subspace(_reduce_rows(rows), n)
        if not part.is_isotropic or part.dim != k + dec.m:
            raise AssertionError("spread produced a bad cover part")  # pragma: no cover
        parts.append(part)
    return parts


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def enumerate_subspaces(two_n: int, dim: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield the canonical basis of every subspace of F2^two_n (optionally fixed dim).

    Enumerates reduced row-echelon bases directly: choose decreasing pivot
    bits, then every assignment of the free positions below each pivot.
    """
    if two_n > 12:
        raise CapExceededError(f"subspace enumeration capped at 12 bits, got {two_n}")
    dims = range(two_n + 1) if dim is None else [dim]
    for d in dims:
        if d == 0:
            yield ()
            continue
        for pivots in itertools.combinations(range(two_n - 1, -1, -1), d):
            free = [
                [b for b in range(p) if b not in pivots] for p in pivots
            ]
            for fills in itertools.product(
                *(range(1 << len(f)) for f in free)
            ):
                rows = []
                for p, fcols, fill in zip(pivots, free, fills):
                    row = 1 << p
                    for idx, b in enumerate(fcols):
                        if fill >> idx & 1:
                            row |= 1 << b
                    rows.append(row)
                yield tuple(rows)


def enumerate_lagrangians(n: int) -> Iterator[GF2Subspace]:
    """Yield every Lagrangian subspace of F2^(2n) exactly once (n <= 4)."""
    if n > 4:
        raise CapExceededError(f"Lagrangian enumeration capped at n=4, got {n}")
    yield from _lagrangian_list(n)


def random_subspace(n: int, dim: int, rng) -> GF2Subspace:
    """Uniform-ish random subspace of F2^(2n) of the given dimension."""
    if not 0 <= dim <= 2 * n:
        raise ValidationError(f"dimension {dim} out of range for 2n={2 * n}")
    basis: list[int] = []
    while len(basis) < dim:
        cand = int(rng.integers(1, 1 << (2 * n)))
        if not _in_span(cand, basis):
            basis = list(_reduce_rows(basis + [cand]))
    return GF2Subspace(tuple(sorted(basis, reverse=True)), n)


@lru_cache(maxsize=None)
def _lagrangian_list(n: int) -> tuple[GF2Subspace, ...]:
    # Breadth-first growth of isotropic subspaces, deduplicated by canonical basis.
    level: set[tuple[int, ...]] = {()}
    for _ in range(n):
        nxt: set[tuple[int, ...]] = set()
        for basis in level:
            for cand in range(1, 1 << (2 * n)):
                if _in_span(cand, basis):
                    continue
                if any(_form_bits(cand, b, n) for b in basis):
                    continue
                nxt.add(_reduce_rows(basis + (cand,)))
        level = nxt
    return tuple(GF2Subspace(b, n) for b in sorted(level))


# ---------------------------------------------------------------------------
# Text format: one basis row per line as a 2n-character 0/1 string.
# ---------------------------------------------------------------------------


def parse_subspace(text: str) -> GF2Subspace:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty subspace file")
    labels = [WeylLabel.from_string(ln) for ln in lines]
    return span_and_classify(labels)


def format_subspace(V: GF2Subspace) -> str:
    return "".join(WeylLabel(b, V.n).to_string() + "\n" for b in V.basis)
