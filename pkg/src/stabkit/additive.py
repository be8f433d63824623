"""Additive combinatorics over F2^(2n): representation counts, nearly-linear
set extraction, sumsets and doubling, constructive BSG, heavy translates.

The existence arguments behind the extraction and BSG steps are
probabilistic, so both are realized as retry loops with caps and explicit
success flags: at desk scale the stated size conditions may simply not
hold, and a capped failure is data rather than a crash.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, ValidationError
from .gf2 import GF2Subspace, WeylLabel, enumerate_subspaces
from .state import DyadicTable, PureState, char_distribution, fwht, gamma_exact

__all__ = [
    "GF2Set",
    "ExtractionReport",
    "BsgResult",
    "representation_counts",
    "extract_nearly_linear_set",
    "sumset_doubling",
    "bsg_extract",
    "brute_force_subspace_cover",
    "find_heavy_translate",
    "parse_set",
    "format_set",
]


@dataclass(frozen=True)
class GF2Set:
    """A subset of F2^(2n) as a dense membership bitset of length 4^n."""

    members: np.ndarray
    n: int

    def __post_init__(self):
        mem = np.asarray(self.members, dtype=bool)
        if mem.shape != (1 << (2 * self.n),):
            raise ValidationError(
                f"expected bitset of length {1 << (2 * self.n)} for n={self.n}"
            )
        mem = mem.copy()
        mem.setflags(write=False)
        object.__setattr__(self, "members", mem)

    @classmethod
    def from_indices(cls, indices, n: int) -> "GF2Set":
        mem = np.zeros(1 << (2 * n), dtype=bool)
        mem[np.asarray(list(indices), dtype=np.int64)] = True
        return cls(mem, n)

    @classmethod
    def from_subspace(cls, V: GF2Subspace) -> "GF2Set":
        return cls.from_indices(V.element_bits, V.n)

    @property
    def size(self) -> int:
        return int(self.members.sum())

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def labels(self) -> list[WeylLabel]:
        return [WeylLabel(int(b), self.n) for b in self.indices()]


def representation_counts(S: GF2Set) -> dict:
    """r(x) = #{(a,b) in S^2 : a+b = x} plus closure probability and energy.

    The count table is the dyadic self-convolution of the indicator,
    computed through the Walsh-Hadamard transform in O(4^n n); entries are
    exact integers well inside float64 range.
    """
    size = S.size
    if size < 1:
        raise ValidationError("set must be nonempty")
    indicator = S.members.astype(np.float64)
    spectrum = fwht(indicator)
    r = np.rint(fwht(spectrum * spectrum) / indicator.size)
    closure = float(r[S.members].sum() / (size * size))
    energy = int(np.dot(r, r))
    return {
        "r": DyadicTable(r, S.n, "generic"),
        "closure_prob": closure,
        "additive_energy": energy,
    }


@dataclass(frozen=True)
class ExtractionReport:
    set: GF2Set
    size: int
    min_mass: float
    closure_prob: float
    succeeded: bool
    retries_used: int


def extract_nearly_linear_set(
    state: PureState,
    gamma: float,
    rng: np.random.Generator,
    retry_cap: int = 200,
) -> ExtractionReport:
    """Sample a large nearly-closed set of heavy labels.

    Candidates are the labels with 2^n p(x) >= gamma/4; each is kept with
    probability 2^n p(x), retrying until |S| >= (gamma/2) 2^n and the
    closure probability reaches gamma/6, or the cap runs out (failure flag;
    expected when 2^n is far below the regime the guarantee needs).
    """
    exact = gamma_exact(state)
    if gamma > exact + 1e-9:
        warnings.warn(
            f"requested gamma {gamma!r} exceeds the exact value {exact!r}",
            stacklevel=2,
        )
    p = char_distribution(state)
    mass = (1 << state.n) * p.values
    heavy = mass >= gamma / 4.0
    inclusion = np.where(heavy, np.minimum(mass, 1.0), 0.0)

    size_goal = (gamma / 2.0) * (1 << state.n)
    closure_goal = gamma / 6.0
    best: ExtractionReport | None = None
    for attempt in range(1, retry_cap + 1):
        members = rng.random(inclusion.size) < inclusion
        size = int(members.sum())
        if size == 0:
            candidate = ExtractionReport(
                GF2Set(members, state.n), 0, 0.0, 0.0, False, attempt
            )
        else:
            sample = GF2Set(members, state.n)
            closure = representation_counts(sample)["closure_prob"]
            min_mass = float(mass[members].min())
            ok = size >= size_goal and closure >= closure_goal
            candidate = ExtractionReport(sample, size, min_mass, closure, ok, attempt)
        if candidate.succeeded:
            return candidate
        if best is None or (candidate.size, candidate.closure_prob) > (
            best.size,
            best.closure_prob,
        ):
            best = candidate
    assert best is not None
    return ExtractionReport(
        best.set, best.size, best.min_mass, best.closure_prob, False, retry_cap
    )


def sumset_doubling(S: GF2Set) -> dict:
    """S+S (via the support of the representation counts) and |S+S|/|S|."""
    counts = representation_counts(S)
    sumset = GF2Set(counts["r"].values > 0.5, S.n)
    return {"sumset": sumset, "doubling": sumset.size / S.size}


@dataclass(frozen=True)
class BsgResult:
    s_prime: GF2Set
    z_used: WeylLabel
    succeeded: bool
    stats: dict


def bsg_extract(
    S: GF2Set,
    eps: float,
    rng: np.random.Generator,
    trials: int = 500,
    heavy_fraction: float = 1.0 / 16.0,
    degree_fraction: float = 0.75,
) -> BsgResult:
    """Constructive BSG step: a large small-doubling subset of a nearly-closed set.

    Each trial draws Z from S, forms B = S n (S+Z), links a, b in B when
    r(a+b) >= heavy_fraction * eps^2 |S|, and keeps the vertices of degree
    >= degree_fraction * |B| (defaults are the proof's 1/16 and 3/4; both
    are overridable for experimentation).  The first candidate with
    |S'| >= (eps/(2 sqrt 2))|S| and doubling at most 8 eps^-6 is returned;
    otherwise the best candidate comes back with the failure flag set.
    """
    if not 0.0 < eps <= 1.0:
        raise ValidationError(f"eps must be in (0,1], got {eps}")
    counts = representation_counts(S)
    if counts["closure_prob"] < eps - 1e-12:
        raise ValidationError(
            f"closure probability {counts['closure_prob']!r} is below eps {eps!r}"
        )
    size = S.size
    r = counts["r"].values
    heavy_pair = r >= heavy_fraction * eps * eps * size
    member_idx = S.indices()
    size_goal = eps / (2.0 * np.sqrt(2.0)) * size
    doubling_goal = 8.0 * eps**-6

    best: BsgResult | None = None
    for trial in range(1, trials + 1):
        z = int(member_idx[rng.integers(size)])
        b_mask = S.members & S.members[np.arange(S.members.size) ^ z]
        b_idx = np.flatnonzero(b_mask)
        if b_idx.size == 0:
            continue
        degrees = heavy_pair[b_idx[:, None] ^ b_idx[None, :]].sum(axis=1)
        keep = degrees >= degree_fraction * b_idx.size
        s_prime_idx = b_idx[keep]
        stats = {
            "trial": trial,
            "b_size": int(b_idx.size),
            "edge_density": float(
                heavy_pair[b_idx[:, None] ^ b_idx[None, :]].mean()
            ),
            "degree_histogram": np.bincount(degrees).tolist(),
            "s_prime_size": int(s_prime_idx.size),
        }
        if s_prime_idx.size == 0:
            candidate = BsgResult(
                GF2Set(np.zeros_like(S.members), S.n), WeylLabel(z, S.n), False, stats
            )
        else:
            s_prime = GF2Set.from_indices(s_prime_idx, S.n)
            doubling = sumset_doubling(s_prime)["doubling"]
            stats["doubling"] = doubling
            ok = s_prime_idx.size >= size_goal and doubling <= doubling_goal
            candidate = BsgResult(s_prime, WeylLabel(z, S.n), ok, stats)
        if candidate.succeeded:
            return candidate
        if best is None or candidate.stats["s_prime_size"] > best.stats["s_prime_size"]:
            best = candidate
    assert best is not None
    return best


def brute_force_subspace_cover(S: GF2Set) -> dict:
    """Tiny-n stand-in for the covering step of the small-doubling theory.

    Scans every subspace V of F2^(2n) with |V| <= |S| and returns the one
    hit by the fewest translates (ties broken toward larger subspaces, then
    lexicographically).  Exponential in 2n, hence capped at 2n <= 8; call
    it deliberately, never from a hot path.
    """
    if 2 * S.n > 8:
        raise CapExceededError(
            f"subspace cover search capped at 2n=8, got 2n={2 * S.n}"
        )
    member_idx = S.indices()
    if member_idx.size == 0:
        raise ValidationError("set must be nonempty")
    size = S.size
    best: tuple[int, int, tuple[int, ...]] | None = None
    for basis in enumerate_subspaces(2 * S.n):
        if 1 << len(basis) > size:
            continue
        keys = member_idx.copy()
        for row in basis:
            pivot = 1 << (row.bit_length() - 1)
            keys = np.where(keys & pivot, keys ^ row, keys)
        translate_count = int(np.unique(keys).size)
        ranking = (translate_count, -len(basis), basis)
        if best is None or ranking < best:
            best = ranking
    assert best is not None
    doubling = sumset_doubling(S)["doubling"]
    return {
        "subspace": GF2Subspace(best[2], S.n),
        "translate_count": best[0],
        "doubling": doubling,
        "translate_bound": (2.0 * doubling) ** 9,
    }


def find_heavy_translate(S: GF2Set, V: GF2Subspace) -> dict:
    """The coset of V holding the most members of S (smallest representative).

    By pigeonhole the overlap is at least |S| divided by the coset count.
    """
    if V.n != S.n:
        raise ValidationError(f"qubit-count mismatch: set n={S.n}, V n={V.n}")
    member_idx = S.indices()
    if member_idx.size == 0:
        raise ValidationError("set must be nonempty")
    # Bucket members by the pivot-cleared canonical form of their coset.
    keys = member_idx.copy()
    for row in V.basis:
        pivot = 1 << (row.bit_length() - 1)
        keys = np.where(keys & pivot, keys ^ row, keys)
    uniq, counts = np.unique(keys, return_counts=True)
    order = np.argmax(counts)
    best_key, overlap = int(uniq[order]), int(counts[order])
    rep = min(best_key ^ v for v in V.element_bits)
    return {"coset_rep": WeylLabel(rep, V.n), "overlap": overlap}


# ---------------------------------------------------------------------------
# Text format: one member per line as a 2n-character 0/1 string.
# ---------------------------------------------------------------------------


def parse_set(text: str) -> GF2Set:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty set file")
    labels = [WeylLabel.from_string(ln) for ln in lines]
    n = labels[0].n
    if any(lab.n != n for lab in labels):
        raise ValidationError("set members mix lengths")
    return GF2Set.from_indices([lab.bits for lab in labels], n)


def format_set(S: GF2Set) -> str:
    return "".join(lab.to_string() + "\n" for lab in S.labels())
