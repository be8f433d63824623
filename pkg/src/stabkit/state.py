"""Dense statevector engine: Weyl action, expectations, dyadic tables.

States are immutable normalized complex vectors of length 2^n (cap n <= 12);
the full 4^n tables (characteristic and Weyl distributions) are capped at
n <= 8.  The fast Walsh-Hadamard transform drives both the table
construction, in O(4^n n), and the dyadic self-convolution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import CapExceededError, CertificateError, ValidationError
from .gf2 import WeylLabel

__all__ = [
    "STATE_QUBIT_CAP",
    "TABLE_QUBIT_CAP",
    "PureState",
    "DyadicTable",
    "fwht",
    "apply_weyl",
    "weyl_matrix",
    "weyl_expectation",
    "weyl_expectation_table",
    "char_distribution",
    "weyl_distribution",
    "gamma_exact",
    "pad_with_zeros",
    "generate_state",
    "state_to_json_dict",
    "state_from_json_dict",
]

STATE_QUBIT_CAP = 12
TABLE_QUBIT_CAP = 8

_NORM_TOL = 1e-12
_HERMITICITY_TOL = 1e-10
_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)  # i^k, exact


@dataclass(frozen=True)
class PureState:
    """A normalized n-qubit statevector (amplitudes in natural binary order)."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"qubit count must be >= 1, got {self.n}")
        if self.n > STATE_QUBIT_CAP:
            raise CapExceededError(
                f"statevector engine capped at n={STATE_QUBIT_CAP}, got {self.n}"
            )
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise ValidationError(
                f"expected {1 << self.n} amplitudes for n={self.n}, got {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > _NORM_TOL:
            # Out-of-tolerance inputs are rejected, never silently renormalized.
            raise ValidationError(f"state norm^2 = {norm_sq!r} is not 1 within {_NORM_TOL}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n


TableKind = Literal["char_dist", "weyl_dist", "generic"]


@dataclass(frozen=True)
class DyadicTable:
    """A real table over F2^(2n), indexed by the packed Weyl-label bits."""

    values: np.ndarray
    n: int
    kind: TableKind = "generic"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (1 << (2 * self.n),):
            raise ValidationError(
                f"expected {1 << (2 * self.n)} entries for n={self.n}, got {vals.shape}"
            )
        if self.kind in ("char_dist", "weyl_dist"):
            if vals.min() < 0.0:
                raise ValidationError(f"{self.kind} has a negative entry: {vals.min()!r}")
            total = float(vals.sum())
            if abs(total - 1.0) > 1e-10:
                raise ValidationError(f"{self.kind} sums to {total!r}, not 1 within 1e-10")
        if self.kind == "char_dist" and vals.max() > 2.0 ** (-self.n) + 1e-12:
            raise ValidationError(
                f"char_dist entry {vals.max()!r} exceeds 2^-n for n={self.n}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis.

    Self-inverse up to a factor of the axis length.
    """
    a = np.array(values, copy=True)
    size = a.shape[-1]
    if size & (size - 1):
        raise ValidationError(f"transform length {size} is not a power of two")
    h = 1
    while h < size:
        a = a.reshape(a.shape[:-1] + (size // (2 * h), 2, h))
        top = a[..., 0, :] + a[..., 1, :]
        bot = a[..., 0, :] - a[..., 1, :]
        a = np.stack((top, bot), axis=-2).reshape(a.shape[:-3] + (size,))
        h *= 2
    return a


def _check_n(state: PureState, x: WeylLabel) -> None:
    if state.n != x.n:
        raise ValidationError(f"qubit-count mismatch: state n={state.n}, label n={x.n}")


def _phase(x1: int, x2: int) -> complex:
    return _PHASES[(x1 & x2).bit_count() & 3]


def apply_weyl(state: PureState, x: WeylLabel) -> PureState:
    """W_x |psi> with the Hermitian phase convention i^(x1.x2)."""
    _check_n(state, x)
    x1, x2 = x.x1, x.x2
    idx = np.arange(state.dim) ^ x1
    signs = 1 - 2 * (np.bitwise_count(idx & x2) & 1).astype(np.int64)
    return PureState(_phase(x1, x2) * signs * state.amplitudes[idx], state.n)


def weyl_matrix(x: WeylLabel) -> np.ndarray:
    """Dense 2^n x 2^n matrix of W_x (n <= 8)."""
    if x.n > TABLE_QUBIT_CAP:
        raise CapExceededError(f"dense Weyl matrices capped at n={TABLE_QUBIT_CAP}")
    dim = 1 << x.n
    cols = np.arange(dim)
    signs = 1 - 2 * (np.bitwise_count(cols & x.x2) & 1).astype(np.int64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    mat[cols ^ x.x1, cols] = _phase(x.x1, x.x2) * signs
    return mat


def weyl_expectation(state: PureState, x: WeylLabel) -> float:
    """<psi| W_x |psi>, checked to be real (W_x is Hermitian)."""
    _check_n(state, x)
    raw = np.vdot(state.amplitudes, apply_weyl(state, x).amplitudes)
    if abs(raw.imag) > _HERMITICITY_TOL:
        raise CertificateError(
            f"Weyl expectation has imaginary residue {raw.imag!r} (engine bug)"
        )
    return float(raw.real)


def weyl_expectation_table(state: PureState) -> np.ndarray:
    """All 4^n expectations <psi|W_x|psi> as a real vector indexed by packed bits.

    For each X-half a, the map x2 -> sum_z (-1)^(x2.z) psi*(z^a) psi(z) is one
    Walsh-Hadamard transform, so the whole table costs O(4^n n).
    """
    if state.n > TABLE_QUBIT_CAP:
        raise CapExceededError(
            f"full tables capped at n={TABLE_QUBIT_CAP}, got {state.n}"
        )
    dim = state.dim
    z = np.arange(dim)
    xored = z[:, None] ^ z[None, :]  # [x1, z]
    g = np.conj(state.amplitudes)[xored] * state.amplitudes[None, :]
    ghat = fwht(g)  # [x1, x2]
    x1 = z[:, None]
    x2 = z[None, :]
    phases = np.asarray(_PHASES)[np.bitwise_count(x1 & x2) & 3]
    table = phases * ghat
    worst = float(np.max(np.abs(table.imag)))
    if worst > _HERMITICITY_TOL:
        raise CertificateError(
            f"expectation table has imaginary residue {worst!r} (engine bug)"
        )
    return np.ascontiguousarray(table.real.T.reshape(-1))  # index = x1 | x2<<n


def char_distribution(state: PureState) -> DyadicTable:
    """Characteristic distribution p(x) = 2^-n <psi|W_x|psi>^2."""
    expect = weyl_expectation_table(state)
    return DyadicTable(expect**2 / (1 << state.n), state.n, "char_dist")


def weyl_distribution(p: DyadicTable) -> DyadicTable:
    """Weyl distribution q(x) = sum_y p(y) p(x+y), via the dyadic transform."""
    if p.kind != "char_dist":
        raise ValidationError(f"weyl_distribution expects a char_dist, got {p.kind}")
    spectrum = fwht(p.values)
    q = fwht(spectrum * spectrum) / p.values.size
    # Convolution roundoff can leave ~1e-17 negatives; clip those only.
    if q.min() < -1e-12:
        raise CertificateError(f"convolution negativity {q.min()!r} (engine bug)")
    return DyadicTable(np.maximum(q, 0.0), p.n, "weyl_dist")


def gamma_exact(state: PureState) -> float:
    """E_{x~q}[2^n p(x)], the acceptance-rate excess the sampler estimates."""
    p = char_distribution(state)
    q = weyl_distribution(p)
    return float(np.dot(q.values, (1 << state.n) * p.values))


def pad_with_zeros(state: PureState, extra: int) -> PureState:
    """|psi> tensor |0>^extra; stabilizer fidelity and gamma are unchanged."""
    if extra < 0:
        raise ValidationError(f"padding count must be >= 0, got {extra}")
    if extra == 0:
        return state
    pad = np.zeros(1 << extra, dtype=np.complex128)
    pad[0] = 1.0
    return PureState(np.kron(state.amplitudes, pad), state.n + extra)


# ---------------------------------------------------------------------------
# Test-state generation
# ---------------------------------------------------------------------------


def _apply_h(amps: np.ndarray, bit: int) -> None:
    view = amps.reshape(-1, 2, 1 << bit)
    a = view[:, 0, :].copy()
    b = view[:, 1, :].copy()
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    view[:, 0, :] = (a + b) * inv_sqrt2
    view[:, 1, :] = (a - b) * inv_sqrt2


def _apply_s(amps: np.ndarray, bit: int) -> None:
    view = amps.reshape(-1, 2, 1 << bit)
    view[:, 1, :] *= 1j


def _apply_cnot(amps: np.ndarray, control: int, target: int) -> None:
    idx = np.arange(amps.size)
    amps[:] = amps[idx ^ (((idx >> control) & 1) << target)]


def _random_clifford_state(n: int, rng: np.random.Generator) -> PureState:
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    for _ in range(20 * n * n):
        kind = rng.integers(3 if n > 1 else 2)
        if kind == 0:
            _apply_h(amps, int(rng.integers(n)))
        elif kind == 1:
            _apply_s(amps, int(rng.integers(n)))
        else:
            control, target = rng.choice(n, size=2, replace=False)
            _apply_cnot(amps, int(control), int(target))
    return PureState(amps, n)


def _haar_state(n: int, rng: np.random.Generator) -> PureState:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return PureState(amps / np.linalg.norm(amps), n)


_T_SINGLE = np.array([1.0, np.exp(1j * np.pi / 4)]) / np.sqrt(2.0)


def generate_state(
    kind: str,
    n: int,
    seed: int | None = None,
    noise: float = 0.0,
    rng: np.random.Generator | None = None,
) -> PureState:
    """Build a corpus state: stabilizer | haar | t_tensor | noisy_stabilizer.

    ``stabilizer`` applies a seeded random H/S/CNOT circuit of length 20 n^2
    to |0...0>.  ``noisy_stabilizer`` mixes a stabilizer state |S> with a
    Haar vector orthogonalized against it, so |<S|out>|^2 = 1 - noise exactly.
    """
    if rng is None:
        if seed is None and kind != "t_tensor":
            raise ValidationError(f"kind {kind!r} needs a seed")
        rng = np.random.default_rng(seed)
    if kind == "stabilizer":
        return _random_clifford_state(n, rng)
    if kind == "haar":
        return _haar_state(n, rng)
    if kind == "t_tensor":
        amps = np.array([1.0], dtype=np.complex128)
        for _ in range(n):
            amps = np.kron(amps, _T_SINGLE)
        return PureState(amps, n)
    if kind == "noisy_stabilizer":
        if not 0.0 <= noise <= 1.0:
            raise ValidationError(f"noise must be in [0,1], got {noise}")
        base = _random_clifford_state(n, rng)
        if noise == 0.0:
            return base
        while True:
            g = _haar_state(n, rng).amplitudes
            g = g - np.vdot(base.amplitudes, g) * base.amplitudes
            overlap_norm = np.linalg.norm(g)
            if overlap_norm > 1e-8:
                break
        g = g / overlap_norm
        out = np.sqrt(1.0 - noise) * base.amplitudes + np.sqrt(noise) * g
        return PureState(out / np.linalg.norm(out), n)
    raise ValidationError(f"unknown state kind {kind!r}")


# ---------------------------------------------------------------------------
# State file format: {"n": int, "re": [...], "im": [...]}
# ---------------------------------------------------------------------------


def state_to_json_dict(state: PureState) -> dict:
    return {
        "n": state.n,
        "re": state.amplitudes.real.tolist(),
        "im": state.amplitudes.imag.tolist(),
    }


def state_from_json_dict(payload: dict) -> PureState:
    try:
        n = int(payload["n"])
        re = np.asarray(payload["re"], dtype=np.float64)
        im = np.asarray(payload["im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad state payload: {exc}") from exc
    if re.shape != im.shape:
        raise ValidationError("re/im arrays differ in length")
    return PureState(re + 1j * im, n)
