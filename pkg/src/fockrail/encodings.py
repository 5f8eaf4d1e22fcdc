"""Qubit and qudit models carried by photonic states.

Two models are provided. The dual-rail qubit puts one photon on one of two
modes. The parity qudit reads a single mode's photon count modulo ``d`` and
is seeded by coherent light.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.stats import poisson

from .circuits import BeamSplitterConfig
from .fock import FockVector, OccupationVector
from .functor import matrix_element, random_unitary
from .single_loop import loop_amplitude

TAIL_TOL = 1e-9

# extended precision keeps the d-term sum accurate to ~1e-13 absolute at |theta| = 8
_PI = np.arctan(np.longdouble(1)) * 4


def exph(b: int, d: int, theta: complex) -> complex:
    """Sum of ``theta**n / n!`` over ``n = b mod d``, from the ``d``-term root-of-unity formula."""
    if d < 1 or not 0 <= b < d:
        raise ValueError(f"need 0 <= b < d, got b={b}, d={d}")
    c = np.arange(d).astype(np.longdouble)
    ang = 2 * _PI * c / d
    roots = np.cos(ang) + 1j * np.sin(ang)
    shift = 2 * _PI * ((b * np.arange(d)) % d).astype(np.longdouble) / d
    terms = np.exp(roots * np.clongdouble(theta) - 1j * shift)
    out = complex(np.sum(terms) / d)
    if complex(theta).imag == 0:
        # real argument, real series
        out = complex(out.real, 0.0)
    return out


def exph_series(b: int, d: int, theta: complex, terms: int = 200) -> complex:
    """The defining power series, truncated after ``terms`` terms."""
    if d < 1 or not 0 <= b < d:
        raise ValueError(f"need 0 <= b < d, got b={b}, d={d}")
    theta = complex(theta)
    term = 1 + 0j
    re, im = [], []
    for n in range(terms):
        if n:
            term *= theta / n
        if n % d == b:
            re.append(term.real)
            im.append(term.imag)
    return complex(math.fsum(re), math.fsum(im))


def _coherent_amplitudes(alpha: complex, truncation: int) -> np.ndarray:
    # alpha^n / sqrt(n!) by recurrence
    out = np.empty(truncation + 1, dtype=complex)
    out[0] = 1
    for n in range(1, truncation + 1):
        out[n] = out[n - 1] * alpha / math.sqrt(n)
    return out


def default_truncation(alpha: complex, tail_tol: float = TAIL_TOL) -> int:
    """Smallest cutoff whose Poisson tail is below ``tail_tol``."""
    mean = abs(alpha) ** 2
    t = 0
    while poisson.sf(t, mean) >= tail_tol:
        t += 1
    return t


def coherent_state(alpha: complex, truncation: int | None = None, tail_tol: float = TAIL_TOL) -> FockVector:
    """``e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) <n|`` truncated; the tail is recorded in ``lost``."""
    alpha = complex(alpha)
    if truncation is None:
        truncation = default_truncation(alpha, tail_tol)
    tail = float(poisson.sf(truncation, abs(alpha) ** 2))
    if tail > tail_tol:
        raise ValueError(f"truncation {truncation} leaves tail mass {tail:.3g} > {tail_tol:g}")
    amps = _coherent_amplitudes(alpha, truncation) * math.exp(-abs(alpha) ** 2 / 2)
    return FockVector(1, truncation, {(n,): a for n, a in enumerate(amps) if a != 0}, lost=tail)


# ---------------------------------------------------------------------------
# dual rail
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualRailEncoding:
    """``|0> -> |01>``, ``|1> -> |10>``."""

    arity: int = field(default=2, init=False)

    @staticmethod
    def occupation(b: int) -> OccupationVector:
        if b not in (0, 1):
            raise ValueError(f"qubit value must be 0 or 1, got {b}")
        return OccupationVector((1, 0) if b else (0, 1))

    def represent(self, b: int) -> FockVector:
        return FockVector.basis(self.occupation(b))

    def interpret(self, occ) -> tuple[int, complex] | None:
        occ = tuple(occ)
        if occ == (0, 1):
            return 0, 1 + 0j
        if occ == (1, 0):
            return 1, 1 + 0j
        return None

    def implemented(self, phys) -> np.ndarray:
        """Theory-space matrix of a two-mode generator acting on the code space."""
        u = np.asarray(phys, dtype=complex)
        return np.array([[matrix_element(u, self.occupation(a), self.occupation(b)) for b in (0, 1)]
                         for a in (0, 1)])


# ---------------------------------------------------------------------------
# parity qudit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParityQuditEncoding:
    """Qudit of arity ``d`` read as photon count modulo ``d``.

    By default the amplitudes come from a coherent state of amplitude
    ``alpha``: ``alpha_n = alpha^n / sqrt(n! exph_b(|alpha|^2))`` with
    ``b = n mod d``. An explicit ``sequence`` replaces them; it is normalized
    per residue class.
    """

    d: int
    alpha: complex = 1.0
    truncation: int | None = None
    tail_tol: float = TAIL_TOL
    sequence: tuple | None = None
    amplitudes: np.ndarray = field(init=False, repr=False, compare=False)
    tails: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("arity must be >= 2")
        alpha = complex(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.sequence is None:
            if alpha == 0:
                raise ValueError("alpha must be nonzero")
            r = abs(alpha)
            trunc = self.truncation
            if trunc is None:
                trunc = max(math.ceil(r * r + 10 * r + 20), self.d - 1)
            amps, tails = self._coherent(alpha, trunc)
        else:
            amps = np.asarray(self.sequence, dtype=complex)
            trunc = len(amps) - 1 if self.truncation is None else self.truncation
            if len(amps) != trunc + 1:
                raise ValueError(f"sequence has {len(amps)} entries, truncation {trunc} needs {trunc + 1}")
            amps = amps.copy()
            for b in range(self.d):
                norm = math.sqrt(math.fsum(abs(a) ** 2 for a in amps[b::self.d]))
                if norm == 0:
                    raise ValueError(f"residue class {b} has no amplitude")
                amps[b::self.d] /= norm
            tails = np.zeros(self.d)
        if trunc < self.d - 1:
            raise ValueError(f"truncation {trunc} does not reach every residue class mod {self.d}")
        worst = float(np.max(tails))
        if worst > self.tail_tol:
            raise ValueError(f"truncation {trunc} leaves tail mass {worst:.3g} > {self.tail_tol:g}")
        amps.setflags(write=False)
        object.__setattr__(self, "truncation", trunc)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "tails", tails)

    def _coherent(self, alpha: complex, trunc: int) -> tuple[np.ndarray, np.ndarray]:
        x = abs(alpha) ** 2
        weights = [exph(b, self.d, x).real for b in range(self.d)]
        raw = _coherent_amplitudes(alpha, trunc)
        amps = np.array([raw[n] / math.sqrt(weights[n % self.d]) for n in range(trunc + 1)])
        tails = np.zeros(self.d)
        # tail terms beyond the cutoff, summed until they stop mattering
        term = abs(raw[trunc]) ** 2
        n = trunc
        while True:
            n += 1
            term *= x / n
            tails[n % self.d] += term / weights[n % self.d]
            if n > x and term < 1e-20:
                break
        return amps, tails

    @property
    def arity(self) -> int:
        return self.d

    def represent(self, b: int) -> FockVector:
        if not 0 <= b < self.d:
            raise ValueError(f"dit must be in 0..{self.d - 1}, got {b}")
        amps = {(n,): self.amplitudes[n] for n in range(b, self.truncation + 1, self.d)
                if self.amplitudes[n] != 0}
        return FockVector(1, self.truncation, amps, lost=float(self.tails[b]))

    def interpret(self, occ) -> tuple[int, complex]:
        (n,) = tuple(occ)
        if n > self.truncation:
            raise ValueError(f"photon count {n} beyond truncation {self.truncation}")
        return n % self.d, complex(np.conj(self.amplitudes[n]))

    def interpret_represent(self) -> np.ndarray:
        """``interpret o represent`` as a ``d x d`` matrix."""
        out = np.zeros((self.d, self.d), dtype=complex)
        for b in range(self.d):
            for (n,), a in self.represent(b).items():
                dit, w = self.interpret((n,))
                out[b, dit] += a * w
        return out

    def implemented(self, phys) -> np.ndarray:
        """``<b-| rep [U] int |b+>`` for every pair of dits."""
        phys = physical_matrix(phys, self.truncation)
        a = np.asarray(self.amplitudes)
        out = np.zeros((self.d, self.d), dtype=complex)
        for bm in range(self.d):
            for bp in range(self.d):
                out[bm, bp] = a[bm::self.d] @ phys[bm::self.d, bp::self.d] @ np.conj(a[bp::self.d])
        return out


def mixing_weights(enc: ParityQuditEncoding) -> np.ndarray:
    """``p[b] = sqrt(exph_b(|alpha|^2) / e^{|alpha|^2})``."""
    x = abs(enc.alpha) ** 2
    return np.array([math.sqrt(exph(b, enc.d, x).real / math.exp(x)) for b in range(enc.d)])


def physical_matrix(phys, truncation: int) -> np.ndarray:
    """A single-mode physical map as a dense matrix over photon counts ``0..truncation``."""
    if callable(phys):
        return np.array([[phys(i, j) for j in range(truncation + 1)] for i in range(truncation + 1)],
                        dtype=complex)
    phys = np.asarray(phys, dtype=complex)
    if phys.shape != (truncation + 1, truncation + 1):
        raise ValueError(f"physical map has shape {phys.shape}, truncation {truncation} needs "
                         f"{(truncation + 1, truncation + 1)}")
    return phys


def loop_map(config: BeamSplitterConfig, n_minus: int, n_plus: int, truncation: int) -> np.ndarray:
    """The post-selected single-loop block on the loop's photon counts, cut at ``truncation``."""
    out = np.zeros((truncation + 1, truncation + 1), dtype=complex)
    shift = n_minus - n_plus
    for m in range(truncation + 1):
        if 0 <= m + shift <= truncation:
            out[m, m + shift] = loop_amplitude(config, m, n_minus, n_plus)
    return out


class Bounds(NamedTuple):
    mu: float
    epsilon: float

    @property
    def lower(self) -> float:
        return self.mu - self.epsilon

    @property
    def upper(self) -> float:
        return self.mu + self.epsilon


def implement_bounds(enc: ParityQuditEncoding, phys, b_minus: int, b_plus: int) -> Bounds:
    """Bracket ``|<b-| rep [U] int |b+>|^2`` by sums over physical matrix elements."""
    if not (0 <= b_minus < enc.d and 0 <= b_plus < enc.d):
        raise ValueError("dits out of range")
    phys = physical_matrix(phys, enc.truncation)
    a = np.abs(np.asarray(enc.amplitudes))
    rows, cols = a[b_minus::enc.d], a[b_plus::enc.d]
    block = np.abs(phys[b_minus::enc.d, b_plus::enc.d])
    mu = math.fsum((np.outer(rows ** 2, cols ** 2) * block ** 2).ravel())
    top = math.fsum((np.outer(rows, cols) * block).ravel()) ** 2
    return Bounds(mu, max(top - mu, 0.0))


# ---------------------------------------------------------------------------
# floor and cap
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FloorCapEstimate:
    """Sampled floor and cap; the sample minimum can only overestimate ``f`` and the maximum underestimate ``c``."""

    floor: float
    cap: float
    equivalent: bool
    pairs: int
    heuristic: bool = True


def _haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_unitary(d, rng)[0]


def floor_cap_estimate(enc, u_theory, u_phys, samples: int = 200, seed: int = 0,
                       atol: float = 1e-14) -> FloorCapEstimate:
    """Extremes of ``|<x|U|y>|^2 / |<x| rep [U] int |y>|^2`` over basis pairs and random states."""
    u_theory = np.asarray(u_theory, dtype=complex)
    implemented = enc.implemented(u_phys)
    d = enc.arity
    if u_theory.shape != (d, d):
        raise ValueError(f"theory operation must be {d}x{d}")
    rng = np.random.default_rng(seed)
    basis = np.eye(d)
    pairs = [(basis[i], basis[j]) for i in range(d) for j in range(d)]
    pairs += [(_haar_state(d, rng), _haar_state(d, rng)) for _ in range(samples)]
    ratios = []
    violated = False
    for x, y in pairs:
        num = abs(x @ u_theory @ y) ** 2
        den = abs(x @ implemented @ y) ** 2
        if den <= atol:
            if num > atol:
                violated = True
            continue
        ratios.append(num / den)
    if not ratios:
        return FloorCapEstimate(math.nan, math.nan, not violated, len(pairs))
    f, c = float(min(ratios)), float(max(ratios))
    if violated:
        c = math.inf
    return FloorCapEstimate(f, c, bool((not violated) and 0 < f <= c < math.inf), len(pairs))


def theory_element(u_theory, x, y) -> complex:
    return complex(np.asarray(x) @ np.asarray(u_theory) @ np.asarray(y))


__all__ = [
    "Bounds", "DualRailEncoding", "FloorCapEstimate", "ParityQuditEncoding", "coherent_state",
    "default_truncation", "exph", "exph_series", "floor_cap_estimate", "implement_bounds",
    "loop_map", "mixing_weights", "physical_matrix",
]
