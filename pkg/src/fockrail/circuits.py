"""Generating matrices for photonic circuits and their spatial/temporal composition.

A circuit over one time-bin maps ``internal-in (x) external-in`` to
``external-out (x) internal-out``. Its generator is a unitary whose rows are
ordered ``[internal-in, external-in]`` and whose columns are ordered
``[external-out, internal-out]``, so that it splits into blocks::

    U = [[U_ie, U_ii],
         [U_ee, U_ei]]

with ``M`` internal and ``N`` external modes. With this numbering both
compositions are plain products of padded generators, and the interchange law
holds as literal matrix equality without any reordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .functor import UNITARY_TOL, check_unitary, direct_sum, random_unitary, unitarity_deviation

_SNAP = 1e-15


def _snap(x: float) -> float:
    for target in (0.0, 1.0, -1.0):
        if abs(x - target) < _SNAP:
            return target
    return x


def _expi(phi: float) -> complex:
    # exact 0/+-1/+-i at multiples of pi/2, so mirrors and windows are exact permutations
    return complex(_snap(math.cos(phi)), _snap(math.sin(phi)))


@dataclass(frozen=True)
class BeamSplitterConfig:
    """Angles of a beam splitter with phase shifters.

    ``theta`` sets transmittance ``cos(theta)**2``; ``gamma`` is the global
    phase, ``rho`` the reflected-phase difference and ``tau`` the
    transmitted-phase difference.
    """

    theta: float
    gamma: float = 0.0
    rho: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        for name in ("theta", "gamma", "rho", "tau"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @property
    def transmittance(self) -> float:
        return math.cos(self.theta) ** 2

    @property
    def reflectance(self) -> float:
        return math.sin(self.theta) ** 2


MIRROR = BeamSplitterConfig(theta=math.pi / 2, gamma=math.pi / 2, rho=math.pi / 2)
WINDOW = BeamSplitterConfig(theta=0.0)
# solves e^{i(g-r)} sin t = e^{i(g-t)} cos t = e^{i(g+t)} cos t = e^{i(g+r)} sin t = 1/sqrt2
HADAMARD = BeamSplitterConfig(theta=math.pi / 4)


def beam_splitter(config: BeamSplitterConfig) -> np.ndarray:
    """``e^{ig} [[e^{-ir} sin t, e^{-it} cos t], [e^{it} cos t, -e^{ir} sin t]]``."""
    s, c = _snap(math.sin(config.theta)), _snap(math.cos(config.theta))
    g = _expi(config.gamma)
    return np.array([
        [g * _expi(-config.rho) * s, g * _expi(-config.tau) * c],
        [g * _expi(config.tau) * c, -g * _expi(config.rho) * s],
    ], dtype=complex)


def permutation(perm: Sequence[int]) -> np.ndarray:
    """0/1 matrix routing mode ``i`` to mode ``perm[i]``."""
    perm = list(perm)
    n = len(perm)
    if n == 0 or sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {perm!r}")
    out = np.zeros((n, n), dtype=complex)
    out[np.arange(n), perm] = 1
    return out


class CompatibilityError(ValueError):
    pass


@dataclass(frozen=True)
class CircuitOp:
    """A partitioned generator with ``internal`` internal modes.

    ``history`` records how the operation was composed.
    """

    generator: np.ndarray
    internal: int
    history: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        u = check_unitary(self.generator, UNITARY_TOL)
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "generator", u)
        if not 0 <= self.internal <= u.shape[0]:
            raise ValueError(f"internal count {self.internal} out of range for dimension {u.shape[0]}")

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    @property
    def external(self) -> int:
        return self.dim - self.internal

    @property
    def ie(self) -> np.ndarray:
        return self.generator[: self.internal, : self.external]

    @property
    def ii(self) -> np.ndarray:
        return self.generator[: self.internal, self.external:]

    @property
    def ee(self) -> np.ndarray:
        return self.generator[self.internal:, : self.external]

    @property
    def ei(self) -> np.ndarray:
        return self.generator[self.internal:, self.external:]

    def __eq__(self, other):
        if not isinstance(other, CircuitOp):
            return NotImplemented
        return (self.internal == other.internal and self.generator.shape == other.generator.shape
                and bool(np.array_equal(self.generator, other.generator)))

    __hash__ = None

    def __repr__(self) -> str:
        return f"CircuitOp(internal={self.internal}, external={self.external}, history={self.history!r})"


def single_loop(config: BeamSplitterConfig) -> CircuitOp:
    """One internal loop and one external line meeting at a beam splitter."""
    return CircuitOp(beam_splitter(config), internal=1, history=(f"loop{_fmt(config)}",))


def _fmt(config: BeamSplitterConfig) -> str:
    return f"({config.theta:.4g},{config.gamma:.4g},{config.rho:.4g},{config.tau:.4g})"


def identity_op(internal: int, external: int) -> CircuitOp:
    """Every mode passes straight through: internal stays internal, external stays external."""
    perm = [external + i for i in range(internal)] + list(range(external))
    return CircuitOp(permutation(perm), internal, history=(f"id({internal},{external})",))


def random_op(internal: int, external: int, rng: np.random.Generator) -> CircuitOp:
    return CircuitOp(random_unitary(internal + external, rng), internal, history=("random",))


def spatial_compose(c1: CircuitOp, c2: CircuitOp) -> CircuitOp:
    """Connect ``c1``'s external output to ``c2``'s external input.

    Generator ``(1_{M2} (+) U1)(U2 (+) 1_{M1})``; internal modes are ordered
    ``[c2's internal, c1's internal]``.
    """
    if c1.external != c2.external:
        raise CompatibilityError(
            f"spatial composition needs equal external systems, got {c1.external} and {c2.external}")
    m1, m2 = c1.internal, c2.internal
    first = direct_sum(np.eye(m2), c1.generator) if m2 else c1.generator
    second = direct_sum(c2.generator, np.eye(m1)) if m1 else c2.generator
    return CircuitOp(first @ second, m1 + m2, history=c1.history + ("spatial",) + c2.history)


def temporal_compose(c1: CircuitOp, c2: CircuitOp) -> CircuitOp:
    """Run ``c1`` then ``c2`` in the next time-bin, sharing the internal system.

    Generator ``(U1 (+) 1_{N2})(1_{N1} (+) U2)``; external modes are ordered
    ``[c1's external, c2's external]``.
    """
    if c1.internal != c2.internal:
        raise CompatibilityError(
            f"temporal composition needs equal internal systems, got {c1.internal} and {c2.internal}")
    n1, n2 = c1.external, c2.external
    first = direct_sum(c1.generator, np.eye(n2)) if n2 else c1.generator
    second = direct_sum(np.eye(n1), c2.generator) if n1 else c2.generator
    return CircuitOp(first @ second, c1.internal, history=c1.history + ("temporal",) + c2.history)


def temporal_chain(ops: Sequence[CircuitOp]) -> CircuitOp:
    if not ops:
        raise ValueError("empty chain")
    out = ops[0]
    for op in ops[1:]:
        out = temporal_compose(out, op)
    return out


def verify_interchange(c11: CircuitOp, c21: CircuitOp, c12: CircuitOp, c22: CircuitOp) -> float:
    """Largest entry of ``|(c11 S c21) T (c12 S c22) - (c11 T c12) S (c21 T c22)|``."""
    lhs = temporal_compose(spatial_compose(c11, c21), spatial_compose(c12, c22))
    rhs = spatial_compose(temporal_compose(c11, c12), temporal_compose(c21, c22))
    if lhs.internal != rhs.internal or lhs.dim != rhs.dim:
        raise CompatibilityError("the two sides of the interchange law have different shapes")
    return float(np.max(np.abs(lhs.generator - rhs.generator)))


def embed_loop(u2: np.ndarray, internal: int, target: int, history: str = "loop") -> CircuitOp:
    """A one-external-mode circuit coupling internal mode ``target`` to the line via ``u2``.

    The other internal modes pass through untouched.
    """
    if not 0 <= target < internal:
        raise IndexError(f"target {target} out of range for {internal} internal modes")
    dim = internal + 1
    g = np.zeros((dim, dim), dtype=complex)
    ext_in, ext_out = internal, 0
    loop_in, loop_out = target, 1 + target
    # rows [internal..., external], columns [external, internal...]
    g[loop_in, ext_out], g[loop_in, loop_out] = u2[0, 0], u2[0, 1]
    g[ext_in, ext_out], g[ext_in, loop_out] = u2[1, 0], u2[1, 1]
    for i in range(internal):
        if i != target:
            g[i, 1 + i] = 1
    return CircuitOp(g, internal, history=(history,))


def internal_gate(u, history: str = "gate") -> CircuitOp:
    """A circuit with no external modes acting on its internal system by ``u``."""
    u = np.asarray(u, dtype=complex)
    return CircuitOp(u, u.shape[0], history=(history,))


def extend_internal(op: CircuitOp, extra: int) -> CircuitOp:
    """Append ``extra`` passive internal modes after the existing ones."""
    if extra == 0:
        return op
    m, n = op.internal, op.external
    dim = op.dim + extra
    g = np.zeros((dim, dim), dtype=complex)
    # old rows: internal 0..m-1, external m..m+n-1 ; new rows add internal m..m+extra-1 before externals
    row_map = list(range(m)) + list(range(m + extra, m + extra + n))
    col_map = list(range(n)) + list(range(n, n + m))
    for i, r in enumerate(row_map):
        for j, c in enumerate(col_map):
            g[r, c] = op.generator[i, j]
    for k in range(extra):
        g[m + k, n + m + k] = 1
    return CircuitOp(g, m + extra, history=op.history + (f"extend+{extra}",))


def closure_deviation(op: CircuitOp) -> float:
    return unitarity_deviation(op.generator)


__all__ = [
    "BeamSplitterConfig", "CircuitOp", "CompatibilityError", "HADAMARD", "MIRROR", "WINDOW",
    "beam_splitter", "closure_deviation", "embed_loop", "extend_internal", "identity_op",
    "internal_gate", "permutation", "random_op", "single_loop", "spatial_compose",
    "temporal_chain", "temporal_compose", "verify_interchange",
]
