"""Multimode bosonic Fock states.

Basis states are occupation vectors (photon count per mode). States are sparse
collections of complex amplitudes keyed by occupation vector and carry a hard
cap on total photon number. Ladder operators act on basis labels the same way
they act on bras: ``<n| a_M = sqrt(n_M + 1) <n + e_M|``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

TOL = 1e-9


class OccupationVector(tuple):
    """Photon counts per mode; a plain tuple of nonnegative ints.

    Zero modes are allowed, for circuits without an internal or external system.
    """

    def __new__(cls, counts: Iterable[int]) -> "OccupationVector":
        counts = tuple(counts)
        for c in counts:
            if isinstance(c, bool) or int(c) != c or c < 0:
                raise ValueError(f"occupation counts must be nonnegative integers, got {counts!r}")
        return super().__new__(cls, (int(c) for c in counts))

    @property
    def modes(self) -> int:
        return len(self)

    def total(self) -> int:
        return sum(self)

    def __add__(self, other):  # concatenation keeps the type
        return OccupationVector(tuple(self) + tuple(other))

    def __repr__(self) -> str:
        return f"OccupationVector({tuple(self)!r})"


def _compositions(modes: int, photons: int) -> Iterator[tuple[int, ...]]:
    # lexicographically decreasing
    if modes == 1:
        yield (photons,)
        return
    for first in range(photons, -1, -1):
        for rest in _compositions(modes - 1, photons - first):
            yield (first,) + rest


@dataclass(frozen=True)
class FockSector:
    modes: int
    photons: int
    basis: tuple[OccupationVector, ...]
    _index: Mapping[tuple[int, ...], int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.basis)

    def index(self, occ: Iterable[int]) -> int:
        return self._index[tuple(occ)]

    @functools.cached_property
    def array(self) -> np.ndarray:
        """Basis as an ``(size, modes)`` integer array."""
        return np.array(self.basis, dtype=np.int64).reshape(len(self.basis), self.modes)


@functools.lru_cache(maxsize=512)
def enumerate_sector(modes: int, photons: int) -> FockSector:
    """All occupation vectors of ``modes`` modes holding ``photons`` photons.

    The order is lexicographically decreasing, so ``(2, 2)`` gives
    ``(2,0), (1,1), (0,2)``.
    """
    if modes < 0:
        raise ValueError("modes must be >= 0")
    if photons < 0:
        raise ValueError("photons must be >= 0")
    if modes == 0:
        basis = (OccupationVector(()),) if photons == 0 else ()
    else:
        basis = tuple(OccupationVector(c) for c in _compositions(modes, photons))
    index = {tuple(b): i for i, b in enumerate(basis)}
    return FockSector(modes, photons, basis, MappingProxyType(index))


def sector_size(modes: int, photons: int) -> int:
    if modes == 0:
        return int(photons == 0)
    return math.comb(photons + modes - 1, modes - 1)


@dataclass(frozen=True)
class FockVector:
    """Sparse state on ``modes`` modes with at most ``truncation`` photons.

    ``lost`` accumulates the squared norm of components dropped because they
    would have exceeded the truncation.
    """

    modes: int
    truncation: int
    amplitudes: Mapping[OccupationVector, complex]
    lost: float = 0.0

    def __post_init__(self):
        amps = {}
        for occ, amp in dict(self.amplitudes).items():
            occ = OccupationVector(occ)
            if occ.modes != self.modes:
                raise ValueError(f"{occ!r} does not have {self.modes} modes")
            if occ.total() > self.truncation:
                raise ValueError(f"{occ!r} exceeds truncation {self.truncation}")
            amps[occ] = complex(amp)
        object.__setattr__(self, "amplitudes", MappingProxyType(amps))

    @classmethod
    def basis(cls, occ: Iterable[int], truncation: int | None = None) -> "FockVector":
        occ = OccupationVector(occ)
        return cls(occ.modes, occ.total() if truncation is None else truncation, {occ: 1.0})

    @classmethod
    def vacuum(cls, modes: int, truncation: int = 0) -> "FockVector":
        return cls.basis((0,) * modes, truncation)

    @classmethod
    def zero(cls, modes: int, truncation: int = 0) -> "FockVector":
        return cls(modes, truncation, {})

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __getitem__(self, occ) -> complex:
        return self.amplitudes.get(tuple(occ), 0j)

    def items(self):
        return self.amplitudes.items()

    def norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def is_normalized(self, tol: float = TOL) -> bool:
        return abs(self.norm2() - 1.0) <= tol

    def normalized(self) -> "FockVector":
        n = math.sqrt(self.norm2())
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return self.scaled(1 / n)

    def scaled(self, factor: complex) -> "FockVector":
        return FockVector(self.modes, self.truncation,
                          {k: v * factor for k, v in self.amplitudes.items()}, self.lost)

    def inner(self, other: "FockVector") -> complex:
        """``sum conj(self[n]) * other[n]``."""
        return sum((a.conjugate() * other[k] for k, a in self.amplitudes.items()), 0j)

    def __add__(self, other: "FockVector") -> "FockVector":
        if other.modes != self.modes:
            raise ValueError("mode count mismatch")
        amps = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            amps[k] = amps.get(k, 0j) + v
        return FockVector(self.modes, max(self.truncation, other.truncation), amps,
                          self.lost + other.lost)

    def sectors(self) -> list[int]:
        return sorted({k.total() for k in self.amplitudes})

    def sector_weight(self, photons: int) -> float:
        return math.fsum(abs(v) ** 2 for k, v in self.amplitudes.items() if k.total() == photons)

    def sector_vector(self, photons: int) -> np.ndarray:
        """Dense amplitudes over ``enumerate_sector(modes, photons)``."""
        sector = enumerate_sector(self.modes, photons)
        vec = np.zeros(len(sector), dtype=complex)
        for k, v in self.amplitudes.items():
            if k.total() == photons:
                vec[sector.index(k)] = v
        return vec

    def tensor(self, other: "FockVector", truncation: int | None = None) -> "FockVector":
        """Product state, modes of ``self`` first.

        Components above ``truncation`` are dropped and their weight is added
        to ``lost``.
        """
        cap = self.truncation + other.truncation if truncation is None else truncation
        amps: dict[OccupationVector, complex] = {}
        dropped = 0.0
        for k1, v1 in self.amplitudes.items():
            for k2, v2 in other.amplitudes.items():
                v = v1 * v2
                if k1.total() + k2.total() > cap:
                    dropped += abs(v) ** 2
                else:
                    amps[k1 + k2] = v
        kept1 = 1.0 - self.lost
        kept2 = 1.0 - other.lost
        lost = 1.0 - kept1 * kept2 + dropped
        return FockVector(self.modes + other.modes, cap, amps, lost)

    def chop(self, atol: float = 0.0) -> "FockVector":
        return FockVector(self.modes, self.truncation,
                          {k: v for k, v in self.amplitudes.items() if abs(v) > atol}, self.lost)

    def __repr__(self) -> str:
        body = ", ".join(f"{tuple(k)}: {v:.6g}" for k, v in self.amplitudes.items())
        return f"FockVector(modes={self.modes}, truncation={self.truncation}, {{{body}}})"


def _check_mode(state: FockVector, mode: int) -> None:
    if not 0 <= mode < state.modes:
        raise IndexError(f"mode {mode} out of range for {state.modes} modes")


def create(state: FockVector, mode: int) -> FockVector:
    """Raise ``mode`` by one photon in every component.

    Components pushed past the truncation are dropped; their weight (after the
    ladder factor) is added to ``lost`` on the result.
    """
    _check_mode(state, mode)
    amps = {}
    lost = state.lost
    for occ, amp in state.amplitudes.items():
        factor = math.sqrt(occ[mode] + 1)
        if occ.total() + 1 > state.truncation:
            lost += abs(factor * amp) ** 2
            continue
        raised = list(occ)
        raised[mode] += 1
        amps[OccupationVector(raised)] = factor * amp
    return FockVector(state.modes, state.truncation, amps, lost)


def annihilate(state: FockVector, mode: int) -> FockVector:
    _check_mode(state, mode)
    amps = {}
    for occ, amp in state.amplitudes.items():
        n = occ[mode]
        if n == 0:
            continue
        lowered = list(occ)
        lowered[mode] -= 1
        amps[OccupationVector(lowered)] = math.sqrt(n) * amp
    return FockVector(state.modes, state.truncation, amps, state.lost)


def number_expectation(state: FockVector, mode: int) -> float:
    _check_mode(state, mode)
    if not state.is_normalized():
        raise ValueError(f"state is not normalized (norm^2 = {state.norm2():.12g})")
    return math.fsum(occ[mode] * abs(amp) ** 2 for occ, amp in state.amplitudes.items())
