"""Preparation, projective measurement and feed-forward on circuit operations.

Preparing the external input in ``<n-|`` and measuring the external output in
``<n+|`` leaves the internal system transformed by the block
``<n-|C|n+>``. The outcome ``n+`` occurs with probability
``||<m|<n-|C|n+>||^2`` for a normalized internal state ``<m|``.

Sampling uses a counter-based Philox generator. Shots are split into chunks of
``CHUNK`` consecutive shots and chunk ``j`` draws from
``Philox(SeedSequence(seed, spawn_key=(j,)))``, so results do not depend on how
many threads run the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from .circuits import CircuitOp, CompatibilityError
from .fock import FockVector, OccupationVector, enumerate_sector
from .functor import basis_row

OVERFLOW = "OVERFLOW"
CHUNK = 8192

Prep = Union[OccupationVector, tuple, FockVector]


def outcome_key(outcome) -> tuple:
    """Sort key: fewer photons first, then lexicographically decreasing."""
    return (sum(outcome), tuple(-x for x in outcome))


def _as_prep(prep: Prep | None, modes: int) -> FockVector:
    if prep is None:
        prep = (0,) * modes
    if isinstance(prep, FockVector):
        vec = prep
    else:
        vec = FockVector.basis(prep)
    if vec.modes != modes:
        raise ValueError(f"preparation has {vec.modes} modes, circuit has {modes} external inputs")
    return vec


def _as_internal(state: FockVector | None, modes: int) -> FockVector:
    if state is None:
        state = FockVector.vacuum(modes)
    if state.modes != modes:
        raise ValueError(f"internal state has {state.modes} modes, circuit has {modes} internal modes")
    return state


def branch(c: CircuitOp, internal_in: FockVector | None, prep: Prep | None,
           truncation: int | None = None) -> tuple[dict[OccupationVector, FockVector], float]:
    """Run ``c`` once and split the result by external outcome.

    Returns the unnormalized internal state left behind by every outcome and
    the squared norm dropped because the joint input exceeded ``truncation``.
    """
    internal = _as_internal(internal_in, c.internal)
    prep_vec = _as_prep(prep, c.external)
    cap = internal.truncation + prep_vec.truncation if truncation is None else truncation
    n = c.external
    u = c.generator
    cache: dict = {}
    acc: dict[int, np.ndarray] = {}
    dropped = 0.0
    for m, a in internal.items():
        for p, b in prep_vec.items():
            amp = a * b
            if amp == 0:
                continue
            if m.total() + p.total() > cap:
                dropped += abs(amp) ** 2
                continue
            sector, row = basis_row(u, m + p, cache)
            if sector.photons in acc:
                acc[sector.photons] += amp * row
            else:
                acc[sector.photons] = amp * row
    grouped: dict[OccupationVector, dict] = {}
    for photons, vec in acc.items():
        basis = enumerate_sector(c.dim, photons).basis
        for i in np.flatnonzero(vec):
            out = basis[i]
            grouped.setdefault(OccupationVector(out[:n]), {})[OccupationVector(out[n:])] = vec[i]
    branches = {meas: FockVector(c.internal, cap, amps) for meas, amps in grouped.items()}
    return branches, dropped


@dataclass(frozen=True)
class ProjectedBlock:
    """The internal map ``<m| -> <m|<prep|C|meas>``."""

    op: CircuitOp
    prep: OccupationVector
    meas: OccupationVector

    @property
    def shift(self) -> int:
        """Change in internal photon number."""
        return self.prep.total() - self.meas.total()

    def apply(self, state: FockVector) -> FockVector:
        if state.modes != self.op.internal:
            raise ValueError(f"internal state has {state.modes} modes, expected {self.op.internal}")
        u, n = self.op.generator, self.op.external
        cache: dict = {}
        amps: dict = {}
        for m, a in state.items():
            if a == 0:
                continue
            sector, row = basis_row(u, m + self.prep, cache)
            for i in np.flatnonzero(row):
                out = sector.basis[i]
                if out[:n] == self.meas:
                    key = OccupationVector(out[n:])
                    amps[key] = amps.get(key, 0j) + a * row[i]
        trunc = max(state.truncation + max(self.shift, 0), 0)
        return FockVector(self.op.internal, trunc, amps)

    def matrix(self, photons: int) -> np.ndarray:
        """Dense block from the internal sector with ``photons`` photons to the one with ``photons + shift``."""
        src = enumerate_sector(self.op.internal, photons)
        out_photons = photons + self.shift
        if out_photons < 0:
            return np.zeros((len(src), 0), dtype=complex)
        dst = enumerate_sector(self.op.internal, out_photons)
        mat = np.zeros((len(src), len(dst)), dtype=complex)
        for i, m in enumerate(src.basis):
            image = self.apply(FockVector.basis(m))
            for k, v in image.items():
                mat[i, dst.index(k)] = v
        return mat


def project_block(c: CircuitOp, prep, meas) -> ProjectedBlock:
    prep, meas = OccupationVector(prep), OccupationVector(meas)
    if prep.modes != c.external or meas.modes != c.external:
        raise ValueError(
            f"preparation/measurement need {c.external} external modes, got {prep.modes} and {meas.modes}")
    return ProjectedBlock(c, prep, meas)


@dataclass(frozen=True)
class BlockChain:
    """Blocks applied in sequence, first block first."""

    blocks: tuple[ProjectedBlock, ...]

    def apply(self, state: FockVector) -> FockVector:
        for block in self.blocks:
            state = block.apply(state)
        return state


@dataclass(frozen=True)
class OutcomeDistribution:
    entries: Mapping[tuple, float]
    residual: float = 0.0

    def __post_init__(self):
        ordered = {tuple(k): float(self.entries[k]) for k in sorted(self.entries, key=outcome_key)}
        object.__setattr__(self, "entries", ordered)

    def total(self) -> float:
        return math.fsum(self.entries.values())

    def probability(self, outcome) -> float:
        return self.entries.get(tuple(outcome), 0.0)

    def marginal(self, positions: Iterable[int]) -> "OutcomeDistribution":
        positions = list(positions)
        out: dict[tuple, float] = {}
        for k, p in self.entries.items():
            key = tuple(k[i] for i in positions)
            out[key] = out.get(key, 0.0) + p
        return OutcomeDistribution(out, self.residual)

    def tv_distance(self, histogram: Mapping) -> float:
        """Total-variation distance to the empirical distribution of ``histogram``."""
        shots = sum(histogram.values())
        keys = set(self.entries) | {k for k in histogram if k != OVERFLOW}
        tv = sum(abs(self.entries.get(k, 0.0) - histogram.get(k, 0) / shots) for k in keys)
        tv += abs(self.residual - histogram.get(OVERFLOW, 0) / shots)
        return 0.5 * tv


def distribution_from_branches(branches: Mapping, dropped: float, prep_lost: float = 0.0) -> OutcomeDistribution:
    probs = {meas: state.norm2() for meas, state in branches.items()}
    return OutcomeDistribution(probs, residual=dropped + prep_lost)


def outcome_distribution(c: CircuitOp, internal_in: FockVector | None, prep: Prep | None,
                         truncation: int | None = None) -> OutcomeDistribution:
    """Exact distribution of external outcomes.

    For number-state preparations photon conservation makes the outcome set
    finite and the residual is zero. A truncated preparation (a coherent
    state) contributes its tail mass, plus anything dropped by ``truncation``,
    to the residual.
    """
    internal = _as_internal(internal_in, c.internal)
    if not internal.is_normalized():
        raise ValueError(f"internal state is not normalized (norm^2 = {internal.norm2():.12g})")
    prep_vec = _as_prep(prep, c.external)
    branches, dropped = branch(c, internal, prep_vec, truncation)
    return distribution_from_branches(branches, dropped, prep_vec.lost)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FOCKRAIL_THREADS", "1")))
    except ValueError:
        return 1


def _chunk_counts(cdf: np.ndarray, seed: int, chunk: int, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.bincount(idx, minlength=len(cdf))


def sample_distribution(dist: OutcomeDistribution, shots: int, seed: int,
                        threads: int | None = None) -> dict:
    """Draw ``shots`` i.i.d. outcomes; the residual mass is the ``OVERFLOW`` bucket."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    labels = list(dist.entries) + [OVERFLOW]
    probs = np.array(list(dist.entries.values()) + [max(dist.residual, 0.0)], dtype=float)
    probs = np.clip(probs, 0.0, None)
    if probs.sum() <= 0:
        raise ValueError("distribution has no mass")
    cdf = np.cumsum(probs / probs.sum())
    cdf[np.flatnonzero(probs)[-1]:] = 1.0
    sizes = [min(CHUNK, shots - start) for start in range(0, shots, CHUNK)]
    workers = threads or _threads()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda js: _chunk_counts(cdf, seed, js[0], js[1]), enumerate(sizes)))
    else:
        parts = [_chunk_counts(cdf, seed, j, s) for j, s in enumerate(sizes)]
    counts = np.sum(parts, axis=0)
    return {label: int(n) for label, n in zip(labels, counts)}


def sample(c: CircuitOp, internal_in: FockVector | None, prep: Prep | None, shots: int, seed: int,
           truncation: int | None = None) -> dict:
    return sample_distribution(outcome_distribution(c, internal_in, prep, truncation), shots, seed)


# ---------------------------------------------------------------------------
# feed-forward
# ---------------------------------------------------------------------------

def _outcomes_up_to(modes: int, photons: int) -> list[OccupationVector]:
    if modes == 0:
        return [OccupationVector(())]
    return [b for k in range(photons + 1) for b in enumerate_sector(modes, k).basis]


@dataclass
class FeedForward:
    """Two time-bins where the second circuit is chosen from the first outcome."""

    first: CircuitOp
    chooser: Callable[[OccupationVector], CircuitOp]
    _chosen: dict = field(default_factory=dict, repr=False)

    def second(self, outcome) -> CircuitOp:
        outcome = OccupationVector(outcome)
        if outcome not in self._chosen:
            op = self.chooser(outcome)
            if not isinstance(op, CircuitOp):
                raise TypeError(f"chooser returned {type(op).__name__} for outcome {tuple(outcome)}")
            if op.internal != self.first.internal:
                raise CompatibilityError(
                    f"chooser output for {tuple(outcome)} has {op.internal} internal modes, "
                    f"first stage has {self.first.internal}")
            self._chosen[outcome] = op
        return self._chosen[outcome]

    def validate(self, max_photons: int) -> None:
        """Evaluate the chooser on every first-stage outcome with at most ``max_photons`` photons."""
        for outcome in _outcomes_up_to(self.first.external, max_photons):
            self.second(outcome)

    def block(self, prep1, meas1, prep2, meas2) -> BlockChain:
        """``<n1-|C1|n1+><n2-|C2[n1+]|n2+>`` as an internal map."""
        return BlockChain((project_block(self.first, prep1, meas1),
                           project_block(self.second(meas1), prep2, meas2)))

    def branches(self, internal_in: FockVector | None, prep1, prep2,
                 truncation: int | None = None) -> tuple[dict, float]:
        internal = _as_internal(internal_in, self.first.internal)
        p1 = _as_prep(prep1, self.first.external)
        self.validate(internal.truncation + p1.truncation)
        stage1, dropped = branch(self.first, internal, p1, truncation)
        out: dict[OccupationVector, FockVector] = {}
        for meas1, state in stage1.items():
            op2 = self.second(meas1)
            stage2, d2 = branch(op2, state, prep2, truncation)
            dropped += d2
            for meas2, final in stage2.items():
                out[meas1 + meas2] = final
        return out, dropped

    def outcome_distribution(self, internal_in: FockVector | None, prep1, prep2,
                             truncation: int | None = None) -> OutcomeDistribution:
        internal = _as_internal(internal_in, self.first.internal)
        if not internal.is_normalized():
            raise ValueError("internal state is not normalized")
        branches, dropped = self.branches(internal, prep1, prep2, truncation)
        lost = _as_prep(prep1, self.first.external).lost
        return distribution_from_branches(branches, dropped, lost)

    def sample(self, internal_in, prep1, prep2, shots: int, seed: int) -> dict:
        return sample_distribution(self.outcome_distribution(internal_in, prep1, prep2), shots, seed)


def feed_forward(c1: CircuitOp, chooser: Callable[[OccupationVector], CircuitOp],
                 max_photons: int | None = None) -> FeedForward:
    """Build the feed-forward protocol; with ``max_photons`` the chooser is checked up front."""
    ff = FeedForward(c1, chooser)
    if max_photons is not None:
        ff.validate(max_photons)
    return ff
