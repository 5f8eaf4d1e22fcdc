"""The single-rail computer: ``N_L`` loops along one rail, run for ``N_H`` time-bins.

Mode numbering within one time-bin (``M = 2 N_L - 1`` internal modes, one
external mode):

* internal ``0 .. N_L-1`` are the loops, ``N_L .. 2N_L-2`` the links between
  consecutive beam splitters on the rail;
* beam splitter ``k`` couples loop ``k`` to rail segment ``k``. Its rail input
  is the external input for ``k = 0`` and link ``k-1`` otherwise; its rail
  output is link ``k`` for ``k < N_L-1`` and the external output for the last
  loop.

A photon leaving beam splitter ``k`` on the rail therefore reaches beam
splitter ``k+1`` one time-bin later, and the whole computer is the temporal
chain of the per-bin circuits, with dimension ``2 N_L - 1 + N_H``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuits import MIRROR, BeamSplitterConfig, CircuitOp, beam_splitter, temporal_chain
from .encodings import ParityQuditEncoding, coherent_state
from .fock import FockVector, OccupationVector
from .measurement import OutcomeDistribution, branch, outcome_distribution, sample_distribution


@dataclass(frozen=True)
class RailLayout:
    loops: int
    timebins: int
    configs: tuple[tuple[BeamSplitterConfig, ...], ...] = None  # [loop][timebin]

    def __post_init__(self):
        if self.loops < 1 or self.timebins < 1:
            raise ValueError("a rail needs at least one loop and one time-bin")
        grid = self.configs
        if grid is None:
            grid = [[MIRROR] * self.timebins for _ in range(self.loops)]
        grid = tuple(tuple(row) for row in grid)
        if len(grid) != self.loops or any(len(row) != self.timebins for row in grid):
            raise ValueError(f"config grid must be {self.loops} x {self.timebins}")
        for row in grid:
            for c in row:
                if not isinstance(c, BeamSplitterConfig):
                    raise TypeError(f"grid entries must be BeamSplitterConfig, got {type(c).__name__}")
        object.__setattr__(self, "configs", grid)

    @property
    def internal(self) -> int:
        return 2 * self.loops - 1

    @property
    def dimension(self) -> int:
        return 2 * self.loops - 1 + self.timebins

    @property
    def edges(self) -> int:
        return 2 * self.loops + 1

    def config(self, t: int, loop: int) -> BeamSplitterConfig:
        return self.configs[loop][t]

    def column(self, t: int) -> tuple[BeamSplitterConfig, ...]:
        return tuple(row[t] for row in self.configs)

    def with_config(self, t: int, loop: int, config: BeamSplitterConfig) -> "RailLayout":
        grid = [list(row) for row in self.configs]
        grid[loop][t] = config
        return RailLayout(self.loops, self.timebins, grid)


@dataclass(frozen=True)
class RailModes:
    """Row and column indices used by beam splitter ``k`` in one time-bin generator."""

    loop_row: int
    rail_row: int
    rail_col: int
    loop_col: int


def rail_mode_map(loops: int) -> list[RailModes]:
    internal = 2 * loops - 1
    out = []
    for k in range(loops):
        rail_row = internal if k == 0 else loops + k - 1
        rail_col = 0 if k == loops - 1 else 1 + loops + k
        out.append(RailModes(loop_row=k, rail_row=rail_row, rail_col=rail_col, loop_col=1 + k))
    return out


def timebin_generator(configs: Sequence[BeamSplitterConfig]) -> np.ndarray:
    loops = len(configs)
    dim = 2 * loops
    g = np.zeros((dim, dim), dtype=complex)
    for modes, config in zip(rail_mode_map(loops), configs):
        u = beam_splitter(config)
        g[modes.loop_row, modes.rail_col] = u[0, 0]
        g[modes.loop_row, modes.loop_col] = u[0, 1]
        g[modes.rail_row, modes.rail_col] = u[1, 0]
        g[modes.rail_row, modes.loop_col] = u[1, 1]
    return g


def timebin_op(configs: Sequence[BeamSplitterConfig], t: int = 0) -> CircuitOp:
    return CircuitOp(timebin_generator(configs), 2 * len(configs) - 1, history=(f"t{t}",))


def build_rail(layout: RailLayout) -> CircuitOp:
    return temporal_chain([timebin_op(layout.column(t), t) for t in range(layout.timebins)])


# ---------------------------------------------------------------------------
# deterministic routing
# ---------------------------------------------------------------------------

def _routing(config: BeamSplitterConfig) -> str:
    u = beam_splitter(config)
    if u[0, 1] == 0 and u[1, 0] == 0:
        return "exchange"  # loop -> rail, rail -> loop
    if u[0, 0] == 0 and u[1, 1] == 0:
        return "keep"  # loop -> loop, rail -> rail
    raise ValueError(f"config {config} is neither a mirror nor a window")


def trace_photon(layout: RailLayout, start: tuple) -> tuple:
    """Follow one photon from ``("in", t)`` or an internal edge ``("loop", k)`` / ``("link", k)``.

    Returns ``("out", t)`` or the internal edge it occupies after the last time-bin.
    """
    kind, index = start
    if kind == "in":
        t, pos = index, ("rail", 0)
    elif kind == "loop":
        t, pos = 0, ("loop", index)
    elif kind == "link":
        t, pos = 0, ("rail", index + 1)
    else:
        raise ValueError(f"unknown start {start!r}")
    while t < layout.timebins:
        where, k = pos
        routing = _routing(layout.config(t, k))
        on_rail = (where == "rail") != (routing == "exchange")
        if not on_rail:
            # in loop k until the next time-bin
            pos, t = ("loop", k), t + 1
            continue
        if k == layout.loops - 1:
            return ("out", t)
        pos, t = ("rail", k + 1), t + 1
    where, k = pos
    return ("loop", k) if where == "loop" else ("link", k - 1)


def deterministic_trace(layout: RailLayout, prep: Sequence[int],
                        internal: Sequence[int] | None = None) -> tuple[dict, OccupationVector, OccupationVector]:
    """Route photons through a mirror/window grid.

    Returns the map from every input edge to the edge its photons end on, the
    external output counts per time-bin and the final internal occupation.
    """
    prep = tuple(prep)
    if len(prep) != layout.timebins:
        raise ValueError(f"preparation needs {layout.timebins} entries")
    internal = tuple(internal) if internal is not None else (0,) * layout.internal
    if len(internal) != layout.internal:
        raise ValueError(f"internal occupation needs {layout.internal} entries")
    starts = [("in", t) for t in range(layout.timebins)]
    starts += [("loop", k) for k in range(layout.loops)]
    starts += [("link", k) for k in range(layout.loops - 1)]
    routes = {s: trace_photon(layout, s) for s in starts}
    out = [0] * layout.timebins
    final = [0] * layout.internal
    counts = dict(zip(starts, list(prep) + list(internal)))
    for s, n in counts.items():
        kind, k = routes[s]
        if kind == "out":
            out[k] += n
        elif kind == "loop":
            final[k] += n
        else:
            final[layout.loops + k] += n
    return routes, OccupationVector(out), OccupationVector(final)


# ---------------------------------------------------------------------------
# programs: preparation, measurement and feed-forward per time-bin
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeedForwardRule:
    """If time-bin ``when_t`` measured ``when_n`` photons, use ``config`` at ``(set_t, loop)``."""

    when_t: int
    when_n: int
    set_t: int
    loop: int
    config: BeamSplitterConfig


Preparation = int | complex  # photon number, or a coherent amplitude


@dataclass(frozen=True)
class Schedule:
    """Preparation, measurement and post-selection for every time-bin.

    ``coherent`` holds the time-bins whose preparation is a coherent amplitude
    rather than a photon number.
    """

    prepare: Mapping[int, complex] = field(default_factory=dict)
    coherent: frozenset = frozenset()
    measured: frozenset = frozenset()
    postselect: Mapping[int, int] = field(default_factory=dict)
    rules: tuple[FeedForwardRule, ...] = ()

    def prep_state(self, t: int, truncation: int | None = None) -> FockVector:
        if t in self.coherent:
            return coherent_state(self.prepare[t], truncation)
        return FockVector.basis((int(self.prepare.get(t, 0)),))

    def number_photons(self) -> int:
        return sum(int(n) for t, n in self.prepare.items() if t not in self.coherent)


def default_truncation(schedule: Schedule) -> int:
    """Prepared photon number plus 4; coherent inputs add their own Poisson cutoff."""
    extra = 0
    for t in schedule.coherent:
        extra += coherent_state(schedule.prepare[t]).truncation
    return schedule.number_photons() + extra + 4


def _configs_for(layout: RailLayout, t: int, record: tuple, rules: Sequence[FeedForwardRule]):
    configs = list(layout.column(t))
    for rule in rules:
        if rule.set_t == t and record[rule.when_t] == rule.when_n:
            configs[rule.loop] = rule.config
    return configs


@dataclass(frozen=True)
class SimulationResult:
    distribution: OutcomeDistribution
    measured: tuple[int, ...]
    postselection_probability: float | None
    truncation: int


def simulate(layout: RailLayout, schedule: Schedule, truncation: int | None = None) -> SimulationResult:
    """Exact outcome distribution, stepping time-bin by time-bin and branching on outcomes.

    Unmeasured time-bins are traced out. Post-selected time-bins condition the
    distribution, which is renormalized over the accepted branches.
    """
    cap = default_truncation(schedule) if truncation is None else truncation
    measured = tuple(sorted(set(schedule.measured) | set(schedule.postselect)))
    ops: dict[tuple, CircuitOp] = {}
    branches: dict[tuple, FockVector] = {(): FockVector.vacuum(layout.internal, cap)}
    residual = 0.0
    for t in range(layout.timebins):
        prep = schedule.prep_state(t)
        residual += prep.lost * sum(s.norm2() for s in branches.values())
        nxt: dict[tuple, FockVector] = {}
        for record, state in branches.items():
            configs = tuple(_configs_for(layout, t, record, schedule.rules))
            op = ops.get(configs)
            if op is None:
                op = ops[configs] = timebin_op(configs, t)
            outs, dropped = branch(op, state, prep, cap)
            residual += dropped
            for meas, image in outs.items():
                (n,) = meas
                if t in schedule.postselect and n != schedule.postselect[t]:
                    continue
                nxt[record + (n,)] = image
        branches = nxt
    probs: dict[tuple, float] = Counter()
    for record, state in branches.items():
        probs[tuple(record[t] for t in measured)] += state.norm2()
    accepted = math.fsum(probs.values())
    post = None
    if schedule.postselect:
        post = accepted
        if accepted <= 0:
            raise ValueError("post-selection accepts no outcome")
        probs = {k: v / (accepted + residual) for k, v in probs.items()}
        residual = residual / (accepted + residual)
    return SimulationResult(OutcomeDistribution(dict(probs), residual), measured, post, cap)


def simulate_circuit(layout: RailLayout, schedule: Schedule, truncation: int | None = None) -> SimulationResult:
    """Same distribution from the generator of the whole rail; no feed-forward or post-selection."""
    if schedule.rules or schedule.postselect:
        raise ValueError("the whole-rail route does not support feed-forward or post-selection")
    cap = default_truncation(schedule) if truncation is None else truncation
    prep = schedule.prep_state(0)
    for t in range(1, layout.timebins):
        prep = prep.tensor(schedule.prep_state(t))
    dist = outcome_distribution(build_rail(layout), FockVector.vacuum(layout.internal, cap), prep, cap)
    measured = tuple(sorted(schedule.measured))
    return SimulationResult(dist.marginal(measured), measured, None, cap)


# ---------------------------------------------------------------------------
# sampling runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingRun:
    layout: RailLayout
    schedule: Schedule
    shots: int
    seed: int
    encoding: ParityQuditEncoding | None = None
    truncation: int | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        for t in list(self.schedule.prepare) + list(self.schedule.measured) + list(self.schedule.postselect):
            if not 0 <= t < self.layout.timebins:
                raise ValueError(f"time-bin {t} outside 0..{self.layout.timebins - 1}")


@dataclass(frozen=True)
class SamplingResult:
    kind: str  # "histogram" or "ditstream"
    counts: dict
    measured: tuple[int, ...]
    truncation: int
    residual: float
    postselection_probability: float | None = None


def to_ditstream(counts: Mapping, d: int) -> dict:
    """Reduce every outcome's photon counts modulo ``d``."""
    out: dict = {}
    for key, n in counts.items():
        dits = key if isinstance(key, str) else tuple(x % d for x in key)
        out[dits] = out.get(dits, 0) + n
    return out


def run_sampling(run: SamplingRun) -> SamplingResult:
    sched = run.schedule
    if sched.rules or sched.postselect:
        result = simulate(run.layout, sched, run.truncation)
    else:
        result = simulate_circuit(run.layout, sched, run.truncation)
    counts = sample_distribution(result.distribution, run.shots, run.seed)
    kind = "histogram"
    if run.encoding is not None:
        counts = to_ditstream(counts, run.encoding.d)
        kind = "ditstream"
    return SamplingResult(kind, counts, result.measured, result.truncation,
                          result.distribution.residual, result.postselection_probability)
