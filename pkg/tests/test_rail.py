import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockrail.circuits import MIRROR, WINDOW, BeamSplitterConfig, beam_splitter, temporal_compose
from fockrail.encodings import ParityQuditEncoding
from fockrail.measurement import OVERFLOW, outcome_distribution
from fockrail.rail import (FeedForwardRule, RailLayout, SamplingRun, Schedule, build_rail, default_truncation,
                           deterministic_trace, rail_mode_map, run_sampling, simulate, simulate_circuit,
                           to_ditstream)
from fockrail.single_loop import loop_amplitude

from oracles import total_variation


def random_grid(loops, timebins, rng, choices=None):
    if choices is None:
        return [[BeamSplitterConfig(*rng.uniform(0, 2 * math.pi, 4)) for _ in range(timebins)]
                for _ in range(loops)]
    return [[choices[int(rng.integers(len(choices)))] for _ in range(timebins)] for _ in range(loops)]


@pytest.mark.parametrize("loops", [1, 2, 3, 4])
@pytest.mark.parametrize("timebins", range(1, 9))
def test_dimension_law(loops, timebins):
    layout = RailLayout(loops, timebins)
    op = build_rail(layout)
    assert op.dim == layout.dimension == 2 * loops - 1 + timebins
    assert op.internal == 2 * loops - 1 and op.external == timebins
    assert layout.edges == 2 * loops + 1


def test_single_beam_splitter_rail():
    config = BeamSplitterConfig(0.3, 0.2, 0.5, 0.7)
    op = build_rail(RailLayout(1, 1, [[config]]))
    # rows (loop, input), columns (output, loop)
    assert np.array_equal(op.generator, beam_splitter(config))


def test_documented_example_dimension():
    assert build_rail(RailLayout(3, 6)).dim == 11


def test_malformed_grid():
    with pytest.raises(ValueError):
        RailLayout(2, 2, [[MIRROR, MIRROR]])
    with pytest.raises(ValueError):
        RailLayout(0, 2)
    with pytest.raises(TypeError):
        RailLayout(1, 1, [["mirror"]])


def test_mode_map_is_a_bijection():
    for loops in range(1, 5):
        modes = rail_mode_map(loops)
        rows = sorted(r for m in modes for r in (m.loop_row, m.rail_row))
        cols = sorted(c for m in modes for c in (m.rail_col, m.loop_col))
        assert rows == cols == list(range(2 * loops))


@pytest.mark.parametrize("seed", range(6))
def test_generator_unitary(seed):
    rng = np.random.default_rng(seed)
    layout = RailLayout(3, 4, random_grid(3, 4, rng))
    g = build_rail(layout).generator
    assert np.max(np.abs(g @ g.conj().T - np.eye(len(g)))) < 1e-12


@pytest.mark.parametrize("a,b", [(1, 1), (2, 3), (3, 2), (1, 4)])
def test_composition_seam(a, b):
    rng = np.random.default_rng(a * 10 + b)
    grid = random_grid(2, a + b, rng)
    whole = build_rail(RailLayout(2, a + b, grid))
    first = build_rail(RailLayout(2, a, [row[:a] for row in grid]))
    second = build_rail(RailLayout(2, b, [row[a:] for row in grid]))
    assert np.max(np.abs(whole.generator - temporal_compose(first, second).generator)) < 1e-12


def test_all_windows_pass_through():
    layout = RailLayout(2, 3, [[WINDOW] * 3, [WINDOW] * 3])
    routes, out, final = deterministic_trace(layout, (1, 1, 1))
    # a rail photon reaches the second beam splitter one time-bin later
    assert routes[("in", 0)] == ("out", 1)
    assert routes[("in", 1)] == ("out", 2)
    assert routes[("in", 2)] == ("link", 0)
    assert tuple(out) == (0, 1, 1) and tuple(final) == (0, 0, 1)
    assert routes[("loop", 0)] == ("loop", 0)


def test_all_mirrors_route_into_loops():
    layout = RailLayout(1, 3)
    routes, out, final = deterministic_trace(layout, (1, 0, 0), (2,))
    # a mirror swaps loop and rail, so the stored photons leave first
    assert routes[("loop", 0)] == ("out", 0)
    assert routes[("in", 0)] == ("out", 1)
    assert tuple(out) == (2, 1, 0)


def test_trace_rejects_general_configs():
    layout = RailLayout(1, 1, [[BeamSplitterConfig(0.3)]])
    with pytest.raises(ValueError):
        deterministic_trace(layout, (1,))


@pytest.mark.parametrize("seed", range(50))
def test_trace_agrees_with_simulation(seed):
    rng = np.random.default_rng(1000 + seed)
    loops, timebins = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    layout = RailLayout(loops, timebins, random_grid(loops, timebins, rng, [MIRROR, WINDOW]))
    prep = tuple(int(x) for x in rng.integers(0, 2, timebins))
    _, out, final = deterministic_trace(layout, prep)
    op = build_rail(layout)
    dist = outcome_distribution(op, None, prep)
    assert len(dist.entries) == 1
    (outcome, p), = dist.entries.items()
    assert tuple(outcome) == tuple(out)
    assert abs(p - 1) < 1e-12


def test_single_loop_rail_matches_closed_form():
    rng = np.random.default_rng(4)
    configs = [BeamSplitterConfig(*rng.uniform(0, 2 * math.pi, 4)) for _ in range(3)]
    op = build_rail(RailLayout(1, 3, [configs]))
    # two photons stored in the loop, vacuum prepared: follow the loop bin by bin
    for outs in [(0, 0, 0), (1, 0, 1), (2, 0, 0), (0, 1, 1), (1, 1, 0)]:
        m, amp = 2, 1 + 0j
        for config, n in zip(configs, outs):
            amp *= loop_amplitude(config, m, 0, n)
            m -= n
        from fockrail.functor import matrix_element

        assert matrix_element(op.generator, (2, 0, 0, 0), outs + (m,)) == pytest.approx(amp, abs=1e-12)


def hom_layout():
    h = BeamSplitterConfig(math.pi / 4)
    return RailLayout(2, 3, [[WINDOW, MIRROR, MIRROR], [MIRROR, h, MIRROR]])


def test_two_routes_agree():
    rng = np.random.default_rng(9)
    layout = RailLayout(2, 3, random_grid(2, 3, rng))
    sched = Schedule(prepare={0: 1, 1: 1}, measured=frozenset({1, 2}))
    a = simulate(layout, sched).distribution
    b = simulate_circuit(layout, sched).distribution
    assert total_variation(a.entries, b.entries) < 1e-12
    assert a.total() == pytest.approx(1, abs=1e-12)


def test_coherent_routes_agree():
    layout = RailLayout(1, 3, [[BeamSplitterConfig(0.6), BeamSplitterConfig(0.9), BeamSplitterConfig(1.2)]])
    sched = Schedule(prepare={0: 0.8}, coherent=frozenset({0}), measured=frozenset({0, 1, 2}))
    a = simulate(layout, sched).distribution
    b = simulate_circuit(layout, sched).distribution
    assert total_variation(a.entries, b.entries) < 1e-12
    assert a.residual < 1e-6


def test_default_truncation():
    assert default_truncation(Schedule(prepare={0: 2, 3: 1})) == 7
    coh = default_truncation(Schedule(prepare={0: 1.0}, coherent=frozenset({0})))
    assert coh > 4


def test_postselection_renormalizes():
    layout = RailLayout(1, 2, [[BeamSplitterConfig(math.pi / 4), MIRROR]])
    sched = Schedule(prepare={0: 1}, postselect={0: 0}, measured=frozenset({1}))
    result = simulate(layout, sched)
    assert result.postselection_probability == pytest.approx(0.5)
    assert result.distribution.entries == {(0, 1): pytest.approx(1.0)}


def test_postselection_with_no_support():
    layout = RailLayout(1, 1)
    with pytest.raises(ValueError):
        simulate(layout, Schedule(prepare={0: 0}, postselect={0: 1}))


def test_feed_forward_switches_later_bins():
    bs = BeamSplitterConfig(math.pi / 4)
    layout = RailLayout(1, 3, [[bs, MIRROR, MIRROR]])
    # if nothing left at t=0 the photon is in the loop; keep it there for one bin
    rule = FeedForwardRule(0, 0, 1, 0, WINDOW)
    sched = Schedule(prepare={0: 1}, measured=frozenset({0, 1, 2}), rules=(rule,))
    dist = simulate(layout, sched).distribution
    assert dist.entries[(1, 0, 0)] == pytest.approx(0.5)
    assert dist.entries[(0, 0, 1)] == pytest.approx(0.5)
    assert (0, 1, 0) not in dist.entries
    plain = simulate(layout, Schedule(prepare={0: 1}, measured=frozenset({0, 1, 2}))).distribution
    assert plain.entries[(0, 1, 0)] == pytest.approx(0.5)


def test_mirror_rail_single_bucket():
    layout = RailLayout(1, 3)
    run = SamplingRun(layout, Schedule(prepare={1: 1}, measured=frozenset({0, 1, 2})), shots=500, seed=3)
    result = run_sampling(run)
    assert result.counts[(0, 0, 1)] == 500
    assert result.counts.get(OVERFLOW, 0) == 0


def test_sampling_matches_exact():
    layout = hom_layout()
    sched = Schedule(prepare={0: 1, 1: 1}, measured=frozenset({0, 1, 2}))
    exact = simulate_circuit(layout, sched).distribution
    result = run_sampling(SamplingRun(layout, sched, 20000, 5))
    assert sum(result.counts.values()) == 20000
    assert total_variation(exact.entries, {k: v / 20000 for k, v in result.counts.items() if k != OVERFLOW}) < 0.02


def test_ditstream_is_count_mod_d():
    counts = {(0, 3): 2, (2, 1): 5, (4, 1): 1, OVERFLOW: 0}
    assert to_ditstream(counts, 2) == {(0, 1): 8, OVERFLOW: 0}
    assert to_ditstream(counts, 3) == {(0, 0): 2, (2, 1): 5, (1, 1): 1, OVERFLOW: 0}


def test_ditstream_run():
    layout = RailLayout(1, 2, [[BeamSplitterConfig(0.5)] * 2])
    sched = Schedule(prepare={0: 1.0}, coherent=frozenset({0}), measured=frozenset({0, 1}))
    enc = ParityQuditEncoding(2, 1.0)
    result = run_sampling(SamplingRun(layout, sched, 2000, 11, enc))
    assert result.kind == "ditstream"
    assert all(x in (0, 1) for k in result.counts if k != OVERFLOW for x in k)
    assert sum(result.counts.values()) == 2000


def test_sampling_run_validation():
    with pytest.raises(ValueError):
        SamplingRun(RailLayout(1, 2), Schedule(prepare={5: 1}), 10, 0)
    with pytest.raises(ValueError):
        SamplingRun(RailLayout(1, 2), Schedule(), 0, 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_distribution_normalized(loops, timebins, seed):
    rng = np.random.default_rng(seed)
    layout = RailLayout(loops, timebins, random_grid(loops, timebins, rng))
    prep = {t: int(rng.integers(0, 2)) for t in range(timebins)}
    sched = Schedule(prepare=prep, measured=frozenset(range(timebins)))
    dist = simulate(layout, sched).distribution
    assert dist.total() + dist.residual == pytest.approx(1, abs=1e-12)
