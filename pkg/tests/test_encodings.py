import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockrail.circuits import HADAMARD, BeamSplitterConfig, beam_splitter
from fockrail.encodings import (DualRailEncoding, ParityQuditEncoding, coherent_state, exph, exph_series,
                                floor_cap_estimate, implement_bounds, loop_map, mixing_weights)
from fockrail.fock import number_expectation

from oracles import exph_exact


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.data(), st.floats(0, 8), st.floats(0, 2 * math.pi))
def test_exph_closed_form_matches_exact_series(d, data, radius, phase):
    b = data.draw(st.integers(0, d - 1))
    theta = radius * cmath.exp(1j * phase)
    assert abs(exph(b, d, theta) - exph_exact(b, d, theta)) < 1e-12


@pytest.mark.parametrize("theta", [-8.0, -3.5, 0.0, 0.25, 1.0, 7.9, 8.0])
def test_exph_binary_is_hyperbolic(theta):
    assert exph(0, 2, theta).real == pytest.approx(math.cosh(theta), rel=1e-15)
    assert exph(1, 2, theta).real == pytest.approx(math.sinh(theta), rel=1e-15, abs=1e-300)
    assert exph(0, 2, theta).imag == 0


@given(st.integers(1, 6), st.complex_numbers(max_magnitude=6))
def test_exph_partitions_exponential(d, theta):
    total = sum(exph(b, d, theta) for b in range(d))
    assert abs(total - cmath.exp(theta)) < 1e-12 * max(1, abs(cmath.exp(theta)))


def test_package_series_agrees_with_closed_form():
    for d in range(2, 5):
        for b in range(d):
            assert exph_series(b, d, 3 - 2j) == pytest.approx(exph(b, d, 3 - 2j), abs=1e-12)


def test_coherent_state_moments():
    state = coherent_state(1.0)
    assert state.norm2() == pytest.approx(1.0, abs=1e-9)
    assert number_expectation(state, 0) == pytest.approx(1.0, abs=1e-6)
    assert coherent_state(0).amplitudes == {(0,): 1}
    with pytest.raises(ValueError):
        coherent_state(2.0, truncation=4)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.4 - 0.9j, 2.0])
def test_representation_is_isometric_and_compatible(d, alpha):
    enc = ParityQuditEncoding(d, alpha)
    for b in range(d):
        norm = enc.represent(b).norm2()
        assert 1 - enc.tail_tol <= norm <= 1 + 1e-12
    assert np.max(np.abs(enc.interpret_represent() - np.eye(d))) < 1e-9


def test_binary_representation_amplitudes():
    enc = ParityQuditEncoding(2, 1.0)
    rep = enc.represent(0)
    for n in (0, 2, 4):
        assert rep[(n,)] == pytest.approx(1 / math.sqrt(math.factorial(n) * math.cosh(1)))
    assert rep[(1,)] == 0


def test_small_alpha_limit_is_vacuum():
    rep = ParityQuditEncoding(2, 1e-4).represent(0)
    assert abs(rep[(0,)]) == pytest.approx(1, abs=1e-8)


def test_interpret_returns_residue_and_conjugate_weight():
    enc = ParityQuditEncoding(3, 0.5 + 0.5j)
    dit, weight = enc.interpret((4,))
    assert dit == 1
    assert weight == pytest.approx(np.conj(enc.amplitudes[4]))


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("alpha", [0.5, 1.5 + 0.5j, 2.0])
def test_mixture_identity(d, alpha):
    enc = ParityQuditEncoding(d, alpha)
    p = mixing_weights(enc)
    coh = coherent_state(alpha, enc.truncation)
    mix = {}
    for b in range(d):
        for k, v in enc.represent(b).items():
            mix[k] = mix.get(k, 0) + p[b] * v
    keys = set(mix) | set(coh.amplitudes)
    assert math.sqrt(sum(abs(mix.get(k, 0) - coh[k]) ** 2 for k in keys)) < 1e-8


def test_identity_map_bounds():
    enc = ParityQuditEncoding(2, 1.0)
    ident = np.eye(enc.truncation + 1)
    mu, eps = implement_bounds(enc, ident, 0, 0)
    assert mu == pytest.approx(sum(abs(a) ** 4 for a in enc.amplitudes[0::2]))
    assert mu + eps == pytest.approx(1.0)
    assert implement_bounds(enc, ident, 0, 1) == (0.0, 0.0)


def test_unmixed_sequence_has_no_epsilon():
    enc = ParityQuditEncoding(2, sequence=(1, 1, 0, 0))
    phys = loop_map(BeamSplitterConfig(0.4, 0.1), 1, 1, enc.truncation)
    for bm in range(2):
        for bp in range(2):
            assert implement_bounds(enc, phys, bm, bp).epsilon == pytest.approx(0, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bounds_bracket_true_value(seed):
    rng = np.random.default_rng(seed)
    enc = ParityQuditEncoding(3, 1.1)
    phys = loop_map(BeamSplitterConfig(*rng.uniform(0, 2 * math.pi, 4)), int(rng.integers(0, 3)),
                    int(rng.integers(0, 3)), enc.truncation)
    implemented = enc.implemented(phys)
    for bm in range(3):
        for bp in range(3):
            bounds = implement_bounds(enc, phys, bm, bp)
            value = abs(implemented[bm, bp]) ** 2
            assert bounds.epsilon >= 0
            assert bounds.lower - 1e-12 <= value <= bounds.upper + 1e-12


def test_floor_cap_exact_dual_rail_implementation():
    enc = DualRailEncoding()
    h = beam_splitter(HADAMARD)
    theory = enc.implemented(h)
    est = floor_cap_estimate(enc, theory, h, samples=100, seed=1)
    assert est.floor == pytest.approx(1) and est.cap == pytest.approx(1)
    assert est.equivalent and est.heuristic


def test_floor_cap_mismatched_gate_spreads():
    enc = DualRailEncoding()
    est = floor_cap_estimate(enc, np.eye(2), beam_splitter(HADAMARD), samples=200, seed=2)
    assert not est.equivalent
    assert est.floor < est.cap


def test_floor_cap_vacuous():
    enc = DualRailEncoding()
    est = floor_cap_estimate(enc, np.zeros((2, 2)), np.eye(2) * 0 + np.array([[0, 1], [1, 0]]), samples=0)
    assert est.pairs == 4


def test_dual_rail_round_trip():
    enc = DualRailEncoding()
    for b in (0, 1):
        occ = next(iter(enc.represent(b).amplitudes))
        assert enc.interpret(occ) == (b, 1)
    assert enc.interpret((1, 1)) is None
