import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockrail.circuits import (HADAMARD, MIRROR, WINDOW, BeamSplitterConfig, CircuitOp, CompatibilityError,
                               beam_splitter, embed_loop, extend_internal, identity_op, permutation,
                               random_op, single_loop, spatial_compose, temporal_chain, temporal_compose,
                               verify_interchange)
from fockrail.functor import NotUnitaryError, random_unitary


def test_named_configurations_are_exact():
    assert np.array_equal(beam_splitter(MIRROR), np.eye(2))
    assert np.array_equal(beam_splitter(WINDOW), np.array([[0, 1], [1, 0]]))
    h = beam_splitter(HADAMARD)
    assert np.max(np.abs(h - np.array([[1, 1], [1, -1]]) / math.sqrt(2))) < 1e-15
    assert np.max(np.abs(h @ h - np.eye(2))) < 1e-15


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_every_beam_splitter_is_unitary(theta, gamma, rho, tau):
    u = beam_splitter(BeamSplitterConfig(theta, gamma, rho, tau))
    assert np.max(np.abs(u @ u.conj().T - np.eye(2))) < 1e-12


def test_config_rejects_non_finite():
    with pytest.raises(ValueError):
        BeamSplitterConfig(float("nan"))


def test_circuit_op_blocks_and_immutability():
    op = single_loop(BeamSplitterConfig(0.3, 0.1, 0.2, 0.4))
    assert (op.internal, op.external, op.dim) == (1, 1, 2)
    assert op.ie.shape == op.ii.shape == op.ee.shape == op.ei.shape == (1, 1)
    with pytest.raises(ValueError):
        op.generator[0, 0] = 0
    with pytest.raises(NotUnitaryError):
        CircuitOp(np.ones((2, 2)), 1)


def test_identity_op_routes_internal_to_internal():
    op = identity_op(2, 1)
    assert op.ii.tolist() == [[1, 0], [0, 1]]
    assert op.ee.tolist() == [[1]]


def test_incompatible_compositions_raise():
    rng = np.random.default_rng(0)
    with pytest.raises(CompatibilityError):
        spatial_compose(random_op(1, 1, rng), random_op(1, 2, rng))
    with pytest.raises(CompatibilityError):
        temporal_compose(random_op(1, 1, rng), random_op(2, 1, rng))


def test_spatial_dimensions():
    rng = np.random.default_rng(1)
    c = spatial_compose(random_op(1, 2, rng), random_op(3, 2, rng))
    assert (c.internal, c.external) == (4, 2)


def test_temporal_dimensions():
    rng = np.random.default_rng(2)
    c = temporal_compose(random_op(2, 1, rng), random_op(2, 3, rng))
    assert (c.internal, c.external) == (2, 4)


def test_identity_is_neutral_for_temporal_composition():
    rng = np.random.default_rng(3)
    op = random_op(2, 1, rng)
    left = temporal_compose(internal_identity(2), op)
    assert np.max(np.abs(left.generator - op.generator)) < 1e-15


def internal_identity(m):
    return CircuitOp(np.eye(m), m)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_interchange_law(seed, m1, m2, n1, n2):
    rng = np.random.default_rng(seed)
    dev = verify_interchange(random_op(m1, n1, rng), random_op(m2, n1, rng),
                             random_op(m1, n2, rng), random_op(m2, n2, rng))
    assert dev < 1e-12


def test_temporal_chain_is_associative():
    rng = np.random.default_rng(5)
    a, b, c = (random_op(2, 1, rng) for _ in range(3))
    left = temporal_compose(temporal_compose(a, b), c)
    right = temporal_compose(a, temporal_compose(b, c))
    assert np.max(np.abs(left.generator - right.generator)) < 1e-14
    assert temporal_chain([a, b, c]) == left


def test_embed_loop_leaves_other_modes_alone():
    u = random_unitary(2, np.random.default_rng(6))
    op = embed_loop(u, 3, 1)
    assert (op.internal, op.external) == (3, 1)
    g = op.generator
    assert g[0, 1] == 1 and g[2, 3] == 1
    assert g[1, 0] == u[0, 0] and g[3, 2] == u[1, 1]
    with pytest.raises(IndexError):
        embed_loop(u, 3, 3)


def test_extend_internal_adds_passive_modes():
    op = single_loop(BeamSplitterConfig(0.4, 0.3))
    big = extend_internal(op, 2)
    assert (big.internal, big.external) == (3, 1)
    assert big.generator[0, 0] == op.generator[0, 0]
    assert big.generator[3, 1] == op.generator[1, 1]
    assert big.generator[1, 2] == 1 and big.generator[2, 3] == 1


def test_permutation_validation():
    assert permutation([1, 0]).tolist() == [[0, 1], [1, 0]]
    with pytest.raises(ValueError):
        permutation([0, 0])
