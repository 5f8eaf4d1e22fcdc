"""Post-selected gates: non-linear diagonal gates, the non-linear sign gate and controlled-Z."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import (HADAMARD, BeamSplitterConfig, CircuitOp, beam_splitter, embed_loop,
                       extend_internal, internal_gate, single_loop, temporal_chain)
from .fock import FockVector
from .measurement import project_block
from .single_loop import loop_amplitude

NS_SUCCESS = (3 - math.sqrt(2)) / 7
CZ_SUCCESS = (11 - 6 * math.sqrt(2)) / 49


@dataclass(frozen=True)
class Stage:
    config: BeamSplitterConfig
    n_minus: int
    n_plus: int


@dataclass(frozen=True)
class NonlinearDiagonalSpec:
    """Single-loop beam splitters run over consecutive time-bins, each post-selected."""

    stages: tuple[Stage, ...]

    def __post_init__(self):
        stages = tuple(s if isinstance(s, Stage) else Stage(*s) for s in self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages:
            raise ValueError("a non-linear diagonal gate needs at least one stage")
        for s in stages:
            if s.n_minus < 0 or s.n_plus < 0:
                raise ValueError("photon counts must be nonnegative")
        if sum(s.n_minus for s in stages) != sum(s.n_plus for s in stages):
            raise ValueError("prepared and measured photon totals differ, the gate would not be diagonal")

    @property
    def prep(self) -> tuple[int, ...]:
        return tuple(s.n_minus for s in self.stages)

    @property
    def meas(self) -> tuple[int, ...]:
        return tuple(s.n_plus for s in self.stages)


@dataclass(frozen=True)
class GateReport:
    name: str
    coefficients: np.ndarray
    success_probability: float
    deviations: dict = field(default_factory=dict)
    configs: tuple = ()
    labels: tuple = ()  # internal basis state of each coefficient; photon count when empty

    def __post_init__(self):
        if not -1e-12 <= self.success_probability <= 1 + 1e-12:
            raise ValueError(f"success probability {self.success_probability} outside [0, 1]")

    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)


def nd_coefficients(spec: NonlinearDiagonalSpec, m_max: int) -> np.ndarray:
    """``p[m]`` for ``m = 0..m_max`` by chaining the closed-form loop amplitudes."""
    out = np.empty(m_max + 1, dtype=complex)
    for m in range(m_max + 1):
        amp, count = 1 + 0j, m
        for s in spec.stages:
            amp *= loop_amplitude(s.config, count, s.n_minus, s.n_plus)
            count += s.n_minus - s.n_plus
            if count < 0:
                amp = 0j
                break
        out[m] = amp
    return out


def nd_circuit(spec: NonlinearDiagonalSpec) -> CircuitOp:
    return temporal_chain([single_loop(s.config) for s in spec.stages])


def nd_coefficients_functor(spec: NonlinearDiagonalSpec, m_max: int) -> np.ndarray:
    """Same coefficients from the generator of the composed circuit."""
    block = project_block(nd_circuit(spec), spec.prep, spec.meas)
    return np.array([block.apply(FockVector.basis((m,)))[(m,)] for m in range(m_max + 1)])


def nd_gate(spec: NonlinearDiagonalSpec, m_max: int) -> GateReport:
    """Diagonal coefficients on ``0..m_max`` internal photons.

    The success probability is the smallest ``|p[m]|^2`` in range, the
    guaranteed post-selection rate on that subspace.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    coeffs = nd_coefficients(spec, m_max)
    return GateReport("nd", coeffs, float(np.min(np.abs(coeffs) ** 2)),
                      configs=tuple(spec.stages))


# ---------------------------------------------------------------------------
# non-linear sign
# ---------------------------------------------------------------------------

TAU1 = 0.0
TAU2 = 0.0


def ns_configs(tau1: float = TAU1, tau2: float = TAU2) -> tuple[BeamSplitterConfig, BeamSplitterConfig]:
    theta1 = math.acos(math.sqrt((3 - math.sqrt(2)) / 7))
    theta2 = math.acos(-math.sqrt(5 - 3 * math.sqrt(2)))
    return (BeamSplitterConfig(theta1, gamma=0.0 - tau1, tau=tau1),
            BeamSplitterConfig(theta2, gamma=2 * tau1 + tau2, tau=tau2))


def ns_spec(tau1: float = TAU1, tau2: float = TAU2) -> NonlinearDiagonalSpec:
    c1, c2 = ns_configs(tau1, tau2)
    return NonlinearDiagonalSpec((Stage(c1, 1, 1), Stage(c2, 0, 0)))


def ns_residuals(spec: NonlinearDiagonalSpec) -> dict[str, float]:
    """The three phase and two angle conditions of the sign gate, each as ``|lhs - rhs|``."""
    s1, s2 = spec.stages
    g1, t1, g2, t2 = s1.config.gamma, s1.config.tau, s2.config.gamma, s2.config.tau
    c1, c2 = math.cos(s1.config.theta), math.cos(s2.config.theta)
    a0 = c1
    a1 = -(1 - 2 * c1 ** 2) * c2
    a2 = c1 * (2 - 3 * c1 ** 2) * c2 ** 2

    def wrap(x):
        return abs(math.remainder(x, 2 * math.pi))

    return {
        "phase0": wrap(g1 + t1),
        "phase1": wrap(2 * g1 + g2 - t2),
        "phase2": wrap(3 * g1 - t1 + 2 * g2 - 2 * t2),
        "angle01": abs(a0 - a1),
        "angle12": abs(a1 - a2),
    }


def nonlinear_sign(tau1: float = TAU1, tau2: float = TAU2) -> tuple[NonlinearDiagonalSpec, GateReport]:
    spec = ns_spec(tau1, tau2)
    coeffs = nd_coefficients(spec, 2)
    p = math.sqrt(NS_SUCCESS)
    target = np.array([p, p, -p])
    dev = dict(ns_residuals(spec))
    dev["coefficients"] = float(np.max(np.abs(coeffs - target)))
    dev["success"] = abs(float(np.min(np.abs(coeffs) ** 2)) - NS_SUCCESS)
    report = GateReport("ns", coeffs, float(np.min(np.abs(coeffs) ** 2)), dev,
                        configs=tuple(spec.stages))
    return spec, report


# ---------------------------------------------------------------------------
# Hadamard and controlled-Z
# ---------------------------------------------------------------------------

def hadamard_bs() -> np.ndarray:
    return beam_splitter(HADAMARD)


def ns_on_mode(internal: int, target: int, spec: NonlinearDiagonalSpec | None = None) -> list[CircuitOp]:
    """The sign-gate stages acting on internal mode ``target`` of ``internal`` modes."""
    spec = spec or ns_spec()
    return [embed_loop(beam_splitter(s.config), internal, target, history=f"ns{k}@{target}")
            for k, s in enumerate(spec.stages)]


def cz_circuit() -> tuple[CircuitOp, tuple[int, ...], tuple[int, ...]]:
    """``B[H] (NS x NS) B[H]`` on two internal modes with its ancilla preparation and measurement."""
    spec = ns_spec()
    h = internal_gate(hadamard_bs(), history="H")
    ops = [h] + ns_on_mode(2, 0, spec) + ns_on_mode(2, 1, spec) + [h]
    prep = spec.prep * 2
    meas = spec.meas * 2
    return temporal_chain(ops), prep, meas


CZ_BASIS = ((0, 0), (0, 1), (1, 0), (1, 1))


def controlled_z() -> tuple[CircuitOp, GateReport]:
    op, prep, meas = cz_circuit()
    block = project_block(op, prep, meas)
    mat = np.zeros((4, 4), dtype=complex)
    for i, b in enumerate(CZ_BASIS):
        image = block.apply(FockVector.basis(b))
        for j, c in enumerate(CZ_BASIS):
            mat[i, j] = image[c]
    target = NS_SUCCESS * np.diag([1, 1, 1, -1])
    success = float(np.min(np.sum(np.abs(mat) ** 2, axis=1)))
    dev = {
        "action": float(np.max(np.abs(mat - target))),
        "success": abs(success - CZ_SUCCESS),
    }
    report = GateReport("cz", np.diag(mat).copy(), success, dev, configs=tuple(ns_spec().stages),
                        labels=CZ_BASIS)
    return op, report


def _dual_rail(bits: Sequence[int]) -> tuple[int, ...]:
    # internal order (a1, b1, a0, b0): the value-1 rails first, as the gate acts on them
    ones = tuple(int(b == 1) for b in bits)
    zeros = tuple(int(b == 0) for b in bits)
    return ones + zeros


def dual_rail_cz_check() -> dict:
    """Check the gate on dual-rail qubits against ``p^2 diag(1, 1, 1, -1)``."""
    op, prep, meas = cz_circuit()
    block = project_block(extend_internal(op, 2), prep, meas)
    qubits = [(0, 0), (0, 1), (1, 0), (1, 1)]
    mat = np.zeros((4, 4), dtype=complex)
    for i, q in enumerate(qubits):
        image = block.apply(FockVector.basis(_dual_rail(q)))
        leak = image.norm2() - sum(abs(image[_dual_rail(r)]) ** 2 for r in qubits)
        if leak > 1e-12:
            raise AssertionError(f"dual-rail input {q} leaks {leak:.3g} out of the code space")
        for j, r in enumerate(qubits):
            mat[i, j] = image[_dual_rail(r)]
    target = NS_SUCCESS * np.diag([1, 1, 1, -1])
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    out = bell @ mat
    out = out / np.linalg.norm(out)
    return {
        "matrix": mat,
        "deviation": float(np.max(np.abs(mat - target))),
        "success_probability": float(abs(mat[0, 0]) ** 2),
        "bell_deviation": float(np.max(np.abs(out - np.array([1, 0, 0, -1]) / math.sqrt(2)))),
    }
