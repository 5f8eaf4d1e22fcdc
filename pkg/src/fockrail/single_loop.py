"""Closed-form amplitudes of the single-loop computer.

One internal loop holding ``m-`` photons meets the external line, prepared
with ``n-`` photons, at one beam splitter. The line is measured with ``n+``
photons and the loop keeps ``m+ = m- + n- - n+``. Internal basis states are
never mixed, only rescaled, so the block is diagonal up to that shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import BeamSplitterConfig, _expi, _snap


def _comb(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


def _sqrt_factorial_ratio(num: tuple[int, ...], den: tuple[int, ...]) -> float:
    # log-space so that large photon numbers do not overflow
    log = sum(math.lgamma(k + 1) for k in num) - sum(math.lgamma(k + 1) for k in den)
    return math.exp(0.5 * log)


def phase_factor(config: BeamSplitterConfig, m_minus: int, n_minus: int, n_plus: int) -> complex:
    """``exp(i((m-+n-)gamma - (m--n+)tau + (n--n+)rho))``."""
    g, t, r = config.gamma, config.tau, config.rho
    return _expi((m_minus + n_minus) * g - (m_minus - n_plus) * t + (n_minus - n_plus) * r)


def loop_amplitude(config: BeamSplitterConfig, m_minus: int, n_minus: int, n_plus: int) -> complex:
    """``<m- n-|B[U]|n+ m+>`` for the single loop, zero when ``m+ < 0``."""
    if min(m_minus, n_minus, n_plus) < 0:
        raise ValueError("photon counts must be nonnegative")
    m_plus = m_minus + n_minus - n_plus
    if m_plus < 0:
        return 0j
    c, s = _snap(math.cos(config.theta)), _snap(math.sin(config.theta))
    kappa = min(m_minus, n_plus) + min(n_minus, n_plus) - n_plus
    total = 0.0
    for eta in range(kappa + 1):
        total += (_comb(m_minus, min(m_minus, n_plus) - eta)
                  * _comb(n_minus, min(n_minus, n_plus) - (kappa - eta))
                  * (-1) ** eta * c ** (2 * eta) * s ** (2 * (kappa - eta)))
    return (_sqrt_factorial_ratio((n_plus, m_plus), (m_minus, n_minus))
            * phase_factor(config, m_minus, n_minus, n_plus)
            * (-1) ** min(n_minus, m_plus)
            * c ** abs(m_minus - n_plus) * s ** abs(n_minus - n_plus)
            * total)


def vacuum_diagonal(config: BeamSplitterConfig, m: int) -> complex:
    """``<m|<0|B[U]|0> = e^{im(gamma - tau)} cos^m theta``."""
    return _expi(m * (config.gamma - config.tau)) * _snap(math.cos(config.theta)) ** m


def one_photon_diagonal(config: BeamSplitterConfig, m: int) -> complex:
    """``<m|<1|B[U]|1> = -e^{i((m+1)gamma - (m-1)tau)} cos^{m-1} theta (m - (1+m) cos^2 theta)``."""
    c = _snap(math.cos(config.theta))
    # expanded so that m = 0 does not divide by cos theta
    poly = m * c ** (m - 1) - (1 + m) * c ** (m + 1) if m else -c
    return -_expi((m + 1) * config.gamma - (m - 1) * config.tau) * poly


@dataclass(frozen=True)
class LoopBlock:
    """Internal map of one post-selected loop: ``<m| -> amplitudes[m] <m + shift|``."""

    config: BeamSplitterConfig
    n_minus: int
    n_plus: int
    amplitudes: np.ndarray

    @property
    def shift(self) -> int:
        return self.n_minus - self.n_plus

    @property
    def m_max(self) -> int:
        return len(self.amplitudes) - 1

    def matrix(self) -> np.ndarray:
        """Dense matrix from internal counts ``0..m_max`` to ``0..m_max + shift``."""
        rows = self.m_max + 1
        cols = max(rows + self.shift, 0)
        out = np.zeros((rows, cols), dtype=complex)
        for m, amp in enumerate(self.amplitudes):
            if 0 <= m + self.shift < cols:
                out[m, m + self.shift] = amp
        return out


def loop_block(config: BeamSplitterConfig, n_minus: int, n_plus: int, m_max: int) -> LoopBlock:
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    amps = np.array([loop_amplitude(config, m, n_minus, n_plus) for m in range(m_max + 1)],
                    dtype=complex)
    return LoopBlock(config, n_minus, n_plus, amps)
