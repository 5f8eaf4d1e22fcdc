"""Self-checks behind ``fockrail verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuits import HADAMARD, BeamSplitterConfig, beam_splitter, random_op, single_loop, verify_interchange
from .encodings import ParityQuditEncoding, coherent_state, exph, exph_series, implement_bounds, loop_map, mixing_weights
from .fock import FockVector, enumerate_sector
from .functor import apply, direct_sum_check, matrix_element, product_check, random_unitary, sector_matrix
from .klm import NS_SUCCESS, controlled_z, dual_rail_cz_check, nd_coefficients_functor, nonlinear_sign
from .single_loop import loop_amplitude, one_photon_diagonal, vacuum_diagonal


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    target: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.target is None:
            return f"{status} {self.name} = {self.value:.6g} (limit {self.limit:g})"
        return f"{status} {self.name} = {self.value:.12g} (expected {self.target:.12g} within {self.limit:g})"


def below(name: str, value: float, limit: float) -> Check:
    return Check(name, float(value), limit, bool(value < limit))


def equals(name: str, value: float, target: float, tol: float) -> Check:
    return Check(name, float(value), tol, bool(abs(value - target) <= tol), float(target))


def interchange_suite(seed: int = 7, count: int = 100) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        m1, m2, n1, n2 = (int(x) for x in rng.integers(1, 3, size=4))
        c11, c21 = random_op(m1, n1, rng), random_op(m2, n1, rng)
        c12, c22 = random_op(m1, n2, rng), random_op(m2, n2, rng)
        worst = max(worst, verify_interchange(c11, c21, c12, c22))
    return [below("interchange max deviation", worst, 1e-12)]


def functor_suite(seed: int = 11, count: int = 20) -> list[Check]:
    rng = np.random.default_rng(seed)
    prod = dsum = unit = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 5))
        u1, u2 = random_unitary(n, rng), random_unitary(n, rng)
        prod = max(prod, product_check(u1, u2, 3))
        k = int(rng.integers(1, 4))
        dsum = max(dsum, direct_sum_check(random_unitary(k, rng), random_unitary(4 - k, rng), 3))
        for photons in range(4):
            s = sector_matrix(u1, photons)
            unit = max(unit, float(np.max(np.abs(s @ s.conj().T - np.eye(len(s))))))
    leak = 0.0
    u = random_unitary(3, rng)
    for photons in range(4):
        for occ in enumerate_sector(3, photons).basis:
            out = apply(u, FockVector.basis(occ))
            leak = max(leak, sum(abs(v) ** 2 for k, v in out.items() if k.total() != photons))
    return [below("B[U1 U2] - B[U1] B[U2]", prod, 1e-9),
            below("B[U1 + U2] - B[U1] x B[U2]", dsum, 1e-9),
            below("sector unitarity", unit, 1e-9),
            below("cross-sector leakage", leak, 1e-12)]


def hom_suite() -> list[Check]:
    h = beam_splitter(HADAMARD)
    a11 = matrix_element(h, (1, 1), (1, 1))
    a20 = matrix_element(h, (1, 1), (2, 0))
    return [below("|<11|B[H]|11>|^2", abs(a11) ** 2, 1e-24),
            equals("|<11|B[H]|20>|^2", abs(a20) ** 2, 0.5, 1e-12)]


def ns_suite() -> list[Check]:
    spec, report = nonlinear_sign()
    checks = [equals("p^2", report.success_probability, (3 - math.sqrt(2)) / 7, 1e-12),
              below("coefficients vs (p, p, -p)", report.deviations["coefficients"], 1e-10)]
    for key in ("phase0", "phase1", "phase2", "angle01", "angle12"):
        checks.append(below(f"condition {key}", report.deviations[key], 1e-12))
    via_functor = nd_coefficients_functor(spec, 3)
    checks.append(below("closed form vs generator", float(np.max(np.abs(via_functor[:3] - report.coefficients))), 1e-10))
    return checks


def cz_suite() -> list[Check]:
    _, report = controlled_z()
    dual = dual_rail_cz_check()
    return [equals("success probability", report.success_probability, (11 - 6 * math.sqrt(2)) / 49, 1e-12),
            below("action vs p^2 diag(1,1,1,-1)", report.deviations["action"], 1e-9),
            below("dual-rail deviation", dual["deviation"], 1e-9),
            below("| success - NS success^2 |", abs(report.success_probability - NS_SUCCESS ** 2), 1e-12)]


def exph_suite(seed: int = 3) -> list[Check]:
    rng = np.random.default_rng(seed)
    thetas = list(np.linspace(-8, 8, 41))
    thetas += [8 * np.exp(1j * phi) for phi in rng.uniform(0, 2 * math.pi, 20)]
    worst = 0.0
    for d in range(2, 6):
        for b in range(d):
            for th in thetas:
                worst = max(worst, abs(exph(b, d, th) - exph_series(b, d, th)))
    hyper = 0.0
    for th in np.linspace(-8, 8, 33):
        hyper = max(hyper, abs(exph(0, 2, th) - math.cosh(th)) / math.cosh(th),
                    abs(exph(1, 2, th) - math.sinh(th)) / math.cosh(th))
    mixture = 0.0
    for d in range(2, 6):
        for alpha in (0.5, 1.0, 1.5 + 0.5j, 2.0):
            enc = ParityQuditEncoding(d, alpha)
            p = mixing_weights(enc)
            coh = coherent_state(alpha, enc.truncation)
            mix: dict = {}
            for b in range(d):
                for k, v in enc.represent(b).items():
                    mix[k] = mix.get(k, 0) + p[b] * v
            diff = math.sqrt(sum(abs(mix.get(k, 0) - coh[k]) ** 2 for k in set(mix) | set(coh.amplitudes)))
            mixture = max(mixture, diff)
    order = 0
    enc = ParityQuditEncoding(3, 1.2)
    for _ in range(50):
        phys = loop_map(BeamSplitterConfig(*rng.uniform(0, 2 * math.pi, 4)), int(rng.integers(0, 3)),
                        int(rng.integers(0, 3)), enc.truncation)
        implemented = enc.implemented(phys)
        for bm in range(3):
            for bp in range(3):
                mu, eps = implement_bounds(enc, phys, bm, bp)
                value = abs(implemented[bm, bp]) ** 2
                tol = 1e-12
                if not (eps >= 0 and mu - eps - tol <= value <= mu + eps + tol):
                    order += 1
    return [below("exph closed form vs series", worst, 1e-12),
            below("binary case vs cosh/sinh (relative)", hyper, 1e-15),
            below("coherent mixture identity", mixture, 1e-8),
            below("bound violations", order, 0.5)]


def singleloop_suite(seed: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(25):
        config = BeamSplitterConfig(*rng.uniform(0, 2 * math.pi, 4))
        u = single_loop(config).generator
        for m in range(5):
            for nm in range(5):
                for np_ in range(5):
                    mp = m + nm - np_
                    ref = matrix_element(u, (m, nm), (np_, mp)) if mp >= 0 else 0j
                    worst = max(worst, abs(loop_amplitude(config, m, nm, np_) - ref))
    diag = 0.0
    for _ in range(10):
        m = int(rng.integers(0, 6))
        config = BeamSplitterConfig(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi), 0.0,
                                    rng.uniform(0, 2 * math.pi))
        diag = max(diag, abs(loop_amplitude(config, m, 0, 0) - vacuum_diagonal(config, m)),
                   abs(loop_amplitude(config, m, 1, 1) - one_photon_diagonal(config, m)))
    return [below("closed form vs functor", worst, 1e-10),
            below("diagonal formulas", diag, 1e-12)]


SUITES: dict[str, Callable[[], list[Check]]] = {
    "interchange": interchange_suite,
    "functor": functor_suite,
    "hom": hom_suite,
    "ns": ns_suite,
    "cz": cz_suite,
    "exph": exph_suite,
    "singleloop": singleloop_suite,
}
