"""The representation ``U -> B[U]`` of unitary matrices on Fock space.

``B[U]`` is fixed by ``a_M B[U] = B[U] sum_L U[M, L] a_L`` together with
``<0|B[U] = <0|``. Rows of ``U`` index input modes and columns index output
modes, and states are bras, so for a single photon ``<e_M|B[U] = sum_L U[M, L]
<e_L|`` and ``B[U1 @ U2] = B[U1] B[U2]`` means "U1 first".

Matrix elements between number states are permanents of the row/column
repeated submatrix::

    <n|B[U]|m> = perm(U[rows(n), cols(m)]) / sqrt(prod n! * prod m!)
"""

from __future__ import annotations

import functools
import math
from typing import Iterable

import numpy as np

from .fock import FockSector, FockVector, OccupationVector, enumerate_sector, sector_size

UNITARY_TOL = 1e-9
MAX_SECTOR = 10**6


class NotUnitaryError(ValueError):
    pass


def check_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    """Return ``u`` as a complex square array, raising if it is not unitary."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
        raise NotUnitaryError(f"expected a non-empty square matrix, got shape {u.shape}")
    dev = unitarity_deviation(u)
    if dev > tol:
        raise NotUnitaryError(f"matrix is not unitary (max |UU^dag - I| = {dev:.3g})")
    return u


def unitarity_deviation(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])), initial=0.0))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def permanent(a) -> complex:
    """Permanent by Ryser's formula, visiting column subsets in Gray-code order."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("permanent needs a square matrix")
    if n == 0:
        return 1 + 0j
    cols = [list(a[:, j]) for j in range(n)]
    sums = [0j] * n
    total = 0j
    gray = 0
    for k in range(1, 1 << n):
        # bit that flips between gray(k-1) and gray(k)
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        col = cols[j]
        if gray >> j & 1:
            for i in range(n):
                sums[i] += col[i]
        else:
            for i in range(n):
                sums[i] -= col[i]
        prod = 1 + 0j
        for s in sums:
            prod *= s
        # (-1)^|S| with |S| = popcount(gray)
        if bin(gray).count("1") & 1:
            total -= prod
        else:
            total += prod
    return total * (-1) ** n


def _repeat_indices(occ: Iterable[int]) -> list[int]:
    return [m for m, c in enumerate(occ) for _ in range(c)]


def _factorial_norm(occ) -> float:
    return math.sqrt(math.prod(math.factorial(c) for c in occ))


def matrix_element(u, n_in, n_out) -> complex:
    """``<n_in|B[u]|n_out>``; zero across different photon numbers."""
    u = np.asarray(u, dtype=complex)
    n_in, n_out = OccupationVector(n_in), OccupationVector(n_out)
    if not (n_in.modes == n_out.modes == u.shape[0]):
        raise ValueError(
            f"dimension mismatch: U is {u.shape[0]}x{u.shape[0]}, "
            f"occupations have {n_in.modes} and {n_out.modes} modes")
    if n_in.total() != n_out.total():
        return 0j
    sub = u[np.ix_(_repeat_indices(n_in), _repeat_indices(n_out))]
    return permanent(sub) / (_factorial_norm(n_in) * _factorial_norm(n_out))


def sector_matrix(u, photons: int) -> np.ndarray:
    """Matrix of ``B[u]`` on the sector of ``photons`` photons, in sector basis order."""
    u = np.asarray(u, dtype=complex)
    size = sector_size(u.shape[0], photons)
    if size > MAX_SECTOR:
        raise ValueError(f"sector of size {size} exceeds the {MAX_SECTOR} basis-state guard")
    basis = enumerate_sector(u.shape[0], photons).basis
    out = np.empty((size, size), dtype=complex)
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            out[i, j] = matrix_element(u, a, b)
    return out


# ---------------------------------------------------------------------------
# ladder expansion: <n|B[U] = <0| prod_M (sum_L U[M,L] a_L)^{n_M} / sqrt(n!)
# ---------------------------------------------------------------------------

def _sector_keys(arr: np.ndarray, base: int) -> np.ndarray | None:
    modes = arr.shape[1]
    if modes * math.log2(base) >= 62:
        return None
    weights = base ** np.arange(modes, dtype=np.int64)
    return arr @ weights


@functools.lru_cache(maxsize=256)
def _raise_tables(modes: int, photons: int) -> tuple[np.ndarray, np.ndarray]:
    """Index and sqrt-factor tables for ``a_L`` from sector ``photons`` to ``photons + 1``.

    ``idx[L, i]`` is the position of ``basis[i] + e_L`` in the next sector and
    ``fac[L, i] = sqrt(basis[i][L] + 1)``.
    """
    src = enumerate_sector(modes, photons)
    dst = enumerate_sector(modes, photons + 1)
    arr = src.array
    idx = np.empty((modes, len(src)), dtype=np.int64)
    fac = np.sqrt(arr.T + 1.0)
    base = photons + 2
    dst_keys = _sector_keys(dst.array, base)
    for mode in range(modes):
        raised = arr.copy()
        raised[:, mode] += 1
        if dst_keys is not None:
            keys = _sector_keys(raised, base)
            order = np.argsort(dst_keys)
            idx[mode] = order[np.searchsorted(dst_keys, keys, sorter=order)]
        else:
            idx[mode] = [dst.index(r) for r in raised]
    return idx, fac


def _expand(u: np.ndarray, sequence: tuple[int, ...], cache: dict) -> np.ndarray:
    """``<0| prod_k (sum_L u[seq_k, L] a_L)`` as a dense vector on its sector."""
    if sequence in cache:
        return cache[sequence]
    if not sequence:
        vec = np.ones(1, dtype=complex)
    else:
        prev = _expand(u, sequence[:-1], cache)
        k = len(sequence) - 1
        idx, fac = _raise_tables(u.shape[0], k)
        vec = np.zeros(sector_size(u.shape[0], k + 1), dtype=complex)
        row = u[sequence[-1]]
        for mode in range(u.shape[0]):
            if row[mode] != 0:
                # idx[mode] is injective, so plain fancy-index accumulation is safe
                vec[idx[mode]] += row[mode] * fac[mode] * prev
    cache[sequence] = vec
    return vec


def basis_row(u, n_in, _cache: dict | None = None) -> tuple[FockSector, np.ndarray]:
    """The row ``<n_in|B[u]`` as a dense vector over its photon-number sector."""
    u = np.asarray(u, dtype=complex)
    n_in = OccupationVector(n_in)
    if n_in.modes != u.shape[0]:
        raise ValueError(f"dimension mismatch: U is {u.shape[0]}x{u.shape[0]}, state has {n_in.modes} modes")
    cache = {} if _cache is None else _cache
    vec = _expand(u, tuple(_repeat_indices(n_in)), cache) / _factorial_norm(n_in)
    return enumerate_sector(u.shape[0], n_in.total()), vec


def apply(u, state: FockVector) -> FockVector:
    """``state B[u]``: the new amplitude of ``out`` is ``sum_in amp(in) <in|B[u]|out>``."""
    u = np.asarray(u, dtype=complex)
    if state.modes != u.shape[0]:
        raise ValueError(f"dimension mismatch: U is {u.shape[0]}x{u.shape[0]}, state has {state.modes} modes")
    cache: dict = {}
    acc: dict[int, np.ndarray] = {}
    for occ, amp in state.items():
        if amp == 0:
            continue
        sector, row = basis_row(u, occ, cache)
        if sector.photons in acc:
            acc[sector.photons] += amp * row
        else:
            acc[sector.photons] = amp * row
    amps: dict = {}
    for photons, vec in acc.items():
        basis = enumerate_sector(u.shape[0], photons).basis
        for i in np.flatnonzero(vec):
            amps[basis[i]] = vec[i]
    return FockVector(state.modes, state.truncation, amps, state.lost)


# ---------------------------------------------------------------------------
# functoriality diagnostics
# ---------------------------------------------------------------------------

def direct_sum(u1, u2) -> np.ndarray:
    u1, u2 = np.asarray(u1, dtype=complex), np.asarray(u2, dtype=complex)
    n1, n2 = u1.shape[0], u2.shape[0]
    out = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    out[:n1, :n1] = u1
    out[n1:, n1:] = u2
    return out


def product_check(u1, u2, max_photons: int) -> float:
    """Max deviation of ``B[u1 u2]`` from ``B[u1] B[u2]`` over sectors up to ``max_photons``."""
    u1, u2 = np.asarray(u1, dtype=complex), np.asarray(u2, dtype=complex)
    if u1.shape != u2.shape:
        raise ValueError("product_check needs matrices of equal dimension")
    worst = 0.0
    for n in range(max_photons + 1):
        lhs = sector_matrix(u1 @ u2, n)
        rhs = sector_matrix(u1, n) @ sector_matrix(u2, n)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def direct_sum_check(u1, u2, max_photons: int) -> float:
    """Max deviation of ``B[u1 (+) u2]`` from ``B[u1] (x) B[u2]`` up to ``max_photons`` photons.

    Every pair of basis states of the joint space is compared, including pairs
    in different sectors, where both sides must vanish.
    """
    u1, u2 = np.asarray(u1, dtype=complex), np.asarray(u2, dtype=complex)
    n1, n2 = u1.shape[0], u2.shape[0]
    total = direct_sum(u1, u2)
    worst = 0.0
    blocks1 = {k: sector_matrix(u1, k) for k in range(max_photons + 1)}
    blocks2 = {k: sector_matrix(u2, k) for k in range(max_photons + 1)}
    states = [b for n in range(max_photons + 1) for b in enumerate_sector(n1 + n2, n).basis]
    joint = {n: sector_matrix(total, n) for n in range(max_photons + 1)}
    for a in states:
        a1, a2 = a[:n1], a[n1:]
        for b in states:
            b1, b2 = b[:n1], b[n1:]
            if sum(a1) == sum(b1) and sum(a2) == sum(b2):
                s1 = enumerate_sector(n1, sum(a1))
                s2 = enumerate_sector(n2, sum(a2))
                rhs = (blocks1[sum(a1)][s1.index(a1), s1.index(b1)]
                       * blocks2[sum(a2)][s2.index(a2), s2.index(b2)])
            else:
                rhs = 0j
            if a.total() == b.total():
                s = enumerate_sector(n1 + n2, a.total())
                lhs = joint[a.total()][s.index(a), s.index(b)]
            else:
                lhs = matrix_element(total, a, b)
            worst = max(worst, abs(lhs - rhs))
    return worst
