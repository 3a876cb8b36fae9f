"""Infinite-lattice localization probabilities by Riemann quadrature.

Only the two unimodular-constant eigenvalue branches (lambda = -1 and +1)
survive the double limit T -> infinity, N -> infinity; the localization
probability for an (initial, observed) chirality pair is I1^2 + I2^2 where
I_k is the [0, pi]^2 integral of the degeneracy-class sum of eigenvector
component products, normalized by 1/(4 pi^2) for the four-member momentum
orbit (equivalently 1/(8 pi^2) for the n <-> m symmetrized eight-member sum).

At lambda = +-1 every family's eigenvector components factor into pure-x and
pure-y terms, so each integral reduces to a bilinear form u_x^T K u_y with a
single M x M kernel per momentum-sign variant; a full 16-pair evaluation at
M = 512 costs a few milliseconds.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coins import COIN_FAMILIES
from .spectral import c_table_p24y1
from .walk import CHIRALITIES, chirality_index

__all__ = [
    "QuadratureSpec", "theta_grid",
    "pbar_matrix", "pbar_infinity_pair", "pbar_infinity_total",
    "sweep_theta", "theorem36_check", "convergence_delta",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint rule on [0, pi]^2 with M nodes per axis."""

    M: int = 512

    def __post_init__(self):
        if self.M < 16:
            raise ValueError("quadrature needs at least 16 nodes per axis")

    def nodes(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * np.pi / self.M


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (-np.pi < theta < np.pi):
        raise ValueError("localization requires theta strictly inside (-pi, pi)")
    return theta


def _factors_y1(theta: float, lam: float, ex: np.ndarray, ey: np.ndarray):
    """1D factors (px, qy), each (4, M), of the lambda = +-1 eigenvectors.

    Written in half-angle variables so no denominator vanishes at interior
    midpoint nodes for any theta in (-pi, pi)."""
    t, u = np.sin(theta / 2), np.cos(theta / 2)
    A = u * lam / ex - t
    B = u - lam * t * ey
    one_x, one_y = np.ones_like(ex), np.ones_like(ey)
    px = np.stack([lam / (ex * A), 1 / A, one_x, one_x])
    qy = np.stack([B, B, one_y, lam * ey])
    return px, qy


def _factors_x1(theta: float, lam: float, ex: np.ndarray, ey: np.ndarray):
    t, u = np.sin(theta / 2), np.cos(theta / 2)
    nx1 = u - t * lam / ex
    dx2 = t - u * lam * ex
    nx3 = t - u * lam / ex
    dy1 = t - u * lam * ey
    ny2 = u - lam * t * ey
    dy3 = u - lam * t / ey
    one_x, one_y = np.ones_like(ex), np.ones_like(ey)
    px = np.stack([nx1 / dx2, one_x, -nx1, -nx3])
    qy = np.stack([ny2 / dy1, one_y, 1 / dy1, 1 / dy3])
    return px, qy


def _factors_z1(theta: float, lam: float, ex: np.ndarray, ey: np.ndarray):
    px, qy = _factors_y1(theta, lam, ex, np.conj(ey))
    return px, qy[[0, 1, 3, 2]]


def _factors_x3(theta: float, lam: float, ex: np.ndarray, ey: np.ndarray):
    s, c = np.sin(theta), np.cos(theta)
    one_x, one_y = np.ones_like(ex), np.ones_like(ey)
    px = np.stack([1 / (ex - lam), lam * ex / (ex - lam), one_x, one_x])
    qy = np.stack([-s * (ey - lam) / (1 + c), -s * (ey - lam) / (1 + c), one_y, lam * ey])
    return px, qy


_FACTORS = {"p24y1": _factors_y1, "p34x1": _factors_x1,
            "p23z1": _factors_z1, "x3": _factors_x3}


def _integral_matrix_generic(family: str, theta: float, M: int, k: int) -> np.ndarray:
    """I_k[a, b] = class-sum integral of v_a conj(v_b), all 16 pairs."""
    xs = QuadratureSpec(M).nodes()
    lam = -1.0 if k == 1 else 1.0
    e_pos = np.exp(1j * xs)
    out = np.zeros((4, 4), dtype=complex)
    fac = _FACTORS[family]
    for ex in (e_pos, np.conj(e_pos)):
        for ey in (e_pos, np.conj(e_pos)):
            px, qy = fac(theta, lam, ex, ey)
            K = 1.0 / np.einsum("im,in->mn", np.abs(px) ** 2, np.abs(qy) ** 2)
            for a in range(4):
                for b in range(4):
                    ux = px[a] * np.conj(px[b])
                    uy = qy[a] * np.conj(qy[b])
                    out[a, b] += ux @ K @ uy
    return out / (4 * M * M)


def _integral_matrix_table(theta: float, M: int, k: int) -> np.ndarray:
    """p24y1 closed-form route: midpoint sums of the symmetrized class-sum
    table, normalized by 1/(8 pi^2). The table has five distinct entries."""
    xs = QuadratureSpec(M).nodes()
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    classes = {(1, 1): None, (1, 2): None, (1, 3): None, (1, 4): None, (2, 4): None}
    for pair in classes:
        classes[pair] = float(c_table_p24y1(*pair, k, theta, X, Y).sum()) / (8 * M * M)
    lookup = {
        frozenset((1,)): classes[(1, 1)],
        frozenset((1, 2)): classes[(1, 2)], frozenset((3, 4)): classes[(1, 2)],
        frozenset((1, 3)): classes[(1, 3)],
        frozenset((1, 4)): classes[(1, 4)], frozenset((2, 3)): classes[(1, 4)],
        frozenset((2, 4)): classes[(2, 4)],
    }
    out = np.empty((4, 4))
    for a in range(4):
        for b in range(4):
            key = frozenset((a + 1, b + 1)) if a != b else frozenset((1,))
            out[a, b] = lookup[key]
    return out


def _integrals(family: str, theta: float, M: int, k: int) -> np.ndarray:
    if family == "p24y1":
        return _integral_matrix_table(theta, M, k)
    return _integral_matrix_generic(family, theta, M, k).real


def pbar_matrix(family: str, theta: float, quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Localization probabilities for all pairs: entry [l(S')-1, l(S)-1] is
    the infinite-lattice time-averaged probability of observing |S'> at the
    origin for the walk started there in |S>."""
    if family not in COIN_FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    theta = _check_theta(theta)
    I1 = _integrals(family, theta, quad.M, 1)
    I2 = _integrals(family, theta, quad.M, 2)
    return I1**2 + I2**2


def pbar_infinity_pair(family: str, theta: float, S: str, S_prime: str,
                       quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Limiting time-averaged probability for one (initial, observed) pair."""
    pm = pbar_matrix(family, theta, quad)
    return float(pm[chirality_index(S_prime) - 1, chirality_index(S) - 1])


def pbar_infinity_total(family: str, theta: float, S: str,
                        quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Total trapping probability at the origin for initial coin state |S>."""
    pm = pbar_matrix(family, theta, quad)
    return float(pm[:, chirality_index(S) - 1].sum())


def convergence_delta(family: str, theta: float, quad: QuadratureSpec) -> float:
    """Largest pairwise change when halving the node count; a value above
    1e-4 flags non-convergence."""
    coarse = pbar_matrix(family, theta, QuadratureSpec(max(quad.M // 2, 16)))
    fine = pbar_matrix(family, theta, quad)
    return float(np.abs(fine - coarse).max())


def theta_grid(num_points: int = 400) -> np.ndarray:
    """Equidistant interior points of the open interval (-pi, pi)."""
    if num_points < 2:
        raise ValueError("need at least 2 sweep points")
    return np.linspace(-np.pi, np.pi, num_points + 2)[1:-1]


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("GW_THREADS", "1"))
    return max(1, threads)


def sweep_theta(family: str, S_list=("R",), num_points: int = 400,
                quad: QuadratureSpec = QuadratureSpec(),
                threads: int | None = None) -> list[dict]:
    """Sweep the open theta interval; one row per (theta, S) with the total
    and the full 16-pair breakdown (pairs are S-independent)."""
    grid = theta_grid(num_points)
    S_list = [S.upper() for S in S_list]
    workers = _resolve_threads(threads)

    def at(theta):
        return pbar_matrix(family, theta, quad)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            mats = list(pool.map(at, grid))
    else:
        mats = [at(th) for th in grid]
    rows = []
    for theta, pm in zip(grid, mats):
        pairs = {
            f"p_{si}{sj}": float(pm[chirality_index(sj) - 1, chirality_index(si) - 1])
            for si in CHIRALITIES for sj in CHIRALITIES
        }
        for S in S_list:
            rows.append({
                "family": family,
                "S": S,
                "theta": float(theta),
                "p_total": float(pm[:, chirality_index(S) - 1].sum()),
                **pairs,
                "quad_M": quad.M,
            })
    return rows


def theorem36_check(quad: QuadratureSpec = QuadratureSpec(), grid: int = 25,
                    families=("p34x1", "p24y1", "p23z1"),
                    threads: int | None = None) -> dict:
    """Max deviation of the same-chirality localization probability from 1/8
    over a theta grid, for the generalized Grover families."""
    thetas = theta_grid(grid)
    workers = _resolve_threads(threads)
    worst = 0.0
    worst_at = None
    for family in families:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                mats = list(pool.map(lambda th: pbar_matrix(family, th, quad), thetas))
        else:
            mats = [pbar_matrix(family, th, quad) for th in thetas]
        for theta, pm in zip(thetas, mats):
            dev = float(np.abs(np.diag(pm) - 0.125).max())
            if dev > worst:
                worst, worst_at = dev, (family, float(theta))
    return {
        "families": list(families),
        "grid": grid,
        "quad_M": quad.M,
        "max_abs_deviation": worst,
        "worst_at": worst_at,
        "passed": worst < 1e-6,
    }
