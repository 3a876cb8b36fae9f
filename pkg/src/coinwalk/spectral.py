"""Fourier-block spectral analysis of the walk evolution operator.

The evolution operator block at quantum numbers (n, m) is D_{n,m} C with
D_{n,m} = diag(w^-n, w^n, w^-m, w^m), w = exp(2 pi i / N). For the four named
coin families the eigenpairs have closed forms; a dense eigensolver backs
them up wherever a formula denominator degenerates or eigenvalues collide.
Eigenvalues are ordered k = 1..4 as (-1, +1, e^{-i a}, e^{+i a}) with
a in [0, pi].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coins import Coin, COIN_FAMILIES, coin_from_theta
from .walk import WalkState, chirality_index

__all__ = [
    "SpectralBlock", "DegeneracyClass",
    "build_block", "closed_form_eigs", "coin_eigensystem",
    "omega_class", "c_coefficient", "c_table_p24y1",
    "finite_N_pbar", "finite_N_pbar_matrix",
    "eta_matrix", "reconstruct_state", "spectrum_rows", "coefficient_rows",
]

_RESID_TOL = 1e-11
_DEGEN_TOL = 1e-9


def _family_theta(coin) -> tuple[str, float] | None:
    if isinstance(coin, Coin) and coin.family in COIN_FAMILIES and coin.theta is not None:
        if coin.degenerate:
            raise ValueError("spectral closed forms exclude theta = +-pi")
        return coin.family, float(coin.theta)
    return None


def _coin_matrix(coin) -> np.ndarray:
    return coin.entries if isinstance(coin, Coin) else np.asarray(coin, dtype=complex)


def _half_angle(s, c):
    """sin(theta/2), cos(theta/2) recovered from sin(theta), cos(theta);
    valid for theta away from +-pi, which the closed forms exclude anyway."""
    u = np.sqrt((1 + c) / 2)
    return s / (2 * u), u


def closed_form_eigenvalues(family: str, theta: float, zn, zm) -> np.ndarray:
    """Eigenvalues (..., 4) of the block at momentum angles zn, zm."""
    zn, zm = np.broadcast_arrays(np.asarray(zn, dtype=float), np.asarray(zm, dtype=float))
    if family == "x3":
        ca = ((1 + np.cos(theta)) * np.cos(zn) + (1 - np.cos(theta)) * np.cos(zm)) / 2
        ang = np.arccos(np.clip(ca, -1.0, 1.0))
    else:
        s = np.sin(theta) * (np.cos(zn) + np.cos(zm))
        ang = np.arccos(np.clip(s / 2, -1.0, 1.0))
    lam3 = np.exp(-1j * ang)
    return np.stack([-np.ones_like(lam3), np.ones_like(lam3), lam3, np.conj(lam3)], axis=-1)


def _vec_y1(s, c, lam, wn, wm):
    # half-angle form: the common sin/cos half-angle factors of numerator
    # and denominator cancel, keeping the expressions finite at sin = 0
    t, u = _half_angle(s, c)
    v2 = (u - lam * t * wm) / (u * lam / wn - t)
    v1 = (t * lam / wn - u) / (t - u * lam * wn) * v2
    v4 = (u * lam * wm - t) / (u - t * lam / wm)
    return np.stack([v1, v2, np.ones_like(v2), v4], axis=-1)


def _vec_x1(s, c, lam, wn, wm):
    t, u = _half_angle(s, c)
    r1 = (u - t * lam / wn) / (t - u * lam * wm)
    v1 = r1 * (u - lam * t * wm) / (t - u * lam * wn)
    v4 = (t - u * lam / wn) / (u - lam * t / wm)
    return np.stack([v1, np.ones_like(v1), -r1, -v4], axis=-1)


def _vec_z1(s, c, lam, wn, wm):
    # the z1 coin is the y1 coin conjugated by the (34) swap, which sends the
    # block at (n, m) to the y1 block at (n, N - m)
    v = _vec_y1(s, c, lam, wn, np.conj(wm))
    return v[..., [0, 1, 3, 2]]


def _vec_x3(s, c, lam, a, b):
    den = (c + 1) * lam**2 * (a**2 + 1) + a * b * (1 - c) * (lam**2 - 1) \
        - 2 * a * lam * (lam**2 + c)
    v1 = -(a - lam) * (b - lam) * s
    v2 = -a * (b - lam) * (a * lam - 1) * s
    v4 = b * (a - lam) * (a * lam - 1) * (c + 1)
    return np.stack(np.broadcast_arrays(v1, v2, den, v4), axis=-1)


_VEC = {"p24y1": _vec_y1, "p34x1": _vec_x1, "p23z1": _vec_z1, "x3": _vec_x3}


def closed_form_eigenvectors(family: str, theta: float, lam, wn, wm) -> np.ndarray:
    """Unnormalized eigenvector formula values, shape (..., 4)."""
    s, c = np.sin(theta), np.cos(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _VEC[family](s, c, lam, wn, wm)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(v) > 1e-8)
    ph = v[idx] / abs(v[idx])
    return v / ph


def _numeric_block(U: np.ndarray, target_lams: np.ndarray | None):
    """Dense eigensolve of one 4x4 block. When closed-form eigenvalues are
    supplied the numeric vectors are matched onto them; degenerate groups are
    orthonormalized by QR in canonical order and phase-fixed."""
    lam, V = np.linalg.eig(U)
    if target_lams is None:
        order = np.lexsort((np.round(lam.imag, 9), np.round(np.angle(lam), 9)))
        lam, V = lam[order], V[:, order]
        target_lams = lam
    groups: list[list[int]] = []
    for k in range(4):
        for g in groups:
            if abs(target_lams[k] - target_lams[g[0]]) < _DEGEN_TOL:
                g.append(k)
                break
        else:
            groups.append([k])
    out = np.zeros((4, 4), dtype=complex)
    used = np.zeros(4, dtype=bool)
    for g in groups:
        cols = []
        for k in g:
            d = np.abs(lam - target_lams[k])
            d[used] = np.inf
            j = int(np.argmin(d))
            used[j] = True
            cols.append(j)
        Vg = V[:, cols]
        if len(g) > 1:
            Vg, _ = np.linalg.qr(Vg)
        for i, k in enumerate(g):
            out[k] = _phase_fix(Vg[:, i])
    return np.asarray(target_lams), out


def _blocks_tensor(C: np.ndarray, N: int) -> np.ndarray:
    q = np.arange(N)
    w = np.exp(2j * np.pi * q / N)
    WN, WM = np.meshgrid(w, w, indexing="ij")
    d = np.stack([1 / WN, WN, 1 / WM, WM], axis=-1)
    return d[..., :, None] * C


@lru_cache(maxsize=32)
def _family_eigensystem_cached(family: str, theta: float, N: int):
    q = np.arange(N)
    zn = 2 * np.pi * q / N
    ZN, ZM = np.meshgrid(zn, zn, indexing="ij")
    WN, WM = np.exp(1j * ZN), np.exp(1j * ZM)
    lams = closed_form_eigenvalues(family, theta, ZN, ZM)          # (N,N,4)
    vecs = np.empty((N, N, 4, 4), dtype=complex)                   # [n,m,k,:]
    for k in range(4):
        vecs[:, :, k, :] = closed_form_eigenvectors(family, theta, lams[..., k], WN, WM)
    C = coin_from_theta(family, theta).entries
    U = _blocks_tensor(C, N)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        norms = np.sqrt((vecs.real**2 + vecs.imag**2).sum(axis=-1))
        vecs = vecs / norms[..., None]
        Uv = np.einsum("nmij,nmkj->nmki", U, vecs)
        err = np.abs(Uv - lams[..., None] * vecs)
        resid = np.sqrt((err * err).sum(axis=-1))
    ok = np.isfinite(resid) & (resid <= _RESID_TOL) & np.isfinite(norms) & (norms > 1e-12)
    bad = ~ok.all(axis=-1)
    for a in range(4):
        for b in range(a + 1, 4):
            bad |= np.abs(lams[..., a] - lams[..., b]) < _DEGEN_TOL
    fallback = np.zeros((N, N), dtype=bool)
    for n, m in zip(*np.nonzero(bad)):
        lams[n, m], vecs[n, m] = _numeric_block(U[n, m], lams[n, m])
        fallback[n, m] = True
    for arr in (lams, vecs, fallback):
        arr.setflags(write=False)
    return lams, vecs, fallback, U


def coin_eigensystem(coin, N: int):
    """Eigensystem of all N^2 blocks: eigenvalues (N,N,4), unit eigenvectors
    (N,N,4,4) indexed [n,m,k,:], fallback mask (N,N), blocks (N,N,4,4)."""
    fam = _family_theta(coin)
    if fam is not None:
        return _family_eigensystem_cached(fam[0], fam[1], N)
    U = _blocks_tensor(_coin_matrix(coin), N)
    lams = np.empty((N, N, 4), dtype=complex)
    vecs = np.empty((N, N, 4, 4), dtype=complex)
    for n in range(N):
        for m in range(N):
            lams[n, m], vecs[n, m] = _numeric_block(U[n, m], None)
    return lams, vecs, np.ones((N, N), dtype=bool), U


@dataclass(frozen=True)
class SpectralBlock:
    """One Fourier block with its ordered eigenpairs."""

    n: int
    m: int
    N: int
    matrix: np.ndarray          # (4, 4)
    eigenvalues: np.ndarray     # (4,)
    eigenvectors: np.ndarray    # (4, 4), row k is the unit eigenvector for k
    fallback: bool

    @property
    def omega(self) -> complex:
        return complex(np.exp(2j * np.pi / self.N))

    @property
    def zeta(self) -> tuple[float, float]:
        return 2 * np.pi * self.n / self.N, 2 * np.pi * self.m / self.N

    def residual(self) -> float:
        r = np.einsum("ij,kj->ki", self.matrix, self.eigenvectors) \
            - self.eigenvalues[:, None] * self.eigenvectors
        return float(np.linalg.norm(r, axis=1).max())


def build_block(coin, n: int, m: int, N: int) -> SpectralBlock:
    """Fourier block D_{n,m} C with eigenpairs attached."""
    if not (0 <= n < N and 0 <= m < N):
        raise ValueError("quantum numbers must lie in 0..N-1")
    lams, vecs, fb, U = coin_eigensystem(coin, N)
    return SpectralBlock(n, m, N, U[n, m], lams[n, m], vecs[n, m], bool(fb[n, m]))


def closed_form_eigs(family: str, theta: float, n: int, m: int, N: int):
    """Eigenpairs [(lam, v), ...] of a family block; vectors have unit norm
    and come from the closed forms except where those degenerate."""
    blk = build_block(coin_from_theta(family, theta), n, m, N)
    return list(zip(blk.eigenvalues, blk.eigenvectors))


@dataclass(frozen=True)
class DegeneracyClass:
    """Quantum numbers sharing a block spectrum."""

    representative: tuple[int, int]
    members: tuple[tuple[int, int], ...]


def omega_class(n: int, m: int, N: int, symmetric: bool = True) -> DegeneracyClass:
    """Degeneracy class of a representative (n, m), 0 <= n, m <= (N-1)/2.

    Block spectra depend on the momentum cosines only, so each index folds as
    q -> N - q; symmetric=True also folds n <-> m (the generalized Grover
    families, whose spectra are symmetric in the two momenta), while
    symmetric=False keeps the axes separate (the x3 family)."""
    half = (N - 1) // 2
    if not (0 <= n <= half and 0 <= m <= half):
        raise ValueError("representative must satisfy 0 <= n, m <= (N-1)/2")
    if (n, m) == (0, 0):
        return DegeneracyClass((0, 0), ((0, 0),))

    def orbit(a, b):
        return {(aa % N, bb % N) for aa in (a, N - a) for bb in (b, N - b)}

    members = orbit(n, m)
    if symmetric:
        members |= orbit(m, n)
    return DegeneracyClass((n, m), tuple(sorted(members)))


def c_coefficient(coin, S_prime: str, S: str, n: int, m: int, k: int, N: int) -> complex:
    """Degeneracy-class sum c for the origin-localized canonical initial
    state |S> observed in coin state |S'>:

        sum over (n', m') in the class of v_{l(S')} conj(v_{l(S)})

    with unit eigenvectors, so the norm factors are already absorbed."""
    if k not in (1, 2, 3, 4):
        raise ValueError("k must be in 1..4")
    fam = _family_theta(coin)
    symmetric = fam is None or fam[0] != "x3"
    cls = omega_class(n, m, N, symmetric=symmetric)
    lams, vecs, _, _ = coin_eigensystem(coin, N)
    a, b = chirality_index(S_prime) - 1, chirality_index(S) - 1
    return complex(sum(vecs[nn, mm, k - 1, a] * np.conj(vecs[nn, mm, k - 1, b])
                       for nn, mm in cls.members))


def c_table_p24y1(l_sp: int, l_s: int, k: int, theta: float, zn: float, zm: float):
    """Closed-form class sums for the p24y1 family, k in {1, 2}.

    Arguments are the chirality indices l(S'), l(S), the branch k and the
    momentum angles. Vectorizes over zn/zm arrays.
    """
    if k not in (1, 2):
        raise ValueError("the closed-form table covers k in {1, 2}")
    s, c = np.sin(theta), np.cos(theta)
    cx, cy = np.cos(zn), np.cos(zm)
    if l_sp == l_s:
        return 2.0 * np.ones_like(np.asarray(cx, dtype=float))
    pair = frozenset((l_sp, l_s))
    if k == 1:
        den = 2 + s * (cx + cy)
        if pair in (frozenset((1, 2)), frozenset((3, 4))):
            num = -2 * (cx + cy + 2 * s * cx * cy)
        elif pair == frozenset((1, 3)):
            num = 2 * (1 + c + (1 - c) * cx * cy + s * (cx + cy))
        elif pair in (frozenset((1, 4)), frozenset((2, 3))):
            num = -2 * (cx + cy + s + s * cx * cy)
        else:  # {2, 4}
            num = 2 * ((1 + c) * cx * cy + (1 - c) + s * (cx + cy))
    else:
        den = 2 - s * (cx + cy)
        if pair in (frozenset((1, 2)), frozenset((3, 4))):
            num = 2 * (cx + cy - 2 * s * cx * cy)
        elif pair == frozenset((1, 3)):
            num = 2 * (1 + c + (1 - c) * cx * cy - s * (cx + cy))
        elif pair in (frozenset((1, 4)), frozenset((2, 3))):
            num = 2 * (cx + cy - s - s * cx * cy)
        else:  # {2, 4}
            num = 2 * ((1 + c) * cx * cy + (1 - c) - s * (cx + cy))
    return num / den


def _cluster_circle(lams: np.ndarray, tol: float = _DEGEN_TOL) -> np.ndarray:
    """Group labels for unimodular eigenvalues equal within tol (circular)."""
    order = np.argsort(np.angle(lams), kind="stable")
    labels = np.empty(len(lams), dtype=int)
    current = -1
    prev = None
    for idx in order:
        if prev is None or abs(lams[idx] - prev) > tol:
            current += 1
        labels[idx] = current
        prev = lams[idx]
    # circular wrap: last cluster may touch the first across angle +-pi
    if current > 0:
        first = order[0]
        last = order[-1]
        if abs(lams[first] - lams[last]) <= tol:
            labels[labels == labels[last]] = labels[first]
    return labels


def finite_N_pbar(coin, S_prime: str, S: str, N: int) -> float:
    """Exact T -> infinity time average of the probability of observing the
    walker at the origin in |S'>, started at the origin in |S>, on Z_N.

    Cross terms of distinct eigenvalues average out, so the value is the sum
    over distinct eigenvalues of |sum of spectral weights|^2 / N^4. Weights
    are grouped by actual eigenvalue equality, which handles every degenerate
    parameter combination uniformly.
    """
    return float(finite_N_pbar_matrix(coin, N)[chirality_index(S_prime) - 1,
                                               chirality_index(S) - 1])


def finite_N_pbar_matrix(coin, N: int) -> np.ndarray:
    """All 16 origin time averages at once: entry [l(S')-1, l(S)-1]."""
    lams, vecs, _, _ = coin_eigensystem(coin, N)
    flat_l = lams.reshape(-1)
    flat_v = vecs.reshape(-1, 4)
    labels = _cluster_circle(flat_l)
    ngroups = labels.max() + 1
    out = np.zeros((4, 4))
    w = np.einsum("ba,bc->bac", flat_v, np.conj(flat_v))   # (B, 4, 4) outer
    sums = np.zeros((ngroups, 4, 4), dtype=complex)
    np.add.at(sums, labels, w)
    out = (np.abs(sums) ** 2).sum(axis=0) / N**4
    return out


def eta_matrix(coin, N: int) -> np.ndarray:
    """All 4N^2 evolution-operator eigenvectors as columns, in canonical
    index order, columns ordered by (n, m, k)."""
    lams, vecs, _, _ = coin_eigensystem(coin, N)
    half = (N - 1) // 2
    xs = np.arange(-half, half + 1)
    w = np.exp(2j * np.pi / N)
    ph = w ** np.outer(np.arange(N), xs)                   # ph[n, ix]
    # eta[s, ix, iy] = v_s * w^{n x + m y} / N
    eta = np.einsum("nmks,nx,my->nmksxy", vecs, ph, ph) / N
    cols = eta.reshape(N * N * 4, 4, N, N)
    # canonical flat order: iy slowest, ix, then chirality
    cols = cols.transpose(0, 3, 2, 1).reshape(N * N * 4, -1)
    return cols.T


def reconstruct_state(coin, N: int, S: str, t: int) -> WalkState:
    """Spectral reconstruction of the state after t steps from the canonical
    initial state |S> at the origin."""
    lams, vecs, _, _ = coin_eigensystem(coin, N)
    b = chirality_index(S) - 1
    # sum over k of lam^t v conj(v_b); phases reattach the plane waves
    M = np.einsum("nmk,nmks,nmk->nms", lams**t, vecs, np.conj(vecs[:, :, :, b]))
    half = (N - 1) // 2
    xs = np.arange(-half, half + 1)
    w = np.exp(2j * np.pi / N)
    ph = w ** np.outer(np.arange(N), xs)
    amps = np.einsum("nms,nx,my->sxy", M, ph, ph) / N**2
    return WalkState(N, amps)


def spectrum_rows(coin, N: int):
    """Iterate (n, m, k, Re lam, Im lam) over all blocks."""
    lams, _, _, _ = coin_eigensystem(coin, N)
    for n in range(N):
        for m in range(N):
            for k in range(4):
                lam = lams[n, m, k]
                yield n, m, k + 1, float(lam.real), float(lam.imag)


def coefficient_rows(coin, N: int):
    """Iterate (S, S', n, m, k, Re c, Im c) over degeneracy-class
    representatives for the origin-localized initial states."""
    fam = _family_theta(coin)
    symmetric = fam is None or fam[0] != "x3"
    half = (N - 1) // 2
    reps = [(n, m) for n in range(half + 1) for m in range(half + 1)
            if symmetric is False or n <= m]
    from .walk import CHIRALITIES
    for S in CHIRALITIES:
        for Sp in CHIRALITIES:
            for n, m in reps:
                for k in (1, 2, 3, 4):
                    c = c_coefficient(coin, Sp, S, n, m, k, N)
                    yield S, Sp, n, m, k, float(c.real), float(c.imag)
