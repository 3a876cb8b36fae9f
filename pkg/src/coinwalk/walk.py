"""Direct simulation of the coined walk on the periodic odd lattice Z_N.

State amplitudes live on (chirality, x, y) with centered coordinates
-(N-1)/2..(N-1)/2 and periodic wraparound. One step applies the coin to the
chirality axis and then shifts: R pulls from x-1, L from x+1, U from y-1,
D from y+1. This is the amplitude-update form of the evolution; it serves as
the brute-force oracle for the spectral machinery.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coins import Coin, is_orthogonal

__all__ = [
    "CHIRALITIES", "chirality_index",
    "index_of", "coords_of", "WalkState", "initial_state",
    "step", "evolve", "probability_at", "position_distribution",
    "time_averaged_probability", "time_averaged_chirality_profile",
]

CHIRALITIES = ("R", "L", "U", "D")


def chirality_index(S: str) -> int:
    """l(S): R=1, L=2, U=3, D=4."""
    try:
        return CHIRALITIES.index(S.upper()) + 1
    except ValueError:
        raise ValueError(f"chirality must be one of {CHIRALITIES}, got {S!r}") from None


def _check_lattice(N: int) -> int:
    N = int(N)
    if N < 3 or N % 2 == 0:
        raise ValueError(f"lattice side must be odd and >= 3, got {N}")
    return N


def _check_coords(x: int, y: int, N: int):
    half = (N - 1) // 2
    if not (-half <= x <= half and -half <= y <= half):
        raise ValueError(f"({x},{y}) outside the centered lattice of side {N}")


def index_of(S: str, x: int, y: int, N: int) -> int:
    """1-based canonical index 4Ny + 4x + l(S) + 2N^2 - 2."""
    _check_lattice(N)
    _check_coords(x, y, N)
    return 4 * N * y + 4 * x + chirality_index(S) + 2 * N * N - 2


def coords_of(w: int, N: int) -> tuple[str, int, int]:
    """Inverse of index_of."""
    _check_lattice(N)
    if not (1 <= w <= 4 * N * N):
        raise ValueError(f"index {w} outside 1..4N^2")
    q = w - 1
    s = q % 4
    q //= 4
    half = (N - 1) // 2
    x = q % N - half
    y = q // N - half
    return CHIRALITIES[s], x, y


@dataclass
class WalkState:
    """Walker state: amps[s, ix, iy] with ix = x + (N-1)/2, iy = y + (N-1)/2."""

    N: int
    amps: np.ndarray            # (4, N, N) complex

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def amplitude(self, S: str, x: int, y: int) -> complex:
        _check_coords(x, y, self.N)
        half = (self.N - 1) // 2
        return complex(self.amps[chirality_index(S) - 1, x + half, y + half])

    def to_vector(self) -> np.ndarray:
        """Flat amplitude vector in canonical index order (1..4N^2)."""
        # index order: y slowest, then x, then chirality
        return self.amps.transpose(2, 1, 0).reshape(-1)

    @classmethod
    def from_vector(cls, vec: np.ndarray, N: int) -> "WalkState":
        amps = np.asarray(vec, dtype=complex).reshape(N, N, 4).transpose(2, 1, 0)
        return cls(N, amps.copy())


def initial_state(N: int, S: str) -> WalkState:
    """Walker at the origin with coin state |S>."""
    N = _check_lattice(N)
    amps = np.zeros((4, N, N), dtype=complex)
    half = (N - 1) // 2
    amps[chirality_index(S) - 1, half, half] = 1.0
    return WalkState(N, amps)


def _coin_entries(C) -> np.ndarray:
    if isinstance(C, Coin):
        if C.degenerate:
            raise ValueError("walk evolution excludes the degenerate theta = +-pi coins")
        return C.entries
    return np.asarray(C, dtype=complex)


def step(state: WalkState, C) -> WalkState:
    """One evolution step: coin on the chirality axis, then shift."""
    cm = _coin_entries(C)
    if not is_orthogonal(cm, 1e-9):
        warnings.warn("coin is not orthogonal; norm will drift", stacklevel=2)
    mixed = np.einsum("ij,jxy->ixy", cm, state.amps)
    amps = np.stack([
        np.roll(mixed[0], 1, axis=0),    # R pulls from x-1
        np.roll(mixed[1], -1, axis=0),   # L pulls from x+1
        np.roll(mixed[2], 1, axis=1),    # U pulls from y-1
        np.roll(mixed[3], -1, axis=1),   # D pulls from y+1
    ])
    return WalkState(state.N, amps)


def evolve(state: WalkState, C, t: int) -> WalkState:
    if t < 0:
        raise ValueError("t must be >= 0")
    cur = state
    for _ in range(t):
        cur = step(cur, C)
    return cur


def probability_at(state: WalkState, x: int, y: int) -> float:
    """P_t((x,y)) = sum over chirality of |amplitude|^2."""
    _check_coords(x, y, state.N)
    half = (state.N - 1) // 2
    return float(np.abs(state.amps[:, x + half, y + half] ** 2).sum().real)


def position_distribution(state: WalkState) -> np.ndarray:
    """(N, N) array of vertex probabilities indexed by (ix, iy)."""
    return (np.abs(state.amps) ** 2).sum(axis=0)


def time_averaged_probability(C, N: int, S: str, x: int, y: int, T: int) -> float:
    """(1/T) sum_{t=0}^{T-1} P_t((x,y)) for the walk started at the origin
    in coin state |S>."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return float(time_averaged_chirality_profile(C, N, S, T, x, y).sum())


def time_averaged_chirality_profile(C, N: int, S: str, T: int,
                                    x: int = 0, y: int = 0) -> np.ndarray:
    """Per-chirality time-averaged probabilities at a vertex, (4,) array
    ordered R, L, U, D."""
    state = initial_state(N, S)
    _check_coords(x, y, N)
    half = (N - 1) // 2
    ix, iy = x + half, y + half
    acc = np.zeros(4)
    for _ in range(T):
        acc += np.abs(state.amps[:, ix, iy]) ** 2
        state = step(state, C)
    return acc / T
