"""Construction and classification of 4x4 permutative orthogonal matrices.

The classification is pattern-based: every permutative (complex) orthogonal
4x4 matrix is P * Conj * Block * Conj for a row permutation P fixing index 1,
a conjugator Conj in {I, P23, P24} selecting the x/y/z pattern family, and a
two-parameter block of kind M or N carrying a sign. The block entries are an
affine function of the two parameters, which makes membership tests and
witness extraction a couple of array comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .perms import ONE_PLUS_P3, P23, P24, P34, Permutation4

__all__ = [
    "Coin", "FamilyWitness", "NotOrthogonalError", "NotPermutativeError",
    "COIN_FAMILIES", "SET_TAGS",
    "grover_coin", "coin_from_theta", "coin_rational", "build_permutative",
    "is_orthogonal", "is_permutative", "classify",
    "set_member_from_theta", "in_pattern_set",
    "chain_ids", "chain_sets", "group_closure_sample",
    "coin_to_json", "coin_from_json",
]

COIN_FAMILIES = ("p34x1", "p24y1", "p23z1", "x3")

# Bare pattern sets of the classification, tagged by family letter and index.
SET_TAGS = tuple(f"{f}{j}" for f in "xyz" for j in (1, 2, 3, 4))

# Blocks are slot1*E1 + slot2*E2 + sign*EC_<kind>. Kind M has parameters
# (A-block, B-block) = (slot1, slot2); kind N swaps them.
_E1 = np.array([[1, -1, 0, 0], [-1, 1, 0, 0], [0, 0, -1, 1], [0, 0, 1, -1]], dtype=float)
_E2 = np.array([[0, 0, 1, -1], [0, 0, -1, 1], [1, -1, 0, 0], [-1, 1, 0, 0]], dtype=float)
_EC_M = np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)
_EC_N = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)

_CONJ = {"x": np.eye(4), "y": P23, "z": P24}
_LEFT = {"x": P34, "y": P24, "z": P23}  # multipliers of the generalized-Grover sets

# j -> (kind, sign)
_J_KIND_SIGN = {1: ("m", 1), 2: ("m", -1), 3: ("n", 1), 4: ("n", -1)}


class NotOrthogonalError(ValueError):
    pass


class NotPermutativeError(ValueError):
    pass


@dataclass(frozen=True)
class Coin:
    """A 4x4 coin matrix with provenance metadata.

    entries is complex128; exact, when present, carries the same matrix as
    Fractions (rational coins are exactly orthogonal in that representation).
    """

    entries: np.ndarray
    family: str = "raw"
    theta: float | None = None
    r: Fraction | None = None
    exact: tuple | None = field(default=None, repr=False)
    degenerate: bool = False

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (4, 4):
            raise ValueError("coin must be 4x4")
        object.__setattr__(self, "entries", e)

    @property
    def is_real(self) -> bool:
        return bool(np.abs(self.entries.imag).max() < 1e-12)


def grover_coin() -> Coin:
    """The 4x4 Grover diffusion coin (off-diagonal 1/2, diagonal -1/2)."""
    g = np.full((4, 4), 0.5) - np.eye(4)
    return Coin(g, family="p24y1", theta=-math.pi / 2)


def _block(kind: str, sign: int, slot1, slot2) -> np.ndarray:
    ec = _EC_M if kind == "m" else _EC_N
    return slot1 * _E1 + slot2 * _E2 + sign * ec


def set_member_from_theta(tag: str, theta) -> np.ndarray:
    """Member of a bare pattern set (x1..z4) at parameter theta.

    theta may be complex; the parametrization stays on the defining variety.
    """
    f, j = tag[0], int(tag[1])
    kind, sign = _J_KIND_SIGN[j]
    s, c = np.sin(theta), np.cos(theta)
    if kind == "m":
        slot1, slot2 = s / 2, sign * (1 + c) / 2
    else:
        slot1, slot2 = sign * (1 + c) / 2, s / 2
    b = _block(kind, sign, slot1, slot2)
    conj = _CONJ[f]
    return conj @ b @ conj if f != "x" else b


def coin_from_theta(family: str, theta: float) -> Coin:
    """One-parameter coin from the four named walk families.

    theta must lie in [-pi, pi]; the endpoints give sign-degenerate
    permutation-like coins and are flagged (the walk modules reject them).
    """
    family = family.lower()
    if family not in COIN_FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {COIN_FAMILIES}")
    theta = float(theta)
    if not (-math.pi <= theta <= math.pi):
        raise ValueError(f"theta={theta} out of range [-pi, pi]")
    s, c = math.sin(theta), math.cos(theta)
    a, b = (1 + c) / 2, (1 - c) / 2
    h = s / 2
    if family == "p34x1":
        m = [[h, -h, a, b], [-h, h, b, a], [b, a, h, -h], [a, b, -h, h]]
    elif family == "p24y1":
        m = [[h, a, -h, b], [b, h, a, -h], [-h, b, h, a], [a, -h, b, h]]
    elif family == "p23z1":
        m = [[h, a, b, -h], [b, h, -h, a], [a, -h, h, b], [-h, b, a, h]]
    else:  # x3
        m = [[a, b, h, -h], [b, a, -h, h], [h, -h, b, a], [-h, h, a, b]]
    degenerate = math.isclose(abs(theta), math.pi, rel_tol=0, abs_tol=1e-12)
    return Coin(np.array(m), family=family, theta=theta, degenerate=degenerate)


def coin_rational(tag: str, r: Fraction | int | str, z_branch: int = 1) -> Coin:
    """Exact rational member of a bare pattern set.

    Parameters follow the rational parametrization of the defining variety:
    the A-block value is (r^2-1)/(2(r^2+1)) and the B-block value is
    sign*1/2 + z_branch*r/(r^2+1). All entries are Fractions; the result is
    exactly orthogonal in Fraction arithmetic.
    """
    if tag not in SET_TAGS:
        raise ValueError(f"unknown set tag {tag!r}")
    if isinstance(r, str):
        r = Fraction(r)
    r = Fraction(r)
    if r == 0:
        raise ValueError("r must be nonzero")
    if z_branch not in (1, -1):
        raise ValueError("z_branch must be +1 or -1")
    f, j = tag[0], int(tag[1])
    kind, sign = _J_KIND_SIGN[j]
    x = (r**2 - 1) / (2 * (r**2 + 1))
    z = Fraction(sign, 2) + z_branch * r / (r**2 + 1)
    slot1, slot2 = (x, z) if kind == "m" else (z, x)
    ec = _EC_M if kind == "m" else _EC_N
    exact = [[slot1 * Fraction(int(_E1[i, k])) + slot2 * Fraction(int(_E2[i, k]))
              + sign * Fraction(int(ec[i, k])) for k in range(4)] for i in range(4)]
    if f != "x":
        conj = _CONJ[f]
        pi = [int(np.argmax(conj[i])) for i in range(4)]
        exact = [[exact[pi[i]][pi[k]] for k in range(4)] for i in range(4)]
    entries = np.array([[float(v) for v in row] for row in exact])
    return Coin(entries, family=tag, r=r, exact=tuple(tuple(row) for row in exact))


def build_permutative(x_row, P, Q, R) -> Coin:
    """Matrix with rows (x, xP, xQ, xR); permutative by construction."""
    x = np.asarray(x_row, dtype=complex).reshape(4)
    rows = [x] + [x @ np.asarray(M, dtype=float) for M in (P, Q, R)]
    return Coin(np.stack(rows), family="raw")


def is_orthogonal(A, tol: float = 1e-9) -> bool:
    """max |A^T A - I| <= tol (transpose, not conjugate: complex orthogonal)."""
    A = np.asarray(A, dtype=complex)
    return bool(np.abs(A.T @ A - np.eye(4)).max() <= tol)


def is_permutative(A, tol: float = 1e-9) -> bool:
    """Every row's entry multiset equals row 1's, matched after sorting."""
    A = np.asarray(A, dtype=complex)
    s = np.sort_complex(A)
    return bool(np.abs(s - s[0]).max() <= tol)


@dataclass(frozen=True)
class FamilyWitness:
    """Classification witness: A = left * Conj * Block(x, z) * Conj.

    Block is M^sign_{x,z} for kind "m" and N^sign_{z,x} for kind "n"; in both
    cases (x, z) satisfies x^2 + z^2 - sign*z = 0.
    """

    family: str                # "x", "y" or "z"
    left: Permutation4         # element of 1 (+) P3
    kind: str                  # "m" or "n"
    sign: int                  # +1 or -1
    x: complex
    z: complex

    @property
    def conjugator(self) -> np.ndarray:
        return _CONJ[self.family]

    @property
    def j(self) -> int:
        return {("m", 1): 1, ("m", -1): 2, ("n", 1): 3, ("n", -1): 4}[(self.kind, self.sign)]

    @property
    def set_tag(self) -> str:
        return f"{self.family}{self.j}"

    def variety_residual(self) -> float:
        return abs(self.x**2 + self.z**2 - self.sign * self.z)

    @property
    def is_real(self) -> bool:
        return abs(complex(self.x).imag) < 1e-12 and abs(complex(self.z).imag) < 1e-12

    def is_rational(self, max_denominator: int = 10**6, tol: float = 1e-12) -> bool:
        """Both parameters are rationals with small denominator within tol."""
        if not self.is_real:
            return False
        for v in (complex(self.x).real, complex(self.z).real):
            if abs(v - Fraction(v).limit_denominator(max_denominator)) > tol:
                return False
        return True

    def reconstruct(self) -> np.ndarray:
        slot1, slot2 = (self.x, self.z) if self.kind == "m" else (self.z, self.x)
        b = _block(self.kind, self.sign, slot1, slot2)
        conj = self.conjugator
        return self.left.matrix() @ (conj @ b @ conj)


def _pattern_match(B: np.ndarray, kind: str, sign: int, tol: float):
    """Try to read B as a kind/sign block; returns (slot1, slot2) or None."""
    p1, p2 = B[0, 0], B[0, 2]
    rec = _block(kind, sign, p1, p2)
    if np.abs(B - rec).max() <= tol:
        return p1, p2
    return None


def classify(A, tol: float = 1e-9) -> FamilyWitness:
    """Witness for a permutative orthogonal matrix (complex allowed).

    The first valid witness in the fixed order family x < y < z, kind m < n,
    sign + < -, left permutation lexicographic is returned, so repeated calls
    are deterministic even when several families contain A (e.g. the Grover
    coin).
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (4, 4):
        raise ValueError("classify expects a 4x4 matrix")
    if not is_orthogonal(A, tol):
        raise NotOrthogonalError(f"matrix is not orthogonal within tol={tol}")
    if not is_permutative(A, tol):
        raise NotPermutativeError(f"matrix is orthogonal but not permutative within tol={tol}")
    # a tight pass first, so near-corner coins land on their true pattern
    # rather than on an earlier corner within the loose tolerance
    for pass_tol in sorted({min(1e-12, tol), tol}):
        for fam in "xyz":
            conj = _CONJ[fam]
            for kind in "mn":
                for sign in (1, -1):
                    for left in ONE_PLUS_P3:
                        B = conj @ (left.matrix().T @ A) @ conj
                        got = _pattern_match(B, kind, sign, pass_tol)
                        if got is None:
                            continue
                        slot1, slot2 = got
                        x, z = (slot1, slot2) if kind == "m" else (slot2, slot1)
                        return FamilyWitness(fam, left, kind, sign, complex(x), complex(z))
    # unreachable for genuinely permutative orthogonal input
    raise NotPermutativeError("no pattern family matched; input outside the classification")


def _batch_transform_indices():
    """Row/column gather indices realizing conj * P^T * A * conj for the
    3 conjugators x 6 left permutations."""
    rows = np.empty((3, 6, 4), dtype=int)
    cols = np.empty((3, 6, 4), dtype=int)
    for f, fam in enumerate("xyz"):
        conj = _CONJ[fam]
        for p, left in enumerate(ONE_PLUS_P3):
            L = conj @ left.matrix().T
            rows[f, p] = np.argmax(L, axis=1)
            cols[f, p] = np.argmax(conj, axis=0)
    return rows, cols


_BT_ROWS, _BT_COLS = None, None


def classify_batch_errors(mats: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Reconstruction error of the canonical witness for a batch (B, 4, 4).

    Vectorized version of the classify -> reconstruct round trip; candidate
    order matches classify, and like classify a tight pass runs first. Items
    matching no pattern get +inf.
    """
    global _BT_ROWS, _BT_COLS
    if _BT_ROWS is None:
        _BT_ROWS, _BT_COLS = _batch_transform_indices()
    mats = np.asarray(mats, dtype=complex)
    B = mats.shape[0]
    # one gather produces all 18 permuted copies: (B, 3, 6, 4, 4)
    T = mats[:, _BT_ROWS[..., :, None], _BT_COLS[..., None, :]]
    p1 = T[..., 0, 0][..., None, None]
    p2 = T[..., 0, 2][..., None, None]
    base = p1 * _E1 + p2 * _E2
    errs = np.empty((B, 3, 2, 2, 6))
    for ik, ec in enumerate((_EC_M, _EC_N)):
        for isg, sign in enumerate((1, -1)):
            e = np.abs(T - (base + sign * ec)).max(axis=(-1, -2))   # (B, 3, 6)
            errs[:, :, ik, isg, :] = e
    errs = errs.reshape(B, 72)                    # canonical candidate order
    out = np.full(B, np.inf)
    for pass_tol in sorted({min(1e-12, tol), tol}):
        hit = errs <= pass_tol
        any_hit = hit.any(axis=1) & ~np.isfinite(out)
        first = hit.argmax(axis=1)
        out[any_hit] = errs[np.arange(B), first][any_hit]
    return out


# ---------------------------------------------------------------------------
# group chains


def chain_ids() -> list[str]:
    """All group identifiers from the classification's chain theorem."""
    ids = []
    for f in "xyz":
        ids.append(f"{f}-base")
        for j in (1, 2, 3, 4):
            ids.extend([f"{f}{j}-a", f"{f}{j}-b", f"{f}{j}-full"])
    return ids


def chain_sets(chain_id: str) -> list[tuple[str, int, bool]]:
    """Sets forming the group: tuples (family, j, left_multiplied)."""
    fam = chain_id[0]
    if fam not in "xyz":
        raise ValueError(f"unknown chain {chain_id!r}")
    body = chain_id[1:]
    if body == "-base":
        return [(fam, 3, True)]
    try:
        j, variant = int(body[0]), body[2:]
    except (ValueError, IndexError):
        raise ValueError(f"unknown chain {chain_id!r}") from None
    if j not in (1, 2, 3, 4):
        raise ValueError(f"unknown chain {chain_id!r}")
    if variant == "a":
        sets = [(fam, 3, True), (fam, j, True)]
    elif variant == "b":
        sets = [(fam, 3, True), (fam, j, False)]
    elif variant == "full":
        sets = [(fam, 3, True), (fam, j, True), (fam, 3, False), (fam, j, False)]
    else:
        raise ValueError(f"unknown chain {chain_id!r}")
    # drop duplicates when j == 3
    seen, out = set(), []
    for s in sets:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def in_pattern_set(A, tag: str, left: bool = False, tol: float = 1e-9) -> bool:
    """Membership of A in the bare pattern set `tag` (x1..z4); with left=True
    the set is premultiplied by its family's generalized-Grover factor."""
    if tag not in SET_TAGS:
        raise ValueError(f"unknown set tag {tag!r}")
    fam, j = tag[0], int(tag[1])
    A = np.asarray(A, dtype=complex)[None]
    return bool(_batch_in_set(A, fam, j, left, tol)[0])


def _batch_members(fam: str, j: int, left: bool, thetas: np.ndarray) -> np.ndarray:
    """Vectorized set members for an array of (possibly complex) thetas."""
    kind, sign = _J_KIND_SIGN[j]
    s, c = np.sin(thetas), np.cos(thetas)
    if kind == "m":
        slot1, slot2 = s / 2, sign * (1 + c) / 2
    else:
        slot1, slot2 = sign * (1 + c) / 2, s / 2
    ec = _EC_M if kind == "m" else _EC_N
    mats = (slot1[:, None, None] * _E1 + slot2[:, None, None] * _E2 + sign * ec)
    conj = _CONJ[fam]
    if fam != "x":
        mats = np.einsum("ij,bjk,kl->bil", conj, mats, conj)
    if left:
        mats = np.einsum("ij,bjk->bik", _LEFT[fam], mats)
    return mats


def _batch_in_set(mats: np.ndarray, fam: str, j: int, left: bool, tol: float) -> np.ndarray:
    """Boolean mask: which matrices of the batch lie in the given bare set."""
    kind, sign = _J_KIND_SIGN[j]
    B = mats
    if left:
        B = np.einsum("ij,bjk->bik", _LEFT[fam].T, B)
    conj = _CONJ[fam]
    if fam != "x":
        B = np.einsum("ij,bjk,kl->bil", conj, B, conj)
    ec = _EC_M if kind == "m" else _EC_N
    rec = B[:, 0, 0][:, None, None] * _E1 + B[:, 0, 2][:, None, None] * _E2 + sign * ec
    return np.abs(B - rec).max(axis=(1, 2)) <= tol


def group_closure_sample(chain_id: str, count: int, seed: int,
                         tol: float = 1e-9, complex_fraction: float = 0.5) -> dict:
    """Sample pairs from a chain group, form products and transposes, and
    report the fraction that lands back in the group (1.0 when closed)."""
    sets = chain_sets(chain_id)
    rng = np.random.default_rng(seed)

    def draw(n):
        which = rng.integers(0, len(sets), n)
        th = rng.uniform(-np.pi, np.pi, n).astype(complex)
        ncx = int(n * complex_fraction)
        th[:ncx] += 1j * rng.normal(0, 0.7, ncx)
        out = np.empty((n, 4, 4), dtype=complex)
        for i, (fam, j, left) in enumerate(sets):
            mask = which == i
            if mask.any():
                out[mask] = _batch_members(fam, j, left, th[mask])
        return out

    A, B = draw(count), draw(count)
    products = np.einsum("bij,bjk->bik", A, B)
    transposes = np.swapaxes(A, 1, 2)
    in_chain_prod = np.zeros(count, dtype=bool)
    in_chain_t = np.zeros(count, dtype=bool)
    for fam, j, left in sets:
        in_chain_prod |= _batch_in_set(products, fam, j, left, tol)
        in_chain_t |= _batch_in_set(transposes, fam, j, left, tol)
    n_ok = int(in_chain_prod.sum() + in_chain_t.sum())
    return {
        "chain": chain_id,
        "count": count,
        "checked": 2 * count,
        "in_chain": n_ok,
        "fraction": n_ok / (2 * count),
        "product_failures": int(count - in_chain_prod.sum()),
        "transpose_failures": int(count - in_chain_t.sum()),
    }


# ---------------------------------------------------------------------------
# serialization


def coin_to_json(coin: Coin) -> dict:
    """JSON-ready dict; exact rational coins carry [num, den] entry pairs."""
    if coin.exact is not None:
        re = [[[v.numerator, v.denominator] for v in row] for row in coin.exact]
        im = [[[0, 1]] * 4 for _ in range(4)]
    else:
        re = coin.entries.real.tolist()
        im = coin.entries.imag.tolist()
    return {
        "family": coin.family,
        "theta": coin.theta,
        "r": [coin.r.numerator, coin.r.denominator] if coin.r is not None else None,
        "entries_re": re,
        "entries_im": im,
    }


def coin_from_json(obj: dict) -> Coin:
    def cell(v):
        return Fraction(v[0], v[1]) if isinstance(v, (list, tuple)) else None

    re_raw = obj["entries_re"]
    exact = None
    if re_raw and isinstance(re_raw[0][0], (list, tuple)):
        exact = tuple(tuple(cell(v) for v in row) for row in re_raw)
        re = np.array([[float(v) for v in row] for row in exact])
        im = np.zeros((4, 4))
    else:
        re = np.array(re_raw, dtype=float)
        im = np.array(obj.get("entries_im") or np.zeros((4, 4)), dtype=float)
    r = obj.get("r")
    return Coin(
        re + 1j * im,
        family=obj.get("family", "raw"),
        theta=obj.get("theta"),
        r=Fraction(r[0], r[1]) if r else None,
        exact=exact,
    )
