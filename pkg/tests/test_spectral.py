import math

import numpy as np
import pytest

from coinwalk.coins import COIN_FAMILIES, coin_from_theta, grover_coin
from coinwalk.spectral import (
    build_block,
    c_coefficient,
    c_table_p24y1,
    closed_form_eigs,
    coin_eigensystem,
    eta_matrix,
    finite_N_pbar,
    finite_N_pbar_matrix,
    omega_class,
    reconstruct_state,
    spectrum_rows,
)
from coinwalk.walk import (
    CHIRALITIES,
    evolve,
    initial_state,
    time_averaged_chirality_profile,
)

THETAS = (-2.8, -1.571, -0.9, 0.0, 0.33, 1.571, 2.6)


def test_block_zero_zero_is_coin():
    c = coin_from_theta("p24y1", 0.7)
    blk = build_block(c, 0, 0, 5)
    assert np.abs(blk.matrix - c.entries).max() < 1e-15
    lams = sorted(blk.eigenvalues, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    assert lams[0] == pytest.approx(-1)
    # lam3, lam4 are a conjugate pair
    assert blk.eigenvalues[2] == pytest.approx(np.conj(blk.eigenvalues[3]))


@pytest.mark.parametrize("family", COIN_FAMILIES)
def test_char_poly_structure(family):
    # det(lam I - U) = lam^4 - K lam^3 + K lam - 1 for a momentum-dependent K
    for theta in (0.7, -2.1):
        c = coin_from_theta(family, theta)
        for (n, m, N) in [(1, 2, 5), (0, 3, 7), (2, 2, 5)]:
            U = build_block(c, n, m, N).matrix
            coeffs = np.poly(U)
            assert coeffs[2] == pytest.approx(0.0, abs=1e-12)      # lam^2 term
            assert coeffs[4] == pytest.approx(-1.0, abs=1e-12)     # constant
            assert coeffs[1] == pytest.approx(-coeffs[3], abs=1e-12)


def test_p24y1_cubic_coefficient_matches_momentum_sum():
    theta, n, m, N = 0.9, 1, 3, 7
    U = build_block(coin_from_theta("p24y1", theta), n, m, N).matrix
    zn, zm = 2 * np.pi * n / N, 2 * np.pi * m / N
    want = np.sin(theta) * (np.cos(zn) + np.cos(zm))
    assert np.poly(U)[1] == pytest.approx(-want, abs=1e-12)


def test_sin_zero_gives_pm_i_pair():
    eigs = closed_form_eigs("p24y1", 0.0, 1, 2, 5)
    lams = [lam for lam, _ in eigs]
    assert lams[2] == pytest.approx(-1j)
    assert lams[3] == pytest.approx(1j)


@pytest.mark.parametrize("family", COIN_FAMILIES)
@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("N", [3, 5, 9])
def test_eigensystem_residuals_and_unimodularity(family, theta, N):
    c = coin_from_theta(family, theta)
    lams, vecs, fb, U = coin_eigensystem(c, N)
    assert np.abs(np.abs(lams) - 1).max() < 1e-12
    Uv = np.einsum("nmij,nmkj->nmki", U, vecs)
    resid = np.linalg.norm(Uv - lams[..., None] * vecs, axis=-1)
    assert resid.max() < 1e-10
    norms = np.linalg.norm(vecs, axis=-1)
    assert np.abs(norms - 1).max() < 1e-12
    dets = np.linalg.det(U)
    assert np.abs(lams.prod(axis=-1) - dets).max() < 1e-10


@pytest.mark.parametrize("family", COIN_FAMILIES)
def test_within_block_orthogonality(family):
    c = coin_from_theta(family, -1.2)
    lams, vecs, _, _ = coin_eigensystem(c, 5)
    gram = np.einsum("nmki,nmli->nmkl", np.conj(vecs), vecs)
    assert np.abs(gram - np.eye(4)).max() < 1e-10


def test_grover_point_triple_degeneracy_handled():
    c = coin_from_theta("p24y1", -math.pi / 2)
    blk = build_block(c, 0, 0, 5)
    assert blk.fallback
    lams = np.sort_complex(np.round(blk.eigenvalues, 9))
    assert list(lams) == [-1, -1, -1, 1]
    assert blk.residual() < 1e-10


def test_closed_vs_numeric_spectra_agree():
    rng = np.random.default_rng(5)
    for family in COIN_FAMILIES:
        for _ in range(10):
            theta = rng.uniform(-3.1, 3.1)
            N = int(rng.choice([3, 5, 7]))
            n, m = rng.integers(0, N, 2)
            c = coin_from_theta(family, theta)
            blk = build_block(c, n, m, N)
            numeric = np.linalg.eigvals(blk.matrix)
            dist = max(min(abs(numeric - lam)) for lam in blk.eigenvalues)
            assert dist < 1e-10


def test_omega_class_examples():
    assert set(omega_class(1, 0, 5).members) == {(1, 0), (0, 1), (4, 0), (0, 4)}
    assert set(omega_class(1, 2, 5).members) == {
        (1, 2), (1, 3), (4, 2), (4, 3), (2, 1), (2, 4), (3, 1), (3, 4)}
    assert set(omega_class(2, 2, 5).members) == {(2, 2), (2, 3), (3, 2), (3, 3)}
    assert omega_class(0, 0, 5).members == ((0, 0),)
    assert len(omega_class(1, 2, 5, symmetric=False).members) == 4
    assert set(omega_class(1, 0, 5, symmetric=False).members) == {(1, 0), (4, 0)}


def test_omega_class_sizes():
    for N in (5, 9):
        half = (N - 1) // 2
        for n in range(half + 1):
            for m in range(n, half + 1):
                size = len(omega_class(n, m, N).members)
                if (n, m) == (0, 0):
                    assert size == 1
                elif n == 0 or n == m:
                    assert size == 4
                else:
                    assert size == 8


@pytest.mark.parametrize("family", COIN_FAMILIES)
def test_spectrum_equal_across_class(family):
    c = coin_from_theta(family, 1.05)
    N = 7
    lams, _, _, _ = coin_eigensystem(c, N)
    for (n, m) in [(1, 0), (1, 2), (2, 2), (0, 3)]:
        cls = omega_class(min(n, m) if family == "x3" else n, m, N,
                          symmetric=(family != "x3"))
        if family == "x3":
            cls = omega_class(n, m, N, symmetric=False)
        ref = np.sort_complex(np.round(lams[cls.representative], 9))
        for nn, mm in cls.members:
            got = np.sort_complex(np.round(lams[nn, mm], 9))
            assert np.abs(got - ref).max() < 1e-12


def test_c_diagonal_is_two_for_p24y1():
    c = coin_from_theta("p24y1", 0.77)
    for S in CHIRALITIES:
        for k in (1, 2):
            val = c_coefficient(c, S, S, 1, 2, k, N=7)
            assert val == pytest.approx(2.0, abs=1e-12)


def test_c_table_matches_eigenvector_path():
    rng = np.random.default_rng(42)
    for _ in range(60):
        N = int(rng.choice([5, 7, 11, 15]))
        half = (N - 1) // 2
        n = int(rng.integers(1, half))
        m = int(rng.integers(n + 1, half + 1))
        theta = float(rng.uniform(-3.1, 3.1))
        k = int(rng.integers(1, 3))
        a, b = rng.integers(1, 5, 2)
        c = coin_from_theta("p24y1", theta)
        got = c_coefficient(c, CHIRALITIES[a - 1], CHIRALITIES[b - 1], n, m, k, N=N)
        zn, zm = 2 * np.pi * n / N, 2 * np.pi * m / N
        want = c_table_p24y1(a, b, k, theta, zn, zm)
        assert abs(got - complex(want)) < 1e-8


def test_c_table_theta_zero_example():
    # with sin(theta) = 0 the {1,2} class-1 entry reduces to -(cos zn + cos zm)
    zn, zm = 0.6, 2.0
    val = c_table_p24y1(1, 2, 1, 0.0, zn, zm)
    assert val == pytest.approx(-(np.cos(zn) + np.cos(zm)))


@pytest.mark.parametrize("family", COIN_FAMILIES)
@pytest.mark.parametrize("N", [3, 5])
def test_eta_gram_identity(family, N):
    E = eta_matrix(coin_from_theta(family, 0.7), N)
    gram = E.conj().T @ E
    assert np.abs(gram - np.eye(4 * N * N)).max() < 1e-8


@pytest.mark.parametrize("family,theta", [("p24y1", 0.7), ("p24y1", -2.1),
                                          ("x3", 0.7), ("x3", -2.1)])
@pytest.mark.parametrize("N", [3, 5])
def test_spectral_reconstruction_matches_evolution(family, theta, N):
    c = coin_from_theta(family, theta)
    for S in ("R", "U"):
        s0 = initial_state(N, S)
        for t in (1, 7, 50):
            direct = evolve(s0, c, t)
            rec = reconstruct_state(c, N, S, t)
            assert np.abs(direct.amps - rec.amps).max() < 1e-8


@pytest.mark.parametrize("family,theta", [("p24y1", 0.7), ("x3", -2.1)])
def test_finite_N_pbar_matches_time_average(family, theta):
    N, T = 3, 4000
    c = coin_from_theta(family, theta)
    emp = time_averaged_chirality_profile(c, N, "R", T)
    pm = finite_N_pbar_matrix(c, N)[:, 0]
    assert np.abs(emp - pm).max() < 5.0 / T


def test_finite_N_pbar_n3_hand_enumeration():
    # N = 3 has representatives (0,0), (1,0), (1,1) only; the full
    # eigenvalue-grouped sum must agree with direct enumeration over all
    # nine blocks
    theta = 0.7
    c = coin_from_theta("p24y1", theta)
    lams, vecs, _, _ = coin_eigensystem(c, 3)
    groups = {}
    for n in range(3):
        for m in range(3):
            for k in range(4):
                key = (round(lams[n, m, k].real, 9), round(lams[n, m, k].imag, 9))
                w = vecs[n, m, k, 0] * np.conj(vecs[n, m, k, 0])
                groups[key] = groups.get(key, 0) + w
    by_hand = sum(abs(v) ** 2 for v in groups.values()) / 3**4
    assert finite_N_pbar(c, "R", "R", 3) == pytest.approx(by_hand, abs=1e-14)


def test_finite_N_pbar_grows_toward_eighth():
    c = coin_from_theta("p24y1", 1.0)
    vals = [finite_N_pbar(c, "R", "R", N) for N in (5, 11, 21, 41)]
    diffs = [abs(v - 0.125) for v in vals]
    assert diffs == sorted(diffs, reverse=True)
    assert diffs[-1] < 0.02


def test_spectrum_rows_shape():
    rows = list(spectrum_rows(coin_from_theta("p34x1", 0.4), 3))
    assert len(rows) == 36
    n, m, k, re, im = rows[0]
    assert (n, m, k) == (0, 0, 1)
    assert re == pytest.approx(-1.0)
    assert im == pytest.approx(0.0)


def test_raw_coin_numeric_path():
    g = grover_coin().entries  # pass the bare array: treated as raw
    lams, vecs, fb, U = coin_eigensystem(g, 3)
    assert fb.all()
    Uv = np.einsum("nmij,nmkj->nmki", U, vecs)
    resid = np.linalg.norm(Uv - lams[..., None] * vecs, axis=-1)
    assert resid.max() < 1e-10


def _parallel(u, v, tol=1e-9):
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    i = int(np.argmax(np.abs(v)))
    return np.abs(u * v[i] - v * u[i]).max() <= tol * np.abs(v).max() * np.abs(u).max()


def test_p24y1_edge_vectors_match_published_special_case():
    # explicit n > 0, m = 0 eigenvectors for the +-1 branches:
    # [ (1+c+s) w^-n / ((1+c) w^-n + s), -(1+c+s)/((1+c) w^-n + s), 1, -1 ]
    # for k = 1 and the sign-flipped variant with last entry +1 for k = 2
    for theta in (0.6, -1.9, 2.4):
        s, c = np.sin(theta), np.cos(theta)
        for N, n in [(5, 1), (7, 3), (9, 2)]:
            wn = np.exp(2j * np.pi * n / N)
            eigs = closed_form_eigs("p24y1", theta, n, 0, N)
            lam1, v1 = eigs[0]
            lam2, v2 = eigs[1]
            assert lam1 == -1 and lam2 == 1
            den_p = (1 + c) / wn + s
            ref1 = np.array([(1 + c + s) / wn / den_p, -(1 + c + s) / den_p, 1, -1])
            den_m = (1 + c) / wn - s
            ref2 = np.array([(1 + c - s) / wn / den_m, (1 + c - s) / den_m, 1, 1])
            assert _parallel(v1, ref1)
            assert _parallel(v2, ref2)


def test_p24y1_interior_vectors_match_published_pm_one_branches():
    # the n, m > 0 vectors for lambda = -+1:
    # [ (1+c +- s w^m) w^-n / ((1+c) w^-n +- s), -+(1+c +- s w^m)/((1+c) w^-n +- s), 1, -+w^m ]
    theta, N, n, m = (1.1, 7, 2, 4)
    s, c = np.sin(theta), np.cos(theta)
    wn, wm = np.exp(2j * np.pi * n / N), np.exp(2j * np.pi * m / N)
    eigs = closed_form_eigs("p24y1", theta, n, m, N)
    _, v1 = eigs[0]
    _, v2 = eigs[1]
    ref1 = np.array([(1 + c + s * wm) / wn / ((1 + c) / wn + s),
                     -(1 + c + s * wm) / ((1 + c) / wn + s), 1, -wm])
    ref2 = np.array([(1 + c - s * wm) / wn / ((1 + c) / wn - s),
                     (1 + c - s * wm) / ((1 + c) / wn - s), 1, wm])
    assert _parallel(v1, ref1)
    assert _parallel(v2, ref2)


def test_x3_eigen_angle_relation():
    # the rotating branch satisfies 2 cos(angle) = (1+cos t) cos zn
    # + (1-cos t) cos zm; at cos t = 0 and n = m this is cos zn itself
    for N, n in [(5, 1), (7, 3)]:
        zn = 2 * np.pi * n / N
        eigs = closed_form_eigs("x3", np.pi / 2, n, n, N)
        lam3 = eigs[2][0]
        assert lam3.real == pytest.approx(np.cos(zn), abs=1e-12)
        assert abs(lam3) == pytest.approx(1.0, abs=1e-12)


def test_p34x1_vectors_match_published_formula():
    # the published x1-family eigenvector (which survives verification as
    # printed, unlike its z1 sibling):
    # [ (s-(1-c)L/wn)/((1-c)-sLwm) * ((1+c)-Lswm)/(s-(1+c)Lwn), 1,
    #   -(s-(1-c)L/wn)/((1-c)-Lswm), -(s-(1+c)L/wn)/((1+c)-Ls/wm) ]
    rng = np.random.default_rng(8)
    for _ in range(25):
        theta = float(rng.uniform(-2.9, 2.9))
        if abs(theta) < 0.05:
            continue  # the printed form is 0/0 at sin(theta)=0; ours is not
        N = int(rng.choice([5, 7, 9]))
        n, m = (int(v) for v in rng.integers(1, N, 2))
        s, c = np.sin(theta), np.cos(theta)
        wn, wm = np.exp(2j * np.pi * n / N), np.exp(2j * np.pi * m / N)
        for k, (lam, v) in enumerate(closed_form_eigs("p34x1", theta, n, m, N), 1):
            r1 = (s - (1 - c) * lam / wn) / ((1 - c) - s * lam * wm)
            ref = np.array([
                r1 * ((1 + c) - lam * s * wm) / (s - (1 + c) * lam * wn),
                1.0,
                -r1,
                -(s - (1 + c) * lam / wn) / ((1 + c) - lam * s / wm),
            ])
            if not np.isfinite(ref).all():
                continue
            assert _parallel(v, ref, 1e-8), (theta, N, n, m, k)


@pytest.mark.parametrize("family", ["p34x1", "p23z1"])
def test_reconstruction_other_families(family):
    from coinwalk.walk import evolve, initial_state
    c = coin_from_theta(family, -0.9)
    for N in (3, 5):
        for t in (1, 9):
            d = evolve(initial_state(N, "L"), c, t)
            r = reconstruct_state(c, N, "L", t)
            assert np.abs(d.amps - r.amps).max() < 1e-12


def test_grover_point_projector_equality():
    # at the Grover coin the (0,0) block has the triple eigenvalue -1; the
    # orthonormalized basis is arbitrary but its projector is not: it must
    # equal I - uu^T with u the normalized all-ones vector (the +1 branch)
    blk = build_block(coin_from_theta("p24y1", -math.pi / 2), 0, 0, 5)
    groups = {}
    for lam, v in zip(blk.eigenvalues, blk.eigenvectors):
        key = round(lam.real, 9), round(lam.imag, 9)
        groups.setdefault(key, []).append(v)
    proj_minus = sum(np.outer(v, np.conj(v)) for v in groups[(-1.0, 0.0)])
    u = np.full(4, 0.5)
    assert np.abs(proj_minus - (np.eye(4) - np.outer(u, u))).max() < 1e-10
    proj_plus = sum(np.outer(v, np.conj(v)) for v in groups[(1.0, 0.0)])
    assert np.abs(proj_plus - np.outer(u, u)).max() < 1e-10
