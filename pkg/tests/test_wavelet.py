import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughsing.exceptions import GridTooCoarse, InsufficientData, InvalidParameter, UnsupportedOrder
from roughsing.kernel import Lattice, SymbolGrid, compute_K0_hat, compute_m_j0
from roughsing.sphere import builtin_omega
from roughsing.wavelet import (FATHER, MOTHER, WaveletCoeffSet, WaveletSymbol, allowed_types,
                               analysis_lattice, analyze, basis_matrix, build_wavelet_pair,
                               coeff_decay_report, daubechies_filter, synthesize)

# published 8-tap Daubechies reconstruction low-pass (4 vanishing moments)
DB4 = [0.23037781330885523, 0.7148465705525415, 0.6308807679295904, -0.02798376941698385,
       -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278]


@pytest.fixture(scope="module")
def wp4():
    return build_wavelet_pair(4, 12)


def test_db4_taps():
    assert np.allclose(daubechies_filter(4)[::-1], DB4, atol=1e-12)


@pytest.mark.parametrize("M", [4, 6, 8, 10])
def test_filter_conditions(M):
    h = daubechies_filter(M)
    assert h.size == 2 * M
    # root finding in the spectral factorization limits the accuracy to ~1e-12
    assert h.sum() == pytest.approx(np.sqrt(2), abs=1e-10)
    for s in range(1, M):
        assert abs(np.dot(h[2 * s:], h[:-2 * s])) <= 1e-10
    assert np.dot(h, h) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("M", [4, 8])
def test_moments_and_norms(M):
    wp = build_wavelet_pair(M, 12)
    t, h = wp.grid, wp.step
    for p in range(M):
        assert abs(np.sum(wp.mother_samples * t ** p) * h) <= 1e-6
    for kind in (FATHER, MOTHER):
        assert abs(np.sum(wp.table(kind) ** 2) * h - 1) <= 1e-3
    assert abs(np.sum(wp.father_samples * wp.mother_samples) * h) <= 1e-6
    assert np.sum(wp.father_samples) * h == pytest.approx(1.0, abs=1e-9)


def test_support_length(wp8):
    assert wp8.support == 15
    assert wp8.grid[-1] == 15.0


def test_integer_values_satisfy_refinement(wp4):
    # phi(t) = sqrt(2) sum_k h_k phi(2t - k) at a few dyadic points
    h = wp4.filter
    t = np.array([0.5, 1.25, 2.375, 3.0])
    lhs = wp4.evaluate(FATHER, t)
    rhs = sum(np.sqrt(2) * h[k] * wp4.evaluate(FATHER, 2 * t - k) for k in range(h.size))
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_build_errors():
    with pytest.raises(UnsupportedOrder):
        build_wavelet_pair(5)
    with pytest.raises(InvalidParameter):
        build_wavelet_pair(4, 7)
    with pytest.raises(InvalidParameter):
        build_wavelet_pair(4, 15)


def test_allowed_types():
    assert (FATHER, FATHER) in allowed_types(0)
    assert all((FATHER, FATHER) not in allowed_types(l) for l in (1, 2, 5))
    assert len(allowed_types(0)) == 4 and len(allowed_types(3)) == 3


def test_gram_near_identity(wp8):
    rng = np.random.default_rng(0)
    step = 2.0 ** -7
    pts = step * np.arange(int(-20 / step), int(36 / step))
    mats = {(k, l): basis_matrix(wp8, k, l, pts, -40, 40 * 2 ** l).toarray() for k in (0, 1) for l in range(4)}

    def draw():
        lam = int(rng.integers(0, 4))
        g = allowed_types(lam)[rng.integers(0, len(allowed_types(lam)))]
        mu = rng.integers(-4, 8, size=2) * 2 ** lam // 2
        return lam, g, mu

    def inner(a, b):
        out = 1.0
        for ax in (0, 1):
            ra = mats[(a[1][ax], a[0])][a[2][ax] + 40]
            rb = mats[(b[1][ax], b[0])][b[2][ax] + 40]
            out *= np.dot(ra, rb) * step
        return out

    worst = 0.0
    for i in range(200):
        a = draw()
        b = a if i % 4 == 0 else draw()
        same = a[0] == b[0] and a[1] == b[1] and np.array_equal(a[2], b[2])
        worst = max(worst, abs(inner(a, b) - float(same)))
    assert worst <= 1e-3


def test_bounded_overlap(wp8):
    pts = np.linspace(-3, 3, 997)
    counts = []
    for lam in range(4):
        B = basis_matrix(wp8, MOTHER, lam, pts, -100, 100)
        counts.append(int(np.diff(B.tocsc().indptr).max()))
    assert max(counts) <= wp8.support and len(set(counts)) == 1


def _basis_symbol(wp, lam, g, mu, lattice):
    ax = lattice.axis
    p1 = basis_matrix(wp, g[0], lam, ax, mu[0], mu[0]).toarray()[0]
    p2 = basis_matrix(wp, g[1], lam, ax, mu[1], mu[1]).toarray()[0]
    return SymbolGrid(np.outer(p1, p2).astype(complex), lattice)


def test_analyze_single_basis_function(wp8):
    lat = Lattice.covering(10.0, 2.0 ** -5)
    m = _basis_symbol(wp8, 1, (MOTHER, MOTHER), (0, 0), lat)
    c = analyze(m, wp8, 2)
    hit = (c.lam == 1) & (c.g1 == MOTHER) & (c.g2 == MOTHER) & (c.mu1 == 0) & (c.mu2 == 0)
    assert hit.sum() == 1
    assert abs(c.a[hit][0] - 1) <= 1e-3
    assert np.max(np.abs(c.a[~hit])) <= 1e-3


def test_single_coefficient_roundtrip(wp8):
    lat = Lattice.covering(10.0, 2.0 ** -5)
    ref = _basis_symbol(wp8, 1, (FATHER, MOTHER), (2, -3), lat)
    c = WaveletCoeffSet(np.array([1]), np.array([FATHER]), np.array([MOTHER]), np.array([2]),
                        np.array([-3]), np.array([1.0 + 0j]), 1, None, 8)
    out = synthesize(c, wp8, lat)
    assert np.max(np.abs(out.values - ref.values)) <= 1e-3 * np.max(np.abs(ref.values))


def test_analyze_zero_and_synthesize_empty(wp8):
    lat = Lattice(2.0 ** -4, 64)
    c = analyze(SymbolGrid(np.zeros((64, 64), complex), lat), wp8, 2)
    assert len(c) == 0
    assert np.all(synthesize(c, wp8, lat).values == 0)


def test_analyze_resolution(wp8):
    lat = Lattice(2.0 ** -2, 64)
    with pytest.raises(GridTooCoarse):
        analyze(SymbolGrid(np.ones((64, 64), complex), lat), wp8, 1)


def test_roundtrip_improves_with_lambda_max(wp8):
    om = builtin_omega("sign_odd")
    errs = []
    for lm in (1, 2, 3):
        lat = analysis_lattice(3, lm)
        m = compute_m_j0(compute_K0_hat(om, lat, spatial_step=2.0 ** -7), 3)
        c = analyze(m, wp8, lm)
        s = synthesize(c, wp8, lat)
        errs.append(np.linalg.norm(s.values - m.values) / np.linalg.norm(m.values))
        assert c.energy() <= 1.05 * m.norm_l2 ** 2
    assert errs[-1] <= 0.05
    assert errs[0] > errs[1] > errs[2]


def test_index_family(workspace):
    _, c, _ = workspace.coefficients("sign_odd", 4)
    ff = (c.g1 == FATHER) & (c.g2 == FATHER)
    assert np.all(c.lam[ff] == 0)
    assert set(np.unique(c.lam)) == {0, 1, 2, 3}
    assert np.all(np.abs(c.a) >= 1e-14)


def test_b_is_sup_of_cell(wp8, workspace):
    _, c, _ = workspace.coefficients("sign_odd", 4)
    b = c.b(wp8)
    rng = np.random.default_rng(1)
    t = wp8.grid
    for i in rng.choice(len(c), 5, replace=False):
        # sup of |a| 2**lam psi_G1(u) psi_G2(v) over the cell is the product of table maxima
        p1 = np.max(np.abs(wp8.evaluate(int(c.g1[i]), t)))
        p2 = np.max(np.abs(wp8.evaluate(int(c.g2[i]), t)))
        assert b[i] == pytest.approx(abs(c.a[i]) * 2.0 ** c.lam[i] * p1 * p2, rel=1e-12)


def test_wavelet_symbol_matches_synthesis(wp8, workspace):
    _, c, lat = workspace.coefficients("sign_odd", 4)
    sub = c.subset(np.arange(0, len(c), 97))
    ax = lat.axis[::37]
    a = WaveletSymbol(sub, wp8).on_tensor(ax, ax)
    b = synthesize(sub, wp8, Lattice(lat.spacing, lat.n)).values[::37, ::37]
    assert np.max(np.abs(a - b)) <= 1e-14


def test_subset_bounds(workspace):
    _, c, _ = workspace.coefficients("sign_odd", 4)
    with pytest.raises(IndexError):
        c.subset([len(c)])


def test_decay_report_examples():
    lam = np.array([0, 1, 2, 3])
    z = np.zeros(4, np.int64)
    geo = WaveletCoeffSet(lam, z + 1, z + 1, z, z, 2.0 ** (-5.0 * lam) + 0j, 3, 4, 8)
    assert coeff_decay_report(geo).slope == pytest.approx(-5.0, abs=1e-9)
    flat = WaveletCoeffSet(lam[:2], z[:2], z[:2], z[:2], z[:2], np.ones(2, complex), 1, 4, 8)
    assert coeff_decay_report(flat).slope == pytest.approx(0.0, abs=1e-12)
    one = WaveletCoeffSet(lam[:1], z[:1], z[:1], z[:1], z[:1], np.ones(1, complex), 0, 4, 8)
    with pytest.raises(InsufficientData):
        coeff_decay_report(one)


@settings(max_examples=25, deadline=None)
@given(st.floats(-12, 0), st.floats(-10, 10))
def test_decay_report_geometric(rate, offset):
    lam = np.arange(4)
    z = np.zeros(4, np.int64)
    c = WaveletCoeffSet(lam, z + 1, z, z, z, 2.0 ** (offset + rate * lam) + 0j, 3, 2, 8)
    assert coeff_decay_report(c).slope == pytest.approx(rate, abs=1e-9)


def test_j_slope_cos(wp8):
    om = builtin_omega("cos_k")
    sets = []
    for j in (3, 4, 5):
        lat = analysis_lattice(j, 1)
        m = compute_m_j0(compute_K0_hat(om, lat, spatial_step=2.0 ** -7), j)
        sets.append(analyze(m, wp8, 1))
    rep = coeff_decay_report(sets)
    assert rep.js == [3, 4, 5]
    assert all(s <= -0.5 for s in rep.j_slopes.values())


@pytest.mark.xfail(strict=True, reason="per-level rate has not reached M+1+n by lambda=3 "
                                      "at grid-reachable j (see decisions ledger)")
def test_lambda_slope_sign_odd(workspace):
    _, c, _ = workspace.coefficients("sign_odd", 4)
    assert coeff_decay_report(c).slope <= -(8 + 1 + 1) + 0.5
