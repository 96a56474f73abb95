import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import dawsn, erf

from roughsing.bilinear import (LineFunction, PrecomputedMultiplier, ShellSum, antiderivative,
                                apply_multiplier, apply_T_j, apply_T_sum, calderon_commutator,
                                direct_pv_quadrature, directional_bht, fft_hilbert,
                                preset_function, resolvable_k)
from roughsing.exceptions import GridMismatch, InvalidGrid, InvalidParameter, InvalidTruncation
from roughsing.kernel import K0Transform, ShellSymbol
from roughsing.probe import band_bins, random_bandlimited
from roughsing.sphere import builtin_omega


@pytest.fixture(scope="module")
def fg():
    return preset_function("gauss", 256, 8.0), preset_function("wave", 256, 8.0)


@pytest.fixture(scope="module")
def shell3():
    return ShellSymbol(K0Transform(builtin_omega("sign_odd"), 2.0 ** -6), 3)


@pytest.mark.parametrize("n, half", [(100, 8.0), (256, 3.0)])
def test_line_function_validation(n, half):
    with pytest.raises(InvalidGrid):
        LineFunction(np.zeros(n), half)


def test_grid_and_norms():
    f = LineFunction(np.ones(64), 4.0)
    assert f.x[0] == -4.0 and f.spacing == 0.125
    assert f.lp_norm(1) == pytest.approx(8.0)
    assert f.lp_norm(2, middle=True) == pytest.approx(np.sqrt(4.0 - 0.125))
    with pytest.raises(InvalidParameter):
        preset_function("nope")


def test_multiplier_one_is_product():
    f, g = preset_function("gauss", 2048), preset_function("bump", 2048)
    out = apply_multiplier(1.0, f, g, spectral_tol=0.0).output.samples
    assert np.linalg.norm(out - f.samples * g.samples) <= 1e-10 * np.linalg.norm(f.samples * g.samples)


def test_separable_band_multiplier(fg):
    f, g = fg
    B = 0.75
    m = lambda e1, e2: (np.abs(e1) <= B) + 0 * e2  # noqa: E731
    out = apply_multiplier(m, f, g, spectral_tol=0.0).output.samples
    F = np.fft.fft(f.samples)
    PBf = np.fft.ifft(np.where(np.abs(f.freqs) <= B, F, 0))
    assert np.max(np.abs(out - PBf * g.samples)) <= 1e-12


def test_dilation_argument(fg):
    f, g = fg
    m = lambda e1, e2: np.exp(-(e1 ** 2 + e2 ** 2))  # noqa: E731
    m2 = lambda e1, e2: np.exp(-4 * (e1 ** 2 + e2 ** 2))  # noqa: E731
    a = apply_multiplier(m, f, g, k=1, spectral_tol=0.0).output.samples
    b = apply_multiplier(m2, f, g, spectral_tol=0.0).output.samples
    assert np.max(np.abs(a - b)) <= 1e-13


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-3, 3), st.floats(-3, 3))
def test_bilinearity(seed, s, t):
    rng = np.random.default_rng(seed)
    f1, f2, g = (LineFunction(rng.standard_normal(64), 4.0) for _ in range(3))
    m = lambda e1, e2: np.cos(e1 - 2 * e2)  # noqa: E731
    ap = lambda a: apply_multiplier(m, a, g, spectral_tol=0.0).output.samples  # noqa: E731
    lhs = ap(f1.with_samples(s * f1.samples + t * f2.samples))
    rhs = s * ap(f1) + t * ap(f2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_real_symbol_gives_real_output(shell3):
    f = random_bandlimited(5, (0.125, 4.0), 2, 256, 8.0)
    g = random_bandlimited(6, (0.125, 4.0), 2, 256, 8.0)
    out = apply_multiplier(shell3, f, g, k=2, spectral_tol=0.0).output.samples
    assert np.max(np.abs(out)) > 1e-4
    assert np.max(np.abs(out.imag)) <= 1e-10 * np.max(np.abs(out))


def test_grid_mismatch(fg):
    f, _ = fg
    with pytest.raises(GridMismatch):
        apply_multiplier(1.0, f, preset_function("gauss", 128, 8.0))


def test_T_j_zero_input(fg, shell3):
    f, _ = fg
    res = apply_T_j(shell3, None, f, f.with_samples(np.zeros(f.n)))
    assert np.all(res.output.samples == 0) and res.l1_norm == 0


def test_T_j_reports_unresolved(fg, shell3):
    f, g = fg
    res = apply_T_j(shell3, range(-10, 20), f, g)
    assert res.meta["above_nyquist"] and res.meta["below_resolution"]
    assert res.meta["omitted"] == []
    part = apply_T_j(shell3, [0, 1], f, g)
    assert set(part.meta["omitted"]) == set(resolvable_k(shell3, f)) - {0, 1}


def test_T_j_equals_sum_over_k(fg, shell3):
    f, g = fg
    total = apply_T_j(shell3, None, f, g).output.samples
    pieces = sum(apply_multiplier(shell3, f, g, k).output.samples for k in resolvable_k(shell3, f))
    assert np.max(np.abs(total - pieces)) <= 1e-13


def test_band_limited_restricted_k(shell3):
    # spectra in [1/4, 4]: only dilations whose shell meets |xi1| in that band contribute
    n, half, band = 256, 8.0, (0.25, 4.0)
    f = random_bandlimited(1, band, 2, n, half)
    g = random_bandlimited(2, band, 2, n, half)
    full = apply_T_j(shell3, None, f, g, spectral_tol=0.0).output.samples
    inner, outer = 2.0 ** 2, 2.0 ** 4
    ks = [k for k in resolvable_k(shell3, f)
          if outer * 2.0 ** -k > band[0] and inner * 2.0 ** -k <= np.sqrt(2) * band[1]]
    part = apply_T_j(shell3, ks, f, g, spectral_tol=0.0).output.samples
    assert np.max(np.abs(full - part)) <= 1e-13 * np.max(np.abs(full))
    assert len(ks) <= 3 + 4 + 1


def test_precomputed_matches_direct(shell3):
    n, half, band = 256, 8.0, (0.125, 4.0)
    tmpl = LineFunction(np.zeros(n), half)
    op = PrecomputedMultiplier(shell3, tmpl, band_bins(n, half, band), resolvable_k(shell3, tmpl))
    f = random_bandlimited(3, band, 2, n, half)
    g = random_bandlimited(4, band, 2, n, half)
    a = op(f, g).output.samples
    b = apply_T_j(shell3, None, f, g, spectral_tol=0.0).output.samples
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_shell_sum_is_sum_of_shells(fg):
    f, g = fg
    om = builtin_omega("cos_k")
    k0 = K0Transform(om, 2.0 ** -6)
    both = apply_T_sum(om, [2, 3], f, g, spatial_step=2.0 ** -6).output.samples
    sep = sum(apply_T_j(ShellSymbol(k0, j), resolvable_k(ShellSum(k0, [2, 3]), f), f, g).output.samples
              for j in (2, 3))
    assert np.max(np.abs(both - sep)) <= 1e-12 * np.max(np.abs(sep))


@pytest.fixture(scope="module")
def quad_fg():
    return preset_function("gauss", 512, 16.0), preset_function("gauss_shift", 512, 16.0)


def test_quadrature_zero_f(quad_fg):
    f, g = quad_fg
    out = direct_pv_quadrature(builtin_omega("cos_k"), f.with_samples(np.zeros(f.n)), g, [0.0, 1.0])
    assert np.all(out == 0)


@pytest.mark.parametrize("kind", ["cos_k", "sign_odd", "commutator"])
def test_quadrature_eps_halving(quad_fg, kind):
    f, g = quad_fg
    xs = np.linspace(-3, 3, 16)
    om = builtin_omega(kind)
    a = direct_pv_quadrature(om, f, g, xs, eps=1e-3)
    b = direct_pv_quadrature(om, f, g, xs, eps=5e-4)
    assert np.max(np.abs(a - b)) <= 0.01 * np.max(np.abs(a))


def test_bump_pair_approaches_directional_bht(quad_fg):
    f, g = quad_fg
    xs = np.linspace(-3, 3, 16)
    th0 = np.pi / 4
    ref = directional_bht(f, g, th0, xs)
    errs = []
    for w in (0.1, 0.05):
        om = builtin_omega("bump_pair", 4096, theta0=th0, width=w)
        out = direct_pv_quadrature(om, f, g, xs)
        errs.append(np.abs(out - ref).sum() / np.abs(ref).sum())
    assert errs[1] < errs[0] and errs[1] <= 0.01


def test_quadrature_truncation_errors(quad_fg):
    f, g = quad_fg
    om = builtin_omega("cos_k")
    for eps, R in [(1.0, 0.5), (0.0, 1.0), (1e-3, 9.0)]:
        with pytest.raises(InvalidTruncation):
            direct_pv_quadrature(om, f, g, [0.0], eps=eps, R=R)
    with pytest.raises(GridMismatch):
        direct_pv_quadrature(om, f, preset_function("gauss", 256, 16.0), [0.0])


def test_fft_hilbert_gaussian():
    # H exp(-x^2) = (2/sqrt(pi)) D(x) with D the Dawson function
    f = preset_function("gauss", 2048, 16.0)
    H = fft_hilbert(f).samples
    ref = 2 / np.sqrt(np.pi) * dawsn(f.x)
    mid = f.middle()
    assert np.max(np.abs(H[mid] - ref[mid])) <= 2e-3


def test_antiderivative_gaussian():
    f = preset_function("gauss", 2048, 16.0)
    A = antiderivative(f).samples
    ref = np.sqrt(np.pi) / 2 * (erf(f.x) + 1)
    assert np.max(np.abs(A - ref)) <= 1e-8


def test_commutator_zero_a():
    f = preset_function("gauss", 256, 8.0)
    out = calderon_commutator(f.with_samples(np.zeros(f.n)), f)
    assert np.all(out.samples == 0)


def test_commutator_constant_a_is_hilbert():
    f = preset_function("bump", 2048, 32.0)
    mid = f.middle()
    c = calderon_commutator(f.with_samples(np.ones(f.n)), f).samples[mid]
    ref = np.pi * fft_hilbert(f).samples[mid]
    assert np.linalg.norm(c - ref) <= 0.02 * np.linalg.norm(ref)
