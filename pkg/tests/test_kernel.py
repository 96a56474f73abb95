import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughsing.exceptions import DomainError, GridTooCoarse, InvalidParameter, OutOfRange
from roughsing.fit import linear_fit
from roughsing.kernel import (K0Transform, Lattice, SpatialShellKernel, alpha_eval, beta_j_eval,
                              compute_K0_hat, compute_m_j0, cz_certificate, envelope_check,
                              eval_m_jk, k0_samples, shell_overlap_count)
from roughsing.sphere import BUILTIN_KINDS, builtin_omega, project_mean_zero


@pytest.fixture(scope="module")
def zero_omega():
    return project_mean_zero(np.zeros(512))


def test_alpha_values():
    assert alpha_eval(0.5) == 1.0
    assert alpha_eval(1.0) == 1.0
    assert alpha_eval(2.5) == 0.0
    assert alpha_eval(2.0) == 0.0
    assert 0 < alpha_eval(1.5) < 1


def test_alpha_monotone_and_symmetric():
    t = np.linspace(1.0, 2.0, 1001)
    a = alpha_eval(t[1:-1])
    assert np.all(np.diff(a) <= 0)
    assert np.all(np.diff(a[100:-100]) < 0)
    # psi(2 - t)/(psi(2 - t) + psi(t - 1)) is antisymmetric about t = 3/2
    assert np.allclose(a + a[::-1], 1.0, atol=1e-14)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_alpha_domain(t):
    with pytest.raises(DomainError):
        alpha_eval(t)


def test_beta_support_examples():
    assert beta_j_eval(0, 0.25) == 0.0
    assert beta_j_eval(0, 3.0) == 0.0
    with pytest.raises(DomainError):
        beta_j_eval(0, 0.0)


def test_beta_scaling_example():
    assert beta_j_eval(3, 5.0) == pytest.approx(beta_j_eval(0, 5.0 / 8), abs=1e-15)


def test_partition_of_unity_example():
    assert sum(beta_j_eval(j, 1.37) for j in range(-20, 21)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-18.0, 18.0))
def test_partition_of_unity(log_r):
    r = 2.0 ** log_r
    total = sum(beta_j_eval(j, r) for j in range(-20, 21))
    assert abs(total - 1.0) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(-10, 10), st.floats(0.01, 100.0))
def test_beta_scaling(j, r):
    assert beta_j_eval(j, r) == pytest.approx(beta_j_eval(0, 2.0 ** -j * r), abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 12), st.floats(1e-6, 1e6, allow_nan=False))
def test_shell_overlap(j, x):
    # discrete relaxation of "sum_k chi_E_jk <= j": c1 = 1/4, c2 = 4 give j + 4
    assert shell_overlap_count(x, j) == j + 4


def test_shell_overlap_dyadic_endpoints():
    xs = 2.0 ** np.arange(-6, 7)
    assert np.all(shell_overlap_count(xs, 5) == 9)
    ks = np.arange(-40, 40)
    for x in xs:
        brute = np.sum((0.25 * 2.0 ** -ks < x) & (x <= 4.0 * 2.0 ** (5 - ks)))
        assert brute == 9


def test_k0_samples_support():
    om = builtin_omega("cos_k")
    x = np.linspace(-3, 3, 121)
    v = k0_samples(om, x, x)
    r = np.hypot(x[:, None], x[None, :])
    assert np.all(v[(r <= 0.5) | (r >= 2)] == 0)


def test_k0hat_zero_omega(zero_omega):
    k = compute_K0_hat(zero_omega, Lattice(0.25, 32))
    assert np.all(k.values == 0)


@pytest.mark.parametrize("kind", BUILTIN_KINDS)
def test_k0hat_vanishes_at_origin(kind):
    lat = Lattice(0.5, 16)
    k = compute_K0_hat(builtin_omega(kind), lat)
    i = lat.n // 2
    assert lat.axis[i] == 0
    assert abs(k.values[i, i]) <= 1e-8


def test_fft_and_direct_agree():
    om = builtin_omega("sign_odd")
    lat = Lattice(0.25, 64)
    step = 1.0 / (lat.spacing * lat.n)
    a = compute_K0_hat(om, lat, method="fft")
    b = compute_K0_hat(om, lat, spatial_step=step)
    assert np.max(np.abs(a.values - b.values)) <= 1e-12 * np.max(np.abs(b.values))


def test_direct_matches_brute_force_sum():
    om = builtin_omega("cos_k")
    k0 = K0Transform(om, 2.0 ** -4)
    eta = np.array([0.3, -1.7])
    X = k0.x
    ph = np.exp(-2j * np.pi * (eta[0] * X[:, None] + eta[1] * X[None, :]))
    brute = np.sum(k0.samples * ph) * k0.spatial_step ** 2
    assert k0.on_tensor(eta[:1], eta[1:])[0, 0] == pytest.approx(brute, abs=1e-13)


def test_k0hat_errors():
    om = builtin_omega("cos_k")
    with pytest.raises(GridTooCoarse):
        compute_K0_hat(om, Lattice(0.5, 16), method="fft")
    with pytest.raises(GridTooCoarse):
        compute_K0_hat(om, Lattice(1.0, 256), spatial_step=0.25)


def test_envelope_cos():
    k = compute_K0_hat(builtin_omega("cos_k"), Lattice(1.0 / 8, 256))
    rep = envelope_check(k, 0.5)
    assert np.isfinite(rep.constant) and rep.holds_fraction == 1.0
    assert np.isfinite(rep.derivative_constant)


@pytest.fixture(scope="module")
def m4():
    om = builtin_omega("sign_odd")
    lat = Lattice.covering(2.0 ** 5, 2.0 ** -2)
    return compute_m_j0(compute_K0_hat(om, lat), 4)


def test_m_j0_support_exact(m4):
    r = m4.radius()
    assert np.all(m4.values[(r < 2.0 ** 3) | (r > 2.0 ** 5)] == 0)
    assert np.any(m4.values != 0)


def test_m_j0_conjugate_symmetry(m4):
    v = m4.values[1:, 1:]
    assert np.max(np.abs(v - np.conj(v[::-1, ::-1]))) <= 1e-10


def test_m_j0_outside_shell_point(m4):
    r = 2.0 ** 5.5 / np.sqrt(2)
    with pytest.raises(OutOfRange):
        eval_m_jk(m4, 0, r, r)
    assert eval_m_jk(m4, 0, r, r, strict=False) == 0


def test_m_j0_errors():
    k = compute_K0_hat(builtin_omega("cos_k"), Lattice(0.25, 64))
    with pytest.raises(GridTooCoarse):
        compute_m_j0(k, 4)
    with pytest.raises(GridTooCoarse):
        compute_m_j0(k, -1)


def test_symbol_norms_by_j():
    om = builtin_omega("sign_odd")
    js, sup, l2 = [3, 4, 5], [], []
    for j in js:
        m = compute_m_j0(compute_K0_hat(om, Lattice.covering(2.0 ** (j + 1), 2.0 ** (j - 6))), j)
        sup.append(m.norm_inf)
        l2.append(m.norm_l2)
    assert sup[0] >= sup[1] >= sup[2]
    assert linear_fit(js, np.log2(sup))[0] <= -0.25
    # uniform L2 bound with the constant taken from j = 3
    assert max(l2) <= 1.05 * l2[0]


def test_eval_m_jk_node_and_scaling(m4):
    ax = m4.axis
    i, k = 100, 77
    assert eval_m_jk(m4, 0, ax[i], ax[k]) == m4.values[i, k]
    # |xi| = 2**(j-2): 2 xi sits on the inner edge of the shell
    assert eval_m_jk(m4, 1, 2.0 ** 2, 0.0) == 0
    assert eval_m_jk(m4, 1, 2.0 ** 1, 0.0) == 0
    assert eval_m_jk(m4, 1, 4.5, 1.0) == pytest.approx(eval_m_jk(m4, 0, 9.0, 2.0), abs=1e-15)


def test_eval_m_jk_against_shifted_recomputation():
    om = builtin_omega("cos_k")
    j = 1
    k0 = K0Transform(om, 2.0 ** -6)
    lat = Lattice.covering(2.0 ** (j + 1), 2.0 ** -8)
    ax = lat.axis
    m = compute_m_j0(compute_K0_hat(om, lat, spatial_step=2.0 ** -6), j)
    # half-step shifted points, recomputed exactly from the transform
    pts = ax[::16][1:-1] + lat.spacing / 2
    approx = eval_m_jk(m, 0, pts[:, None], pts[None, :])
    exact = k0.on_tensor(pts, pts) * beta_j_eval(j, np.hypot(pts[:, None], pts[None, :]) + 1e-300)
    assert np.max(np.abs(approx - exact)) <= 1e-3 * np.max(np.abs(exact))


def test_spatial_kernel_homogeneity():
    sk = SpatialShellKernel(builtin_omega("sign_odd"), 2)
    y = np.array([0.7, 1.3, -2.1])
    z = np.array([0.4, -0.9, 0.5])
    # K_j is the sum over i of 2**(-2i) K_j^0(2**-i x): the i-sum shifts under x -> 2x
    b = sk(y, z)
    assert np.all(b != 0)
    # so K_j is homogeneous of degree -2
    assert np.allclose(sk(2 * y, 2 * z), b / 4, rtol=1e-9, atol=0)


def test_cz_zero_omega(zero_omega):
    c = cz_certificate(zero_omega, 2, samples=100)
    assert c.fitted_A == 0 and c.fitted_A_smooth == 0


def test_cz_ratios_and_seed_stability():
    om = builtin_omega("cos_k")
    a = cz_certificate(om, 3, 0.5, 2000, seed=0)
    b = cz_certificate(om, 3, 0.5, 2000, seed=1)
    for c in (a, b):
        assert c.worst_ratio_size <= 1 and c.worst_ratio_smooth <= 1
        assert c.sample_count == 2000
    assert abs(a.fitted_A - b.fitted_A) <= 0.1 * max(a.fitted_A, b.fitted_A)


def test_cz_deterministic():
    om = builtin_omega("sign_odd")
    assert cz_certificate(om, 2, samples=200, seed=5) == cz_certificate(om, 2, samples=200, seed=5)


@pytest.mark.parametrize("kw", [{"epsilon": 0.0}, {"epsilon": 1.0}, {"samples": 50}])
def test_cz_parameter_errors(kw):
    with pytest.raises(InvalidParameter):
        cz_certificate(builtin_omega("cos_k"), 2, **kw)
