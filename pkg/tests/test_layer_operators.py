import math

import numpy as np
import pytest
from scipy import special as sp
from scipy.integrate import quad

from trapped_wave import ConfigError
from trapped_wave import layer_operators as lo


def s_mode0_quadrature(k, a):
    """Mode-0 eigenvalue of the single layer on a circle by adaptive quadrature."""
    def part(f):
        g = lambda t: f(0.25j * sp.hankel1(0, 2 * k * a * math.sin(t / 2))) * a  # noqa: E731
        return sum(quad(g, lo_, hi_, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
                   for lo_, hi_ in ((0, math.pi), (math.pi, 2 * math.pi)))
    return part(np.real) + 1j * part(np.imag)


def test_s_mode0_matches_quadrature():
    c = lo.circle(1.0, 512)
    S = lo.assemble(c, 5.0, tag="S").matrix
    val = (S @ np.ones(c.n))[0]
    assert abs(val - s_mode0_quadrature(5.0, 1.0)) < 1e-6


@pytest.mark.parametrize("m", [0, 1, 3, 7])
def test_circle_eigenvalues(m):
    c = lo.circle(1.3, 256)
    k = 4.1
    t = 2 * np.pi * np.arange(c.n) / c.n
    v = np.exp(1j * m * t)
    s, d, dp = lo.circle_eigenvalues(k, 1.3, m)
    for tag, lam in (("S", s), ("D", d), ("Dprime", dp)):
        M = lo.assemble(c, k, tag=tag).matrix
        assert np.max(np.abs(M @ v - lam * v)) < 1e-10


def test_circle_matrices_are_circulant():
    S = lo.assemble(lo.circle(1.0, 128), 3.0, tag="S").matrix
    assert np.max(np.abs(S - np.roll(np.roll(S, 1, 0), 1, 1))) < 1e-14


def test_double_layer_on_constants_small_k():
    c = lo.circle(1.0, 64)
    D = lo.assemble(c, 1e-4, tag="D", check_resolution=False).matrix
    assert np.max(np.abs(D @ np.ones(c.n) + 0.5)) < 1e-6


def test_inv_norm_of_half_identity():
    assert lo.inv_norm(0.5 * np.eye(10)) == pytest.approx(2.0)
    assert lo.inv_norm(np.diag([1.0, 1.0, 0.0])) == math.inf
    assert lo.inv_norm(np.diag([1.0, 0.0]), return_condition=True) == (math.inf, True)


def test_circle_combined_field_norm_moderate():
    c = lo.circle(1.0, 512)
    a, ap = lo.assemble_pair(c, 5.0)
    na, nap = lo.inv_norm(a), lo.inv_norm(ap)
    assert 1 <= na <= 50
    assert abs(na - nap) / na < 0.01


def test_two_circles_a_and_aprime_agree():
    c = lo.two_circles(1.0, 1.0, 200)
    for k in (2.3, 4.7):
        a, ap = lo.assemble_pair(c, k)
        na, nap = lo.inv_norm(a), lo.inv_norm(ap)
        assert abs(na - nap) / na < 0.01


def test_resolution_doubling():
    k = 4.0
    vals = [lo.inv_norm(lo.assemble_pair(lo.two_circles(1.0, 1.0, n), k)[0]) for n in (160, 320)]
    assert abs(vals[0] - vals[1]) / vals[1] < 0.01


def test_inv_norm_matches_numpy_svd():
    c = lo.circle(1.0, 640)
    a = lo.assemble(c, 7.0)
    b = lo._l2_matrix(a)
    dense = 1 / np.linalg.svd(b, compute_uv=False)[-1]
    assert lo.inv_norm(a) == pytest.approx(dense, rel=1e-8)


def test_pure_double_layer_singular_at_interior_neumann_eigenvalue():
    # 1/2 + D annihilates mode 0 where J_0'(k) = 0, the first at k = 3.8317...
    k = sp.jnp_zeros(0, 1)[0]
    c = lo.circle(1.0, 256)
    near = lo.inv_norm(lo.assemble(c, k, eta=0.0))
    away = lo.inv_norm(lo.assemble(c, k - 0.4, eta=0.0))
    assert near >= 1e3 and away < 1e2
    assert lo.inv_norm(lo.assemble(c, k)) < 1e2


def test_circle_has_no_spikes():
    c = lo.circle(1.0, 448)
    rows = lo.spike_sweep(c, np.arange(2.0, 14.01, 0.25))
    assert not any(r.spike_flag for r in rows)


def test_under_resolved_raises():
    with pytest.raises(ConfigError):
        lo.assemble(lo.circle(1.0, 64), 20.0)
    with pytest.raises(ConfigError):
        lo.assemble(lo.circle(1.0, 64), 2.0, tag="X")
    with pytest.raises(ConfigError):
        lo.two_circles(1.0, 0.0)


def test_detect_spikes_synthetic():
    v = np.ones(200)
    v[[40, 100, 160]] = 50
    assert list(np.flatnonzero(lo.detect_spikes(v))) == [40, 100, 160]
    rows = [lo.SweepRow(k=float(i), inv_norm_A=x, inv_norm_Aprime=x, spike_flag=f)
            for i, (x, f) in enumerate(zip(v, lo.detect_spikes(v)))]
    assert lo.spike_spacing(rows) == 60
    assert list(lo.local_maxima(v)) == [40, 100, 160]
