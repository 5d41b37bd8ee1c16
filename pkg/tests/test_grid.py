import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from scfloer.grid import (
    Field,
    GridError,
    cutoff_beta,
    cutoff_beta_prime,
    diff_s,
    diff_t,
    load_field,
    make_grid,
    margin_audit,
    save_field,
    shift_field,
    weight_eta,
    weight_eta_prime,
)


def test_make_grid_spacings():
    g = make_grid(10, 401, 32)
    assert g.h_s == pytest.approx(0.05)
    assert g.h_t == pytest.approx(1 / 32)


def test_make_grid_minimal_legal():
    g = make_grid(1, 3, 4)
    assert g.n_s == 3 and g.n_t == 4
    assert 0.0 in g.s


def test_make_grid_rejects():
    with pytest.raises(GridError):
        make_grid(10, 400, 32)  # even n_s
    with pytest.raises(GridError):
        make_grid(10, 401, 3)
    with pytest.raises(GridError):
        make_grid(0.0, 401, 8)


def test_cutoff_beta_plateaus_and_midpoint():
    assert cutoff_beta(-1.0) == 0.0
    assert cutoff_beta(1.0) == 1.0
    assert cutoff_beta(-5.0) == 0.0 and cutoff_beta(7.0) == 1.0
    assert cutoff_beta(0.0) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0, allow_nan=False))
def test_cutoff_beta_symmetry_and_range(s):
    b = cutoff_beta(s)
    assert 0.0 <= b <= 1.0
    assert b + cutoff_beta(-s) == pytest.approx(1.0, abs=1e-14)


def test_cutoff_beta_monotone_inside():
    s = np.linspace(-1, 1, 400)
    b = cutoff_beta(s)
    assert np.all(np.diff(b) >= 0)
    assert np.all(cutoff_beta_prime(np.array([-1.0, 1.0, 2.0])) == 0.0)


def test_cutoff_beta_prime_matches_fd():
    for s0 in (-0.7, -0.2, 0.0, 0.4, 0.9):
        h = 1e-6
        fd = (cutoff_beta(s0 + h) - cutoff_beta(s0 - h)) / (2 * h)
        assert cutoff_beta_prime(s0) == pytest.approx(fd, abs=1e-8)


def test_weight_eta_outside():
    assert weight_eta(2.0) == 2.0
    assert weight_eta(-3.0) == 3.0
    assert weight_eta(0.5) == 0.5  # exact already at the mollifier radius


def test_weight_eta_origin_from_quadrature():
    # eta(0) = int |u| phi(u) du with the same normalized mollifier
    def phi_raw(u):
        inner = 1.0 - (2.0 * u) ** 2
        return np.exp(-1.0 / inner) if inner > 0 else 0.0

    mass, _ = quad(phi_raw, -0.5, 0.5, limit=200)
    expected, _ = quad(lambda u: abs(u) * phi_raw(u) / mass, -0.5, 0.5, limit=200)
    assert 0.0 < expected < 0.5
    assert weight_eta(0.0) == pytest.approx(expected, rel=1e-6)


def test_weight_eta_range_and_prime():
    s = np.linspace(-0.999, 0.999, 501)
    vals = weight_eta(s)
    assert np.all(vals > 0.0) and np.all(vals < 1.0)
    assert weight_eta_prime(2.0) == 1.0 and weight_eta_prime(-2.0) == -1.0
    h = 1e-6
    for s0 in (-0.3, 0.1, 0.45):
        fd = (weight_eta(s0 + h) - weight_eta(s0 - h)) / (2 * h)
        assert weight_eta_prime(s0) == pytest.approx(fd, abs=1e-6)


def test_shift_identity_and_support_loss():
    g = make_grid(5, 201, 4)
    c = Field.from_function(g, lambda s, t: 2.0 + 0 * s)
    out = shift_field(c, 0.0)
    assert np.array_equal(out.values, c.values)
    bump = Field.from_function(g, lambda s, t: np.where(np.abs(s) <= 1, 1.0, 0.0))
    gone = shift_field(bump, 2 * g.s_max)
    assert gone.max_abs() == 0.0


def test_shift_pointwise_oracle():
    g = make_grid(10, 401, 4)
    f = Field.from_function(g, lambda s, t: np.exp(-(s**2)) + 0 * t)
    exact = Field.from_function(g, lambda s, t: np.exp(-((s + 1.0) ** 2)) + 0 * t)
    assert (shift_field(f, 1.0) - exact).max_abs() < 1e-14
    frac = 0.7123
    exact2 = Field.from_function(g, lambda s, t: np.exp(-((s + frac) ** 2)) + 0 * t)
    assert (shift_field(f, frac, mode="interp") - exact2).max_abs() < 1e-5


def test_shift_roundtrip_interior():
    g = make_grid(8, 321, 4)
    f = Field.from_function(g, lambda s, t: np.exp(-(s**2) / 2) * np.cos(2 * np.pi * t))
    back = shift_field(shift_field(f, 3.0), -3.0)
    interior = slice(10, g.n_s - 10)
    assert np.max(np.abs(back.values[interior] - f.values[interior])) < 1e-13


def test_diff_shift_commutation():
    g = make_grid(8, 321, 8)
    f = Field.from_function(g, lambda s, t: np.exp(-(s**2) / 2) * np.exp(2j * np.pi * t))
    a = diff_t(shift_field(f, 2.0), 1)
    b = shift_field(diff_t(f, 1), 2.0)
    assert (a - b).max_abs() == 0.0
    a = diff_s(shift_field(f, 2.0), 1)
    b = shift_field(diff_s(f, 1), 2.0)
    inner = slice(4, g.n_s - 4)
    assert np.max(np.abs(a.values[inner] - b.values[inner])) < 1e-10


def test_diff_constant_and_fourier_oracle():
    g = make_grid(6, 241, 16)
    c = Field.from_function(g, lambda s, t: 3.0 + 0 * s)
    assert diff_s(c, 1).max_abs() < 1e-12
    assert diff_t(c, 1).max_abs() < 1e-12
    u = Field.from_function(g, lambda s, t: np.sin(2 * np.pi * t) + 0 * s)
    du = diff_t(u, 1)
    exact = Field.from_function(g, lambda s, t: 2 * np.pi * np.cos(2 * np.pi * t) + 0 * s)
    assert (du - exact).max_abs() < 1e-12


def test_diff_s_polynomial_exactness():
    g = make_grid(6, 241, 4)
    u = Field.from_function(g, lambda s, t: s**2 + 0 * t)
    d2 = diff_s(u, 2)
    interior = slice(3, g.n_s - 3)
    assert np.max(np.abs(d2.values[interior] - 2.0)) < 1e-8


def test_diff_order_rejected():
    g = make_grid(6, 241, 8)
    u = Field.zeros(g)
    with pytest.raises(GridError):
        diff_s(u, 5)
    with pytest.raises(GridError):
        diff_t(u, 9)


def test_margin_audit():
    g = make_grid(152.0, 305, 4)
    audit = margin_audit(g, 100.0, 0.1)
    assert audit.margin == pytest.approx(51.0)
    assert audit.required == pytest.approx(50.0)
    assert audit.ok
    assert not margin_audit(g, 120.0, 0.1).ok


def test_field_serialization_roundtrip(tmp_path):
    g = make_grid(3, 41, 4)
    rng = np.random.default_rng(0)
    f = Field(g, rng.standard_normal((41, 4, 2)) + 1j * rng.standard_normal((41, 4, 2)))
    path = tmp_path / "field.csv"
    save_field(f, path)
    f2 = load_field(path)
    assert f2.grid == g and f2.target_dim == 2
    assert np.array_equal(f2.values, f.values)
