import numpy as np
import pytest

from muskat.grid import (FrequencyIndex, GridSpec, ScalarField, SobolevOrder,
                         band_limited_random, export_csv, gradient, integrate,
                         l2_norm, load_field, make_field, make_gaussian_bump,
                         make_mode, make_zero, save_field, sobolev_norm,
                         spectral_derivative)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(4, 1.0, 16)
    with pytest.raises(ValueError):
        GridSpec(1, 1.0, 4)
    with pytest.raises(ValueError):
        GridSpec(2, -1.0, 16)
    g = GridSpec(2, 10.0, 20)
    assert g.spacing * g.points == g.extent


def test_field_invariants():
    g = GridSpec(1, 1.0, 16)
    with pytest.raises(ValueError):
        ScalarField(g, np.full(16, np.nan))
    with pytest.raises(ValueError):
        ScalarField(g, np.zeros(8))
    u = make_zero(g)
    with pytest.raises(ValueError):
        u.values[0] = 1.0  # immutable buffer


def test_frequency_index_bounds():
    g = GridSpec(1, 2 * np.pi, 16)
    FrequencyIndex((8,), g)
    with pytest.raises(ValueError):
        FrequencyIndex((9,), g)
    np.testing.assert_allclose(FrequencyIndex((2,), g).physical(), [2.0])


def test_single_mode_derivative():
    g = GridSpec(1, 4.0, 64)
    u = make_mode(g, 1.0, (1,))
    du = spectral_derivative(u, 0)
    x = g.axis_coords()
    expected = -(2 * np.pi / g.extent) * np.sin(2 * np.pi * x / g.extent)
    np.testing.assert_allclose(du.values, expected, atol=1e-12)


def test_constant_derivative_zero():
    g = GridSpec(2, 3.0, 16)
    u = ScalarField(g, np.full(g.shape, 2.5))
    for j in range(2):
        assert np.max(np.abs(spectral_derivative(u, j).values)) < 1e-13


def test_derivative_matches_finite_differences():
    # central differences are the independent O(h^2) oracle
    g = GridSpec(1, 2 * np.pi, 128)
    rng = np.random.default_rng(7)
    u = band_limited_random(g, 4, rng)
    du = spectral_derivative(u, 0)
    h = g.spacing
    fd = (np.roll(u.values, -1) - np.roll(u.values, 1)) / (2 * h)
    # O(h^2) with the third-derivative constant of a |k|<=4 field
    assert np.max(np.abs(du.values - fd)) < (4.0**3 / 6.0) * h**2 * np.max(np.abs(u.values)) * 1.5


def test_derivatives_commute():
    g = GridSpec(2, 5.0, 24)
    rng = np.random.default_rng(3)
    u = band_limited_random(g, 5, rng)
    a = spectral_derivative(spectral_derivative(u, 0), 1)
    b = spectral_derivative(spectral_derivative(u, 1), 0)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_integral_of_derivative_vanishes():
    g = GridSpec(1, 7.0, 64)
    rng = np.random.default_rng(11)
    u = band_limited_random(g, 9, rng)
    assert abs(integrate(spectral_derivative(u, 0))) < 1e-10


def test_axis_out_of_range():
    g = GridSpec(1, 1.0, 16)
    with pytest.raises(ValueError):
        spectral_derivative(make_zero(g), 1)


def test_sobolev_parseval():
    g = GridSpec(2, 3.0, 16)
    rng = np.random.default_rng(5)
    u = band_limited_random(g, 6, rng)
    assert abs(sobolev_norm(u, 0.0) - l2_norm(u)) <= 1e-12 * l2_norm(u)


def test_sobolev_constant():
    g = GridSpec(1, 4.0, 32)
    c = -1.7
    u = ScalarField(g, np.full(g.shape, c))
    for s in (0.0, 1.0, 2.5):
        assert abs(sobolev_norm(u, SobolevOrder(s)) - abs(c) * g.extent**0.5) < 1e-12


def test_sobolev_single_mode():
    g = GridSpec(1, 2 * np.pi, 64)
    eps, k, s = 1e-3, 3, 1.5
    u = make_mode(g, eps, (k,))
    expected = eps * (1 + k**2) ** (s / 2) * np.sqrt(g.extent / 2)
    assert abs(sobolev_norm(u, s) - expected) < 1e-12 * expected


def test_subcritical_flag():
    assert SobolevOrder(2.1).subcritical(2)
    assert not SobolevOrder(2.0).subcritical(2)


def test_integrate_constant_and_mode():
    g = GridSpec(2, 3.0, 16)
    assert abs(integrate(ScalarField(g, np.full(g.shape, 2.0))) - 2.0 * 3.0**2) < 1e-12
    assert abs(integrate(make_mode(g, 1.0, (1, 0)))) < 1e-12


def test_gaussian_mass():
    # oracle: the analytic Gaussian integral amplitude*(2*pi)^(N/2)*width^N
    g = GridSpec(1, 40.0, 256)
    amp, width = 0.7, 1.3
    u = make_gaussian_bump(g, amp, [20.0], width)
    mass = amp * np.sqrt(2 * np.pi) * width
    assert abs(integrate(u) - mass) < 1e-8 * mass


def test_gaussian_strict_rejects_fat_bump():
    g = GridSpec(1, 10.0, 64)
    with pytest.raises(ValueError):
        make_gaussian_bump(g, 1.0, [5.0], 4.0)
    make_gaussian_bump(g, 1.0, [5.0], 4.0, strict=False)


def test_make_field_kinds():
    g = GridSpec(1, 2 * np.pi, 32)
    assert np.all(make_field(g, "zero").values == 0)
    m = make_field(g, "mode", amplitude=1.0, k=(1,))
    x = g.axis_coords()
    np.testing.assert_allclose(m.values, np.cos(x), atol=1e-14)
    with pytest.raises(ValueError):
        make_field(g, "sawtooth")


def test_snapshot_roundtrip(tmp_path):
    g = GridSpec(2, 6.0, 12)
    rng = np.random.default_rng(2)
    u = band_limited_random(g, 4, rng)
    path = tmp_path / "f.bin"
    save_field(path, u)
    v = load_field(path)
    assert v.grid == g
    assert np.array_equal(v.values, u.values)


def test_snapshot_bad_magic(tmp_path):
    path = tmp_path / "g.bin"
    path.write_bytes(b"NOPE" + bytes(60))
    with pytest.raises(ValueError):
        load_field(path)


def test_csv_export(tmp_path):
    g = GridSpec(1, 1.0, 8)
    u = make_mode(g, 2.0, (1,))
    p = tmp_path / "f.csv"
    export_csv(p, u)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "i0,value"
    assert len(lines) == 9
    assert float(lines[1].split(",")[1]) == u.values[0]


def test_gradient_helper():
    g = GridSpec(2, 2 * np.pi, 16)
    u = make_mode(g, 1.0, (0, 2))
    gx, gy = gradient(u)
    assert np.max(np.abs(gx.values)) < 1e-12
    assert np.max(np.abs(gy.values)) > 0.1
