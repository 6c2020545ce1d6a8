"""Transform layer: grids, multipliers, norms, field containers."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqglab.errors import OverflowGuardError, SymmetryError, UsageError
from sqglab.spectral import (
    GEVREY_EXPONENT_CAP,
    PROFILE_OUTER,
    GridSpec,
    MultiplierSpec,
    SpectralField,
    apply_multiplier,
    field_from_bytes,
    field_lp_norm,
    field_to_bytes,
    forward_transform,
    grid_arrays,
    inverse_transform,
    load_field,
    lp_norm,
    radial_profile,
    riesz_perp,
    save_field,
    sobolev_norm,
)

GRID = GridSpec(64)


def single_mode(grid: GridSpec, k1: int, k2: int, phase: float = 0.0) -> SpectralField:
    x = grid.axis_points()
    xx, yy = np.meshgrid(x, x, indexing="ij")
    s = grid.freq_scale
    return forward_transform(np.cos(s * (k1 * xx + k2 * yy) + phase), grid)


def random_field(grid: GridSpec, rng) -> SpectralField:
    return forward_transform(rng.standard_normal((grid.n, grid.n)), grid)


def test_grid_validation():
    with pytest.raises(UsageError):
        GridSpec(7)
    with pytest.raises(UsageError):
        GridSpec(64, period=-1.0)
    with pytest.raises(UsageError):
        GridSpec(64, dealias_fraction=1.5)


def test_grid_derived_quantities():
    g = GridSpec(128)
    assert g.freq_scale == pytest.approx(1.0)
    assert g.dealias_radius == pytest.approx(128.0 / 3.0)
    small = GridSpec(128, period=2.0 * math.pi / 32.0)
    assert small.freq_scale == pytest.approx(32.0)
    assert small.dealias_radius == pytest.approx(32.0 * 128.0 / 3.0)


def test_transform_roundtrip(rng):
    samples = rng.standard_normal((64, 64))
    field = forward_transform(samples, GRID)
    back = inverse_transform(field)
    assert np.max(np.abs(back - samples)) < 1e-13


def test_forward_rejects_bad_input(rng):
    with pytest.raises(UsageError):
        forward_transform(np.zeros((32, 64)), GRID)
    with pytest.raises(UsageError):
        forward_transform(np.zeros((64, 64), dtype=complex), GRID)


def test_inverse_rejects_asymmetric_coeffs():
    coeffs = np.zeros((64, 64), dtype=complex)
    coeffs[1, 2] = 1.0  # no conjugate partner
    with pytest.raises(SymmetryError):
        inverse_transform(SpectralField(GRID, coeffs))


def test_parseval(rng):
    samples = rng.standard_normal((64, 64))
    field = forward_transform(samples, GRID)
    physical = lp_norm(samples, 2.0, GRID.cell_area)
    spectral = GRID.period * math.sqrt(np.sum(np.abs(field.coeffs) ** 2))
    assert physical == pytest.approx(spectral, rel=1e-12)


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0, 1.7])
def test_fractional_laplacian_eigenmode(s):
    # D^s cos(k.x) = |k|^s cos(k.x)
    field = single_mode(GRID, 3, 4)
    out = apply_multiplier(field, MultiplierSpec.fractional_laplacian(s))
    expected = field.coeffs * 5.0**s
    assert np.max(np.abs(out.coeffs - expected)) < 1e-12


def test_fractional_laplacian_composes():
    field = single_mode(GRID, 2, 7, phase=0.3)
    half = MultiplierSpec.fractional_laplacian(0.35)
    twice = apply_multiplier(apply_multiplier(field, half), half)
    once = apply_multiplier(field, MultiplierSpec.fractional_laplacian(0.7))
    assert np.max(np.abs(twice.coeffs - once.coeffs)) < 1e-12


def test_heat_multiplier_matches_scalar_decay():
    field = single_mode(GRID, 3, 4)
    out = apply_multiplier(field, MultiplierSpec.heat(0.7, 0.9, 0.5))
    factor = math.exp(-0.7 * 0.9 * 5.0**0.5)
    assert np.max(np.abs(out.coeffs - factor * field.coeffs)) < 1e-14


def test_heat_rejects_negative_time():
    with pytest.raises(UsageError):
        MultiplierSpec.heat(1.0, -0.1, 0.5)


def test_gevrey_inverts_heat():
    field = single_mode(GRID, 5, 1)
    cooled = apply_multiplier(field, MultiplierSpec.heat(1.0, 0.2, 1.0))
    warmed = apply_multiplier(cooled, MultiplierSpec.gevrey(1.0, 0.2, 1.0))
    assert np.max(np.abs(warmed.coeffs - field.coeffs)) < 1e-12


def test_gevrey_overflow_guard(rng):
    field = random_field(GRID, rng)
    # weight * t * kmax^gamma far beyond the cap on occupied modes
    t_bad = 2.0 * GEVREY_EXPONENT_CAP / GRID.dealias_radius
    with pytest.raises(OverflowGuardError):
        apply_multiplier(field, MultiplierSpec.gevrey(1.0, t_bad, 1.0))


def test_gevrey_guard_is_support_aware():
    # Only mode |k|=1 occupied: the cap check must use the occupied radius,
    # not the grid's maximum frequency.
    field = single_mode(GRID, 1, 0)
    t = 0.9 * GEVREY_EXPONENT_CAP  # exponent 0.9*cap at |k|=1
    out = apply_multiplier(field, MultiplierSpec.gevrey(1.0, t, 1.0))
    assert np.all(np.isfinite(out.coeffs))


def test_riesz_perp_is_divergence_free(rng):
    field = random_field(GRID, rng)
    u1, u2 = riesz_perp(field)
    ka = grid_arrays(GRID)
    div = ka.k1 * u1.coeffs + ka.k2 * u2.coeffs
    assert np.max(np.abs(div)) < 1e-12


def test_riesz_perp_on_single_mode():
    # theta = cos(k.x): R_j theta = -(k_j/|k|) sin(k.x), so
    # u = (-R_2, R_1) theta = (k2, -k1)/|k| * sin(k.x)
    field = single_mode(GRID, 3, 4)
    u1, u2 = riesz_perp(field)
    x = GRID.axis_points()
    xx, yy = np.meshgrid(x, x, indexing="ij")
    s = np.sin(3.0 * xx + 4.0 * yy)
    assert np.max(np.abs(inverse_transform(u1) - (4.0 / 5.0) * s)) < 1e-12
    assert np.max(np.abs(inverse_transform(u2) - (-3.0 / 5.0) * s)) < 1e-12


def test_riesz_zeroes_mean_and_nyquist(rng):
    field = random_field(GRID, rng)
    u1, u2 = riesz_perp(field)
    n2 = GRID.n // 2
    for u in (u1, u2):
        assert u.coeffs[0, 0] == 0.0
        assert np.max(np.abs(u.coeffs[n2, :])) == 0.0
        assert np.max(np.abs(u.coeffs[:, n2])) == 0.0


def test_sobolev_norm_single_mode():
    # ||cos(k.x)||_{L^2}^2 = (2 pi)^2 / 2 on the 2pi torus
    field = single_mode(GRID, 3, 4)
    l2 = math.sqrt(0.5) * 2.0 * math.pi
    assert sobolev_norm(field, 0.0) == pytest.approx(l2, rel=1e-12)
    assert sobolev_norm(field, 1.5, homogeneous=True) == pytest.approx(
        5.0**1.5 * l2, rel=1e-12
    )
    assert sobolev_norm(field, 1.5) == pytest.approx(
        (1.0 + 25.0) ** 0.75 * l2, rel=1e-12
    )


def test_homogeneous_negative_order_needs_mean_free():
    field = single_mode(GRID, 2, 0)
    coeffs = field.coeffs.copy()
    coeffs[0, 0] = 1.0
    with pytest.raises(UsageError):
        sobolev_norm(field.with_coeffs(coeffs), -0.5, homogeneous=True)


def test_lp_norms(rng):
    samples = rng.standard_normal((64, 64))
    assert lp_norm(samples, math.inf) == pytest.approx(np.max(np.abs(samples)))
    vol = GRID.cell_area
    assert lp_norm(samples, 1.0, vol) == pytest.approx(np.sum(np.abs(samples)) * vol)
    with pytest.raises(UsageError):
        lp_norm(samples, 0.5)


def test_field_lp_matches_sample_lp(rng):
    field = random_field(GRID, rng)
    samples = inverse_transform(field)
    for p in (1.0, 2.0, 4.0, math.inf):
        assert field_lp_norm(field, p) == pytest.approx(
            lp_norm(samples, p, GRID.cell_area), rel=1e-12
        )


@given(st.integers(min_value=-20, max_value=20), st.integers(min_value=-20, max_value=20))
def test_mode_l2_independent_of_wavevector(k1, k2):
    if k1 == 0 and k2 == 0:
        return
    field = single_mode(GRID, k1, k2)
    assert sobolev_norm(field, 0.0) == pytest.approx(
        math.sqrt(0.5) * 2.0 * math.pi, rel=1e-10
    )


def test_radial_profile_shape():
    r = np.array([0.0, 0.5, 1.0, 1.05, PROFILE_OUTER, 2.0])
    vals = radial_profile(r)
    assert vals[0] == 1.0 and vals[2] == 1.0
    assert 0.0 < vals[3] < 1.0
    assert vals[4] == 0.0 and vals[5] == 0.0
    # smooth join: profile stays within [0, 1]
    fine = radial_profile(np.linspace(0.0, 1.5, 2000))
    assert np.all((fine >= 0.0) & (fine <= 1.0))


def test_field_container_roundtrip(tmp_path, rng):
    field = random_field(GridSpec(32, period=3.7), rng)
    path = tmp_path / "f.sqgf"
    save_field(field, str(path))
    back = load_field(str(path))
    assert back.grid == field.grid
    assert np.array_equal(back.coeffs, field.coeffs)


def test_field_bytes_reject_corruption(rng):
    field = random_field(GridSpec(16), rng)
    blob = field_to_bytes(field)
    assert field_from_bytes(blob).grid.n == 16
    with pytest.raises(UsageError):
        field_from_bytes(b"XXXX" + blob[4:])
    with pytest.raises(UsageError):
        field_from_bytes(blob[: len(blob) - 8])


def test_apply_multiplier_does_not_mutate_input(rng):
    field = random_field(GRID, rng)
    before = field.coeffs.copy()
    apply_multiplier(field, MultiplierSpec.fractional_laplacian(0.5))
    assert np.array_equal(field.coeffs, before)
