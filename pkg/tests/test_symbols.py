import numpy as np
import pytest

from riesz.grid import Field, GridSpec, inverse_transform
from riesz.symbols import (
    BumpProfile,
    Symbol,
    bochner_symbol,
    bump_phi0,
    critical_delta,
    cutoff_pair,
    dist_to_unit_interval,
    mikhlin_check,
    resolvent_symbol,
    scalar_symbol,
    smoothstep,
)


def ev1(symbol, xs):
    return symbol.evaluate((np.asarray(xs, dtype=float),))


def test_smoothstep_endpoints_and_range():
    s = np.linspace(-0.5, 1.5, 201)
    vals = smoothstep(s)
    assert vals.min() >= 0.0 and vals.max() <= 1.0
    assert smoothstep(0.0) == 0.0
    assert smoothstep(1.0) == 1.0


def test_bump_profile_plateau_and_support():
    prof = BumpProfile(1.0, 2.0)
    assert prof(0.3) == 1.0
    assert prof(-1.0) == 1.0
    assert prof(2.0) == 0.0
    assert prof(5.0) == 0.0
    mid = prof(1.5)
    assert 0.0 < mid < 1.0
    with pytest.raises(ValueError):
        BumpProfile(2.0, 1.0)


# -- ball multiplier symbol --------------------------------------------------

def test_bochner_values():
    b = bochner_symbol(1.0)
    assert ev1(b, [0.0])[0] == pytest.approx(1.0)
    assert ev1(b, [0.5])[0] == pytest.approx(0.75)
    b2 = bochner_symbol(0.5)
    assert ev1(b2, [0.0])[0] == pytest.approx(1.0)


def test_bochner_vanishes_outside_ball():
    b = bochner_symbol(0.7)
    vals = ev1(b, [1.0, 1.0001, 1.5, 30.0])
    assert np.all(vals == 0.0)


def test_bochner_rejects_bad_delta():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            bochner_symbol(bad)


def test_bochner_radial_monotone():
    b = bochner_symbol(1.3)
    r = np.linspace(0.0, 1.0, 400)
    vals = ev1(b, r).real
    assert np.all(np.diff(vals) <= 1e-15)


def test_bochner_radial_symmetry_2d():
    b = bochner_symbol(0.8)
    x = np.array([0.3]), np.array([0.4])
    swapped = np.array([0.4]), np.array([0.3])
    reflected = np.array([-0.3]), np.array([0.4])
    v = b.evaluate(x)[0]
    assert b.evaluate(swapped)[0] == pytest.approx(v, rel=1e-14)
    assert b.evaluate(reflected)[0] == pytest.approx(v, rel=1e-14)


# -- resolvent symbol --------------------------------------------------------

def test_resolvent_values():
    r = resolvent_symbol(2.0, 1.0)
    assert ev1(r, [0.0])[0] == pytest.approx(1.0)
    assert ev1(r, [1.0, 2.0, 7.0]) == pytest.approx([0.5, 0.5, 0.5])


def test_resolvent_rejects_pole():
    for z in (0.5, 0.0, 1.0, 0.25 + 1e-13j):
        with pytest.raises(ValueError):
            resolvent_symbol(z, 1.0)


def test_dist_to_unit_interval():
    assert dist_to_unit_interval(2.0) == pytest.approx(1.0)
    assert dist_to_unit_interval(-1.0) == pytest.approx(1.0)
    assert dist_to_unit_interval(1 + 1j) == pytest.approx(1.0)
    assert dist_to_unit_interval(0.5 + 0.25j) == pytest.approx(0.25)


def test_resolvent_sup_bounded_by_distance():
    g = GridSpec(1, 512, 16.0)
    rng = np.random.default_rng(2)
    for _ in range(20):
        z = complex(rng.uniform(-2, 3), rng.uniform(-2, 2))
        if dist_to_unit_interval(z) < 1e-3:
            continue
        sym = resolvent_symbol(z, 1.0)
        sup = np.max(np.abs(sym.sample(g)))
        assert sup <= 1.0 / dist_to_unit_interval(z) + 1e-12


# -- cutoffs -----------------------------------------------------------------

def test_cutoff_pair_levels():
    psi1, psi2 = cutoff_pair(0.25)
    assert ev1(psi1, [0.0])[0] == 1.0
    # partition holds exactly on the unit sphere
    s1 = ev1(psi1, [1.0])[0]
    s2 = ev1(psi2, [1.0])[0]
    assert s1 + s2 == pytest.approx(1.0, abs=0.0)
    assert ev1(psi2, [1.5])[0] == 0.0


def test_cutoff_pair_partition_on_grid_ball():
    psi1, psi2 = cutoff_pair(0.3)
    g = GridSpec(1, 1024, 64.0)
    xi = g.xi_axis()
    total = psi1.sample(g) + psi2.sample(g)
    ball = np.abs(xi) <= 1.0 + 0.3 / 2.0
    assert np.max(np.abs(total[ball] - 1.0)) == 0.0


def test_cutoff_pair_supports():
    r0 = 0.2
    psi1, psi2 = cutoff_pair(r0)
    assert np.all(ev1(psi1, [1 - r0 / 2, 1.0, 2.0]) == 0.0)
    assert np.all(ev1(psi2, [0.0, 1 - r0, 0.5]) == 0.0)
    inside = ev1(psi2, [1.0, 1 + r0 / 2])
    assert np.all(inside.real > 0.0)


def test_cutoff_pair_range_validation():
    for bad in (0.0, 0.5, 0.7, -0.1):
        with pytest.raises(ValueError):
            cutoff_pair(bad)


# -- probe bump --------------------------------------------------------------

def test_bump_support_and_positivity():
    phi = bump_phi0(0.5)
    assert ev1(phi, [0.55, 0.5, 5.0]).max() == 0.0
    assert ev1(phi, [0.0])[0].real > 0.0
    assert ev1(phi, [0.49])[0].real > 0.0


def test_bump_normalization_spatial_value():
    # independent oracle: plain Riemann sum of the bump over a dense lattice
    phi = bump_phi0(1.0)
    dense = np.linspace(-1.0, 1.0, 2**16 + 1)
    riemann = np.trapezoid(ev1(phi, dense).real, dense) / (2.0 * np.pi)
    assert riemann == pytest.approx(1.0, abs=1e-10)
    # the transform path reproduces the same value at x = 0
    g = GridSpec(1, 2560, 160.0)
    spatial = inverse_transform(Field.frequency(g, phi.sample(g)))
    assert abs(spatial.samples[g.size // 2] - 1.0) < 1e-8


def test_bump_normalization_2d():
    phi = bump_phi0(1.0)
    g = GridSpec(2, 512, 160.0)
    spatial = inverse_transform(Field.frequency(g, phi.sample(g)))
    assert abs(spatial.samples[g.size // 2, g.size // 2] - 1.0) < 1e-8


# -- critical exponent -------------------------------------------------------

@pytest.mark.parametrize(
    "p,d,expected",
    [(2.0, 1, 0.0), (2.0, 2, 0.0), (1.0, 2, 0.5), (1.0, 1, 0.0), (4.0, 2, 0.0), (1.0, 3, 1.0)],
)
def test_critical_delta(p, d, expected):
    assert critical_delta(p, d) == pytest.approx(expected)


def test_critical_delta_validation():
    with pytest.raises(ValueError):
        critical_delta(0.5, 1)


# -- symbol algebra ----------------------------------------------------------

def test_support_radius_enforced_exactly():
    raw = Symbol(lambda c: np.ones(np.broadcast(*c).shape, dtype=complex), 1.0, "bounded")
    vals = ev1(raw, [0.5, 1.0, 1.0001, 3.0])
    assert list(vals.real) == [1.0, 1.0, 0.0, 0.0]


def test_sample_cache_returns_readonly():
    g = GridSpec(1, 64, 4.0)
    b = bochner_symbol(1.0)
    first = b.sample(g)
    assert b.sample(g) is first
    with pytest.raises(ValueError):
        first[0] = 5.0


def test_product_and_shift_combinators():
    g = GridSpec(1, 256, 16.0)
    b = bochner_symbol(1.0)
    two = scalar_symbol(2.0)
    prod = two * b
    assert np.max(np.abs(prod.sample(g) - 2.0 * b.sample(g))) < 1e-15
    shift = b.shifted(0.5)
    xi = g.xi_axis()
    direct = np.clip(1.0 - (xi - 0.5) ** 2, 0.0, None)
    assert np.max(np.abs(shift.sample(g) - direct)) < 1e-14
    dil = b.dilated(2.0)
    assert dil.support_radius == pytest.approx(0.5)
    assert ev1(dil, [0.3])[0] == pytest.approx(1.0 - 0.36)


# -- derivative screen -------------------------------------------------------

def test_mikhlin_constant_symbol():
    report = mikhlin_check(scalar_symbol(1.0), 3, refinements=2)
    assert report.sups[-1][0] == pytest.approx(1.0)
    assert all(s == 0.0 for s in report.sups[-1][1:])
    assert not report.any_flagged


def test_mikhlin_resolvent_refinement_stable():
    # smooth away from the sphere: sups settle under refinement at every order
    report = mikhlin_check(resolvent_symbol(2.0, 1.0), 3)
    assert not report.any_flagged
    assert all(np.isfinite(g) and g < 2.0 for g in report.growth)


def test_mikhlin_flags_square_root_ball():
    # (1 - |xi|^2)^(1/2) has an unbounded gradient at the sphere: the k = 1
    # sup keeps growing across the refinement ladder
    report = mikhlin_check(bochner_symbol(0.5), 1)
    assert report.flagged[1]
    sups = [level[1] for level in report.sups]
    assert all(b > a for a, b in zip(sups, sups[1:]))


def test_mikhlin_smooth_ball_power_not_flagged():
    report = mikhlin_check(bochner_symbol(1.0), 1)
    assert not report.any_flagged


def test_mikhlin_rejects_large_order():
    with pytest.raises(ValueError):
        mikhlin_check(scalar_symbol(1.0), 4)
