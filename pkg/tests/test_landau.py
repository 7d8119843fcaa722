"""Front-fixing change of variables."""

import numpy as np
import pytest

import swellfront as sf
from swellfront.errors import DegenerateDomainError


def test_endpoints_map_exactly():
    rng = np.random.default_rng(5)
    vals = rng.random(17)
    phys = sf.PhysicalProfile(values=vals, s=3.0)
    fixed = sf.to_fixed(phys, a=1.0, m=40)
    assert fixed.values[0] == vals[0]
    assert fixed.values[-1] == vals[-1]
    back = sf.to_physical(fixed, s=3.0, a=1.0, m=16)
    assert back.values[0] == vals[0]
    assert back.values[-1] == vals[-1]


def test_linear_profile_midpoint():
    # u(z) = z on [1, 3]: the fixed profile at y = 0.5 sees z = 2
    z = np.linspace(1.0, 3.0, 41)
    phys = sf.PhysicalProfile(values=z, s=3.0)
    fixed = sf.to_fixed(phys, a=1.0)
    assert fixed.values[20] == pytest.approx(2.0, abs=1e-14)


def test_inverse_map_midpoint():
    # fixed profile y on [0, 1] with a = 0, s = 2: u(1) = 0.5
    y = np.linspace(0.0, 1.0, 41)
    fixed = sf.FixedProfile(values=y)
    phys = sf.to_physical(fixed, s=2.0, a=0.0)
    assert phys.values[20] == pytest.approx(0.5, abs=1e-14)


def test_constant_round_trip_exact():
    fixed = sf.FixedProfile(values=np.full(33, 0.7))
    phys = sf.to_physical(fixed, s=2.0, a=1.0, m=50)
    assert np.all(phys.values == 0.7)
    back = sf.to_fixed(phys, a=1.0, m=32)
    assert np.all(back.values == 0.7)


def test_same_resolution_round_trip_is_identity():
    rng = np.random.default_rng(6)
    vals = rng.random(25)
    phys = sf.PhysicalProfile(values=vals, s=2.5)
    back = sf.to_physical(sf.to_fixed(phys, a=1.0), s=2.5, a=1.0)
    assert np.array_equal(back.values, vals)


def test_round_trip_second_order_decay():
    # resample through an incommensurate intermediate resolution so the
    # interpolation error is visible, then confirm O(1/M^2) decay
    a, s = 1.0, 2.3
    errors = []
    for m in (32, 64, 128, 256):
        z = np.linspace(a, s, m + 1)
        u = np.sin(2.0 * np.pi * (z - a) / (s - a)) + 0.1 * z
        phys = sf.PhysicalProfile(values=u, s=s)
        mid = sf.to_fixed(phys, a=a, m=int(m / np.sqrt(2.0)))
        back = sf.to_physical(mid, s=s, a=a, m=m)
        errors.append(float(np.max(np.abs(back.values - u))))
    for coarse, fine in zip(errors[:-1], errors[1:]):
        assert coarse / fine >= 3.5


def test_bounds_preserved_under_resampling():
    rng = np.random.default_rng(9)
    vals = 0.5 + 0.4 * rng.random(41)
    phys = sf.PhysicalProfile(values=vals, s=2.0)
    fixed = sf.to_fixed(phys, a=1.0, m=97)
    assert fixed.values.min() >= vals.min() - 1e-15
    assert fixed.values.max() <= vals.max() + 1e-15


def test_monotone_profiles_stay_monotone():
    vals = np.sort(np.random.default_rng(10).random(29))
    phys = sf.PhysicalProfile(values=vals, s=2.0)
    fixed = sf.to_fixed(phys, a=1.0, m=57)
    assert np.all(np.diff(fixed.values) >= -1e-15)
    back = sf.to_physical(fixed, s=2.0, a=1.0, m=23)
    assert np.all(np.diff(back.values) >= -1e-15)


def test_degenerate_domain_rejected():
    phys = sf.PhysicalProfile(values=np.zeros(9), s=1.0)
    with pytest.raises(DegenerateDomainError):
        sf.to_fixed(phys, a=1.0)
    with pytest.raises(DegenerateDomainError):
        sf.to_physical(sf.FixedProfile(values=np.zeros(9)), s=0.5, a=1.0)
