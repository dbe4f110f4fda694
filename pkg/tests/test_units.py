import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomwalk.errors import DomainError, InvalidParameterError
from atomwalk.units import (ATOMIC_MASS_UNIT, HBAR, PLANCK_H, AtomSpecies, DriveParams,
                            classify_regime, derive_recoil, effective_epsilon, get_species,
                            mean_walk_velocity, step_length, strong_coupling_rabi)

TWO_PI = 2 * math.pi


def test_photon_momentum(scales):
    # h / lambda by hand: 6.62607015e-34 / 578e-9
    assert scales.hbar_k == pytest.approx(1.1464e-27, rel=1e-4)


def test_recoil_frequency_independent_route(yb, scales):
    # hbar k^2/(2M) = pi h / (M lambda^2)
    expected = math.pi * PLANCK_H / (172.938208 * ATOMIC_MASS_UNIT * (578e-9) ** 2)
    assert scales.omega_B == pytest.approx(expected, rel=1e-12)
    assert scales.omega_B / TWO_PI == pytest.approx(3.45e3, rel=2e-3)


def test_derived_fields_consistent(scales):
    assert scales.epsilon_B == pytest.approx(HBAR * scales.omega_B, rel=1e-15)
    assert scales.half_recoil_velocity == pytest.approx(scales.hbar_k / (2 * scales.mass), rel=1e-15)
    assert scales.recoil_length == pytest.approx(578e-9 / TWO_PI, rel=1e-15)


def test_doubling_wavelength_scaling(yb, scales):
    s2 = derive_recoil(AtomSpecies(yb.mass_amu, 2 * yb.wavelength))
    assert s2.hbar_k == pytest.approx(scales.hbar_k / 2, rel=1e-14)
    assert s2.omega_B == pytest.approx(scales.omega_B / 4, rel=1e-14)


@pytest.mark.parametrize("mass, wavelength", [(0.0, 578e-9), (-1.0, 578e-9), (173.0, 0.0), (173.0, -1e-9)])
def test_invalid_species(mass, wavelength):
    with pytest.raises(InvalidParameterError):
        AtomSpecies(mass, wavelength)


def test_unknown_preset():
    with pytest.raises(InvalidParameterError, match="Yb173"):
        get_species("Cs133")


def test_hbar_k_roundtrip_through_omega_B(scales):
    assert math.sqrt(2 * scales.mass * HBAR * scales.omega_B) == pytest.approx(scales.hbar_k, rel=1e-12)


@pytest.mark.parametrize("mhz, quoted_nm", [(0.01, 198.47), (0.1, 19.85), (1.0, 1.98)])
def test_step_length_reported_values(scales, mhz, quoted_nm):
    lam = step_length(scales, DriveParams(TWO_PI * mhz * 1e6))
    assert lam * 1e9 == pytest.approx(quoted_nm, rel=0.01)


def test_step_length_inverse_in_rabi(scales):
    a = step_length(scales, DriveParams(TWO_PI * 1e5))
    b = step_length(scales, DriveParams(TWO_PI * 1e6))
    assert b == pytest.approx(a / 10, rel=1e-14)
    assert a * TWO_PI * 1e5 == pytest.approx(b * TWO_PI * 1e6, rel=1e-12)


def test_step_length_zero_rabi(scales):
    with pytest.raises(ZeroDivisionError, match="Omega = 0"):
        step_length(scales, DriveParams(0.0))


def test_walk_velocity(scales):
    v = mean_walk_velocity(scales)
    assert v * 1e9 == pytest.approx(1.98e6, rel=0.01)
    drive = DriveParams(TWO_PI * 1e6)
    assert v * drive.period == pytest.approx(step_length(scales, drive), rel=1e-12)
    # no Omega anywhere in the formula
    assert mean_walk_velocity(scales) == v


def test_strong_coupling_rabi_examples(scales):
    wB = scales.omega_B
    assert strong_coupling_rabi(scales, 1e-3, 1.0, -wB) / wB == pytest.approx(44.72136, rel=1e-6)
    omega = strong_coupling_rabi(scales, 1e-3, 1.0, 0.0)
    assert omega / wB == pytest.approx(67.08204, rel=1e-6)
    assert omega / TWO_PI == pytest.approx(232e3, rel=3e-3)
    assert strong_coupling_rabi(scales, 4e-3, 1.0, 0.0) == pytest.approx(omega / 2, rel=1e-14)


def test_strong_coupling_rabi_domain(scales):
    with pytest.raises(DomainError):
        strong_coupling_rabi(scales, 1e-3, 0.5, -3 * scales.omega_B)
    with pytest.raises(InvalidParameterError):
        strong_coupling_rabi(scales, 0.0, 1.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(eps=st.floats(1e-5, 1.0), width=st.floats(0.1, 50.0), det=st.floats(-0.5, 5.0),
       bump=st.floats(1.01, 3.0))
def test_strong_coupling_rabi_monotone(scales, eps, width, det, bump):
    wB = scales.omega_B
    base = strong_coupling_rabi(scales, eps, width, det * wB)
    assert strong_coupling_rabi(scales, eps, width * bump, det * wB) > base
    assert strong_coupling_rabi(scales, eps, width, det * wB + bump) > base
    assert strong_coupling_rabi(scales, eps * bump, width, det * wB) < base


def test_classify_strong_fig3(scales):
    r = classify_regime(scales, DriveParams(TWO_PI * 1e6), 1.0, 0.0)
    # 2 (1.5 omega_B / Omega)^2
    assert r.epsilon_effective == pytest.approx(5.37e-5, rel=2e-3)
    assert r.verdict == "Strong"
    # max |delta| at p = 3: omega_B (1 + 6)
    assert r.ratio == pytest.approx(7 * scales.omega_B / (TWO_PI * 1e6), rel=1e-12)


def test_classify_weak_fig2(scales):
    assert classify_regime(scales, DriveParams(TWO_PI * 2e3), 1.0, 0.0).verdict == "Weak"


def test_classify_limits(scales):
    r = classify_regime(scales, DriveParams(1e15), 1.0, 0.0)
    assert r.ratio < 1e-9 and r.verdict == "Strong"
    r0 = classify_regime(scales, DriveParams(0.0), 1.0, 0.0)
    assert r0.ratio == math.inf and r0.verdict == "Weak"
    with pytest.raises(InvalidParameterError):
        classify_regime(scales, DriveParams(1.0), 0.0, 0.0)


@pytest.mark.parametrize("factor, verdict", [(0.5, "Strong"), (1.0, "Strong"), (2.0, "Marginal"),
                                             (9.9, "Marginal"), (10.0, "Weak"), (50.0, "Weak")])
def test_verdict_bands(scales, factor, verdict):
    threshold = 1e-3
    target = factor * threshold
    # invert epsilon = 2 (omega_B * 1.5 / Omega)^2 for Omega
    rabi = 1.5 * scales.omega_B * math.sqrt(2 / target)
    r = classify_regime(scales, DriveParams(rabi), 1.0, 0.0, threshold=threshold)
    assert r.epsilon_effective == pytest.approx(target, rel=1e-12)
    if factor not in (1.0, 10.0):  # exact boundaries are float-sensitive
        assert r.verdict == verdict


def test_drive_unit_conversion(scales):
    d = DriveParams(TWO_PI * 1e6, -scales.omega_B, 0.3)
    r = scales.to_recoil(d)
    assert r.detuning == pytest.approx(-1.0, rel=1e-15)
    assert r.dipole_phase == 0.3
    back = scales.to_si(r)
    assert back.rabi == pytest.approx(d.rabi, rel=1e-15)
    with pytest.raises(InvalidParameterError):
        DriveParams(-1.0)


def test_effective_epsilon_inverts_criterion(scales):
    for eps in np.geomspace(1e-5, 1e-1, 7):
        omega = strong_coupling_rabi(scales, eps, 2.0, 0.3 * scales.omega_B)
        assert effective_epsilon(scales, omega, 2.0, 0.3 * scales.omega_B) == pytest.approx(eps, rel=1e-12)
