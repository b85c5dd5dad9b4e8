import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import fsolve

from magnomech.errors import InvalidInputError
from magnomech.gaussian import (
    is_hurwitz,
    lyapunov_residual,
    solve_lyapunov,
    solve_lyapunov_by_integration,
    symplectic_eigenvalues,
    two_mode_block,
)
from magnomech.model import (
    TWO_PI,
    DriveParams,
    PhysicalParams,
    baseline_params,
    build_diffusion,
    build_drift,
    compute_entanglement,
    effective_coupling,
    kerr_shift_from_mean_field,
    mean_field_residual,
    rabi_frequency,
    spin_number,
    steady_state_covariance,
    steady_state_mean_field,
    thermal_occupation,
)

# Bose factors evaluated with mpmath at 30 digits
N_B_10MHZ_10MK = 20.3406183390364505946635473132
N_12GHZ_10MK = 9.74053006323674340244624257595e-26


# --- thermal occupation ---------------------------------------------------


@pytest.mark.parametrize("omega", [1.0, TWO_PI * 1e7, TWO_PI * 12e9])
def test_zero_temperature(omega):
    assert thermal_occupation(omega, 0.0) == 0.0


def test_mechanical_occupation_at_10mk():
    assert thermal_occupation(TWO_PI * 10e6, 0.01) == pytest.approx(N_B_10MHZ_10MK, rel=1e-10)


def test_occupation_far_tail_does_not_overflow():
    assert 0.0 <= thermal_occupation(TWO_PI * 1e12, 1e-3) < 1e-300


def test_microwave_occupation_at_10mk():
    assert thermal_occupation(TWO_PI * 12e9, 0.01) == pytest.approx(N_12GHZ_10MK, rel=1e-9)


@pytest.mark.parametrize("omega", [0.0, -1.0])
def test_occupation_rejects_nonpositive_frequency(omega):
    with pytest.raises(InvalidInputError):
        thermal_occupation(omega, 0.01)


@settings(max_examples=100)
@given(st.floats(1e5, 1e11), st.floats(1e-3, 1.0), st.floats(1.01, 3.0))
def test_occupation_monotone(omega, T, factor):
    assume(omega * factor / T < 5e13)  # keep hbar omega / k_B T well inside double range
    n = thermal_occupation(omega, T)
    assert thermal_occupation(omega, T * factor) > n
    assert thermal_occupation(omega * factor, T) < n


# --- drive bookkeeping ----------------------------------------------------


def test_rabi_zero_field():
    assert rabi_frequency(0.0, 250e-6) == 0.0


def test_spin_number_of_250um_sphere():
    assert spin_number(250e-6) == pytest.approx(3.45247942660128e16, rel=1e-12)


def test_rabi_frequency_value():
    assert rabi_frequency(3.9e-5, 250e-6) / TWO_PI == pytest.approx(1.134261520076316e14, rel=1e-12)


@pytest.mark.parametrize("b0,d", [(-1e-5, 250e-6), (1e-5, 0.0)])
def test_rabi_preconditions(b0, d):
    with pytest.raises(InvalidInputError):
        rabi_frequency(b0, d)


def _state(m1):
    from magnomech.model import MeanFieldState

    return MeanFieldState(0j, m1, 0j, 0.0)


def test_effective_coupling_examples():
    G0 = TWO_PI * 0.3
    assert effective_coupling(_state(0j), G0) == 0.0
    assert effective_coupling(_state(1.13e7 + 0j), G0) / TWO_PI == pytest.approx(4.8e6, rel=0.01)
    one = effective_coupling(_state(3e6 * np.exp(0.4j)), G0)
    assert effective_coupling(_state(6e6 * np.exp(0.4j)), G0) == pytest.approx(2 * one, rel=1e-14)


def test_kerr_shift_helper():
    assert kerr_shift_from_mean_field(2.0, 3.0 * np.exp(1j)) == pytest.approx(36.0)


# --- drift matrix ---------------------------------------------------------


def drift_table(p):
    """Independent entry table of the drift matrix (1-based indices)."""
    c, s = math.cos(p.theta), math.sin(p.theta)
    G = p.G_pa
    return {
        (1, 1): -p.kappa_c + 2 * G * c, (1, 2): p.delta_c + 2 * G * s, (1, 4): p.g_1, (1, 6): p.g_2,
        (2, 1): -p.delta_c + 2 * G * s, (2, 2): -p.kappa_c - 2 * G * c, (2, 3): -p.g_1, (2, 5): -p.g_2,
        (3, 2): p.g_1, (3, 3): -p.kappa_1, (3, 4): p.delta_1 - p.kerr_shift_k, (3, 7): -p.G_mb,
        (4, 1): -p.g_1, (4, 3): -p.delta_1 - p.kerr_shift_k, (4, 4): -p.kappa_1,
        (5, 2): p.g_2, (5, 5): -p.kappa_2, (5, 6): p.delta_2,
        (6, 1): -p.g_2, (6, 5): -p.delta_2, (6, 6): -p.kappa_2,
        (7, 8): p.omega_b,
        (8, 4): p.G_mb, (8, 7): -p.omega_b, (8, 8): -p.gamma_b,
    }


params_strategy = st.builds(
    PhysicalParams,
    omega_b=st.floats(1e6, 1e8),
    delta_c=st.floats(-1e8, 1e8),
    delta_1=st.floats(-1e8, 1e8),
    delta_2=st.floats(-1e8, 1e8),
    kappa_c=st.floats(1e4, 1e7),
    kappa_1=st.floats(1e4, 1e7),
    kappa_2=st.floats(1e4, 1e7),
    gamma_b=st.floats(1.0, 1e4),
    g_1=st.floats(-1e7, 1e7),
    g_2=st.floats(-1e7, 1e7),
    G_mb=st.floats(0.0, 1e7),
    G_pa=st.floats(0.0, 1e7),
    theta=st.floats(0.0, 6.28),
    kerr_shift_k=st.floats(-1e7, 1e7),
    temperature=st.floats(0.0, 1.0),
)


@settings(max_examples=80)
@given(params_strategy)
def test_drift_matches_entry_table(p):
    A = build_drift(p)
    expected = np.zeros((8, 8))
    for (i, j), v in drift_table(p).items():
        expected[i - 1, j - 1] = v
    np.testing.assert_array_equal(A, expected)


@settings(max_examples=80)
@given(params_strategy)
def test_drift_trace(p):
    expected = -2 * p.kappa_c - 2 * p.kappa_1 - 2 * p.kappa_2 - p.gamma_b
    assert np.trace(build_drift(p)) == pytest.approx(expected, rel=1e-12, abs=1e-6)


def test_decoupled_limit_is_block_diagonal(base):
    A = build_drift(base.with_(g_1=0.0, g_2=0.0, G_mb=0.0, G_pa=0.0, kerr_shift_k=0.0))
    mask = np.kron(np.eye(4), np.ones((2, 2)))
    assert np.all(A[mask == 0] == 0)


def test_pa_entries_at_zero_phase(base):
    p = base.with_(theta=0.0)
    A = build_drift(p)
    assert A[0, 0] == -p.kappa_c + 2 * p.G_pa
    assert A[1, 1] == -p.kappa_c - 2 * p.G_pa
    assert A[0, 1] == p.delta_c
    assert A[1, 0] == -p.delta_c


def test_magnomechanical_entries(base):
    A = build_drift(base)
    assert A[2, 6] == pytest.approx(-TWO_PI * 4.8e6, rel=1e-15)
    assert A[7, 3] == pytest.approx(TWO_PI * 4.8e6, rel=1e-15)


def test_theta_is_wrapped(base):
    p = base.with_(theta=2 * math.pi + 0.25)
    assert p.theta == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("field", ["kappa_c", "gamma_b", "omega_b", "omega_m1"])
def test_nonpositive_rates_rejected(base, field):
    with pytest.raises(InvalidInputError):
        base.with_(**{field: 0.0})


def test_negative_temperature_rejected(base):
    with pytest.raises(InvalidInputError):
        base.with_(temperature=-0.001)


# --- Routh-Hurwitz oracle -------------------------------------------------


def charpoly(A):
    """Faddeev-LeVerrier coefficients of det(sI - A), highest power first."""
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * eye
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


def routh_stable(coeffs):
    """Routh array test: True iff all roots lie in the open left half plane."""
    n = len(coeffs) - 1
    rows = [list(coeffs[0::2]), list(coeffs[1::2])]
    width = len(rows[0])
    rows = [r + [0.0] * (width - len(r)) for r in rows]
    for _ in range(n - 1):
        a, b = rows[-2], rows[-1]
        if b[0] == 0:
            return False
        new = [(b[0] * a[i + 1] - a[0] * b[i + 1]) / b[0] for i in range(width - 1)] + [0.0]
        rows.append(new)
    first = [r[0] for r in rows[: n + 1]]
    return all(x > 0 for x in first)


def test_routh_oracle_on_known_cases():
    assert routh_stable(charpoly(-np.eye(3)))
    assert not routh_stable(charpoly(np.diag([-1.0, 0.5])))
    assert not routh_stable(charpoly(np.array([[0.0, 1.0], [-1.0, 0.0]])))


def test_baseline_pi_half_resonant_is_hurwitz(base, wb):
    p = base.with_(theta=math.pi / 2, delta_c=wb, delta_2=wb)
    A = build_drift(p) / p.omega_b
    assert is_hurwitz(A).is_hurwitz
    assert routh_stable(charpoly(A))


def test_large_pa_gain_at_zero_phase_is_unstable(base):
    # decoupled cavity eigenvalue -kappa_c + 2G > 0 dominates
    p = base.with_(G_pa=TWO_PI * 10e6, theta=0.0)
    A = build_drift(p) / p.omega_b
    assert not is_hurwitz(A).is_hurwitz
    assert not routh_stable(charpoly(A))


# --- diffusion matrix -----------------------------------------------------


def test_diffusion_zero_temperature(base):
    p = base.with_(temperature=0.0)
    D = build_diffusion(p)
    expected = [p.kappa_c] * 2 + [p.kappa_1] * 2 + [p.kappa_2] * 2 + [0.0, p.gamma_b]
    np.testing.assert_array_equal(D, np.diag(expected))


def test_mechanical_noise_at_10mk(base):
    D = build_diffusion(base)
    assert D[7, 7] / TWO_PI == pytest.approx(100 * (2 * N_B_10MHZ_10MK + 1), rel=1e-10)
    assert D[7, 7] / TWO_PI == pytest.approx(4168.12, rel=1e-5)
    assert D[6, 6] == 0.0


@settings(max_examples=50)
@given(params_strategy)
def test_diffusion_structure(p):
    D = build_diffusion(p)
    assert np.count_nonzero(D - np.diag(np.diag(D))) == 0
    d = np.diag(D)
    assert d[0] == d[1] and d[2] == d[3] and d[4] == d[5] and d[6] == 0.0
    assert d[0] == pytest.approx(p.kappa_c * (2 * thermal_occupation(p.omega_c, p.temperature) + 1))
    assert d[7] == pytest.approx(p.gamma_b * (2 * thermal_occupation(p.omega_b, p.temperature) + 1))


# --- covariance and entanglement -----------------------------------------


def test_baseline_covariance_against_integration(base, wb):
    p = base.with_(theta=math.pi / 2)
    A, D = build_drift(p) / wb, build_diffusion(p) / wb
    V = solve_lyapunov(A, D)
    assert lyapunov_residual(A, V, D) < 1e-10
    assert symplectic_eigenvalues(V).min() >= 0.5 - 1e-9
    Vi = solve_lyapunov_by_integration(A, D, tol=1e-12)
    assert np.linalg.norm(V - Vi) / np.linalg.norm(V) < 1e-6


def test_baseline_magnon_correlations_nonzero(base):
    V = steady_state_covariance(base)
    assert np.abs(two_mode_block(V, 1, 2).V12).max() > 1e-3


def test_decoupled_magnon2_is_thermal_and_separable(base):
    p = base.with_(g_2=0.0, theta=math.pi / 2)
    r = compute_entanglement(p)
    assert r.stable
    assert r.E_N == pytest.approx(0.0, abs=1e-9)
    n2 = thermal_occupation(p.omega_m2, p.temperature)
    V = steady_state_covariance(p)
    np.testing.assert_allclose(V[4:6, 4:6], (2 * n2 + 1) / 2 * np.eye(2), atol=1e-9)


def test_magnon1_still_sees_mechanics_when_g_is_zero(base):
    V = steady_state_covariance(base.with_(g_1=0.0, g_2=0.0))
    assert np.abs(V[2:4, 6:8]).max() > 1e-3


def test_fully_decoupled_magnons(base):
    # g_1 = g_2 = 0 alone leaves magnon 1 on the mechanics through G_mb
    p = base.with_(g_1=0.0, g_2=0.0, G_mb=0.0)
    V = steady_state_covariance(p)
    for mode, omega in ((1, p.omega_m1), (2, p.omega_m2)):
        sl = slice(2 * mode, 2 * mode + 2)
        n = thermal_occupation(omega, p.temperature)
        np.testing.assert_allclose(V[sl, sl], (2 * n + 1) / 2 * np.eye(2), atol=1e-9)
        others = np.delete(np.arange(8), [2 * mode, 2 * mode + 1])
        np.testing.assert_allclose(V[sl][:, others], 0.0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0, 6.28), st.floats(0, 0.1))
def test_zero_temperature_floor(dc, d1, d2, theta, G):
    wb = TWO_PI * 10e6
    p = baseline_params(
        delta_c=dc * wb, delta_1=d1 * wb, delta_2=d2 * wb, theta=theta, G_pa=G * wb, temperature=0.0
    )
    if not is_hurwitz(build_drift(p)).is_hurwitz:
        return
    assert symplectic_eigenvalues(steady_state_covariance(p)).min() >= 0.5 - 1e-9


def test_unstable_point_is_a_result(base):
    r = compute_entanglement(base.with_(G_pa=TWO_PI * 10e6, theta=0.0))
    assert r.stable is False
    assert r.E_N is None and r.nu_minus is None
    assert r.max_real_part > 0


def test_pi_half_point_value(base, wb):
    # argmax of the theta = pi/2 map at Delta_1 = 0.8 omega_b
    r = compute_entanglement(base.with_(theta=math.pi / 2, delta_1=0.8 * wb, delta_c=-0.44 * wb, delta_2=-0.56 * wb))
    assert r.stable
    assert r.E_N == pytest.approx(0.23, abs=0.05)


def test_no_pa_resonant_value(base, wb):
    r = compute_entanglement(base.with_(G_pa=0.0, delta_1=0.8 * wb, delta_c=-0.84 * wb, delta_2=-0.88 * wb))
    assert r.E_N == pytest.approx(0.17, abs=0.05)


# --- mean field -----------------------------------------------------------


def drive_for(**kw):
    d = dict(rabi_omega=rabi_frequency(3.9e-5, 250e-6), drive_field_b0=3.9e-5, single_magnon_g0=TWO_PI * 0.3)
    d.update(kw)
    return DriveParams(**d)


def test_undriven_mean_field(base):
    s = steady_state_mean_field(base, DriveParams())
    assert (s.amp_c, s.amp_m1, s.amp_m2, s.pos_q) == (0j, 0j, 0j, 0.0)


def test_linear_mean_field_matches_complex_solve(base):
    p = base.with_(G_pa=0.0)
    rabi = TWO_PI * 1e13
    s = steady_state_mean_field(p, DriveParams(rabi_omega=rabi))
    M = np.array(
        [
            [1j * p.delta_c + p.kappa_c, 1j * p.g_1, 1j * p.g_2],
            [1j * p.g_1, 1j * p.delta_1 + p.kappa_1, 0],
            [1j * p.g_2, 0, 1j * p.delta_2 + p.kappa_2],
        ]
    )
    expected = np.linalg.solve(M, [0, rabi, 0])
    np.testing.assert_allclose([s.amp_c, s.amp_m1, s.amp_m2], expected, rtol=1e-12)
    assert s.pos_q == 0.0


def _real_residual(p, drive, x):
    c, m1, m2 = x[0] + 1j * x[3], x[1] + 1j * x[4], x[2] + 1j * x[5]
    G0, K = drive.single_magnon_g0, drive.kerr_K
    q = -G0 * abs(m1) ** 2 / p.omega_b
    G2 = 2 * p.G_pa * np.exp(1j * p.theta)
    e = [
        -(1j * p.delta_c + p.kappa_c) * c - 1j * (p.g_1 * m1 + p.g_2 * m2) + G2 * np.conj(c),
        -(1j * p.delta_1 + p.kappa_1) * m1 - 1j * p.g_1 * c - 1j * G0 * m1 * q + drive.rabi_omega
        - 2j * K * abs(m1) ** 2 * m1,
        -(1j * p.delta_2 + p.kappa_2) * m2 - 1j * p.g_2 * c,
    ]
    scale = drive.rabi_omega
    return [v.real / scale for v in e] + [v.imag / scale for v in e]


def continuation_oracle(p, drive, steps=100):
    """Ramp the drive from zero, solving each step with fsolve."""
    x = np.zeros(6)
    for k in range(1, steps + 1):
        d = DriveParams(
            rabi_omega=drive.rabi_omega * k / steps,
            single_magnon_g0=drive.single_magnon_g0,
            kerr_K=drive.kerr_K,
        )
        x = fsolve(lambda y: _real_residual(p, d, y), x, xtol=1e-12)
    return x[:3] + 1j * x[3:]


@pytest.mark.parametrize("kerr_hz", [0.0, 1e-9, 1e-8])
def test_kerr_mean_field_matches_continuation(base, kerr_hz):
    drive = drive_for(kerr_K=TWO_PI * kerr_hz)
    s = steady_state_mean_field(base, drive)
    assert s.residual < 1e-9
    assert mean_field_residual(base, drive, s) < 1e-9
    ref = continuation_oracle(base, drive)
    np.testing.assert_allclose([s.amp_c, s.amp_m1, s.amp_m2], ref, rtol=1e-7)


def test_mean_field_position(base):
    drive = drive_for()
    s = steady_state_mean_field(base, drive)
    assert s.pos_q == pytest.approx(-drive.single_magnon_g0 * abs(s.amp_m1) ** 2 / base.omega_b, rel=1e-14)


def test_bistable_branches_reported(base, wb):
    # red-detuned Kerr drive with the shift pushing through resonance
    p = base.with_(G_pa=0.0, g_1=0.0, g_2=0.0, delta_1=-3 * base.kappa_1)
    # window for three roots is 3.8 < Omega/kappa_1 < 5.0 here
    drive = DriveParams(rabi_omega=TWO_PI * 4.5e6, kerr_K=TWO_PI * 1e5)
    s = steady_state_mean_field(p, drive)
    assert s.multistable
    assert len(s.branches) == 3
    # continuation from zero drive stays on the low branch
    assert abs(s.amp_m1) ** 2 == pytest.approx(min(s.branches), rel=1e-6)
    assert s.residual < 1e-9


def test_drive_chain_reproduces_effective_coupling(wb):
    rabi = rabi_frequency(3.9e-5, 250e-6)
    m1 = rabi / wb  # |<m1>| ~ Omega / |Delta_1| with |Delta_1| = omega_b
    g_mb = effective_coupling(_state(complex(m1)), TWO_PI * 0.3)
    assert g_mb / TWO_PI == pytest.approx(4.812264e6, rel=1e-6)
