import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from psbar_xsec.states import (
    AFFINITY_EV_DEFAULT,
    BelowThresholdError,
    ChandrasekharParams,
    HARTREE_EV,
    PsState,
    ScreeningConfig,
    eps_hplus_default,
    hbar_wavefunction,
    hplus_variational_energy,
    hplus_wavefunction,
    kinematics,
    ps_energy,
    ps_wavefunction,
    threshold_ev,
)
from psbar_xsec.states import _ps_radial, _ps_wavefunction_many

ALL_STATES = [PsState(1, 0), PsState(2, 0), PsState(2, 1), PsState(3, 0)]


# ---------------------------------------------------------------------------
# state labels and validation
# ---------------------------------------------------------------------------


def test_state_labels_round_trip():
    for st in ALL_STATES:
        assert PsState.from_label(st.label) == PsState(st.n, st.l, 0)


def test_invalid_states_rejected():
    with pytest.raises(ValueError):
        PsState(3, 1)
    with pytest.raises(ValueError):
        PsState(4, 0)
    with pytest.raises(ValueError):
        PsState(2, 1, m=2)
    with pytest.raises(ValueError):
        PsState.from_label("3p")


def test_screening_config():
    assert ScreeningConfig(0.0).screening_length == math.inf
    assert ScreeningConfig(0.05).screening_length == pytest.approx(20.0)
    with pytest.raises(ValueError):
        ScreeningConfig(-0.1)


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------


def test_ps_energy_values():
    assert ps_energy(PsState(1, 0)) == pytest.approx(-0.25)
    assert ps_energy(PsState(2, 0)) == pytest.approx(-0.0625)
    assert ps_energy(PsState(3, 0)) == pytest.approx(-1.0 / 36.0)


def test_ps_3s_nearly_degenerate_with_ion_affinity():
    # |eps_ps(3s)| in eV sits within 0.01 eV of the 0.75 eV affinity
    e3 = abs(ps_energy(PsState(3, 0))) * HARTREE_EV
    assert e3 == pytest.approx(0.7559, abs=5e-4)
    assert abs(e3 - AFFINITY_EV_DEFAULT) < 0.01


# ---------------------------------------------------------------------------
# wavefunctions
# ---------------------------------------------------------------------------


def test_ps_1s_at_origin():
    val = ps_wavefunction(PsState(1, 0), [0.0, 0.0, 0.0])
    assert val.real == pytest.approx(1.0 / math.sqrt(8.0 * math.pi), rel=1e-12)
    assert val.imag == 0.0


def test_s_state_isotropy():
    rng = np.random.default_rng(4)
    for st in (PsState(1, 0), PsState(2, 0), PsState(3, 0)):
        r = 1.7
        vals = []
        for _ in range(10):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            vals.append(ps_wavefunction(st, r * d))
        assert max(abs(v - vals[0]) for v in vals) < 1e-14


def _radial_norm(st):
    x, w = leggauss(60)
    total = 0.0
    for a, b in zip([0.0, 2.0, 6.0, 14.0, 30.0, 60.0], [2.0, 6.0, 14.0, 30.0, 60.0, 120.0]):
        r = 0.5 * (b - a) * x + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(w * _ps_radial(st, r) ** 2 * r**2)
    return total


@pytest.mark.parametrize("st", ALL_STATES, ids=lambda s: s.label)
def test_ps_norms(st):
    assert _radial_norm(st) == pytest.approx(1.0, abs=1e-8)


def test_ps_radial_orthogonality():
    x, w = leggauss(60)

    def overlap(s1, s2):
        total = 0.0
        for a, b in zip([0.0, 2.0, 6.0, 14.0, 30.0, 60.0], [2.0, 6.0, 14.0, 30.0, 60.0, 120.0]):
            r = 0.5 * (b - a) * x + 0.5 * (a + b)
            total += 0.5 * (b - a) * np.sum(
                w * _ps_radial(s1, r) * _ps_radial(s2, r) * r**2
            )
        return total

    assert abs(overlap(PsState(1, 0), PsState(2, 0))) < 1e-6
    assert abs(overlap(PsState(1, 0), PsState(3, 0))) < 1e-6
    assert abs(overlap(PsState(2, 0), PsState(3, 0))) < 1e-6


def test_s_p_orthogonality_full_3d():
    # angular grid x radial panels; Y00 x Y1m integrates to zero
    xg, wg = leggauss(40)
    ct = xg  # cos(theta) nodes
    phis = np.linspace(0.0, 2.0 * math.pi, 24, endpoint=False)
    total = 0.0 + 0.0j
    for a, b in zip([0.0, 4.0, 12.0], [4.0, 12.0, 60.0]):
        r = 0.5 * (b - a) * xg + 0.5 * (a + b)
        wr = 0.5 * (b - a) * wg
        for ri, wi in zip(r, wr):
            for c, wc in zip(ct, wg):
                s = math.sqrt(1.0 - c * c)
                for phi in phis:
                    vec = np.array([ri * s * math.cos(phi), ri * s * math.sin(phi), ri * c])
                    v1 = ps_wavefunction(PsState(1, 0), vec)
                    v2 = ps_wavefunction(PsState(2, 1, 0), vec)
                    total += wi * wc * (2.0 * math.pi / len(phis)) * ri * ri * np.conj(v1) * v2
    assert abs(total) < 1e-6


def test_2p_m_states_differ_only_in_angle():
    st0 = PsState(2, 1, 0)
    stp = PsState(2, 1, 1)
    stm = PsState(2, 1, -1)
    vec = np.array([[0.7, -0.4, 1.1]])
    vp = _ps_wavefunction_many(stp, vec)[0]
    vm = _ps_wavefunction_many(stm, vec)[0]
    # Y_{1,-1} = -conj(Y_{1,1})
    assert vm == pytest.approx(-np.conj(vp), rel=1e-12)
    assert _ps_wavefunction_many(st0, vec)[0].imag == 0.0


def test_hbar_wavefunction_values():
    assert hbar_wavefunction([0.0, 0.0, 0.0]) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-13)
    assert hbar_wavefunction([0.0, 0.0, 1.0]) == pytest.approx(
        math.exp(-1.0) / math.sqrt(math.pi), rel=1e-13
    )


def test_hbar_norm():
    # 4 pi int |phi|^2 r^2 dr by quadrature
    x, w = leggauss(80)
    r = 0.5 * 60.0 * (x + 1.0)
    wr = 0.5 * 60.0 * w
    dens = (np.exp(-r) / math.sqrt(math.pi)) ** 2
    assert 4.0 * math.pi * np.sum(wr * dens * r**2) == pytest.approx(1.0, abs=1e-10)


def test_hplus_wavefunction_examples():
    p = ChandrasekharParams()
    assert p.norm == 0.3948 and p.alpha == 1.03925 and p.beta == 0.28309
    v0 = hplus_wavefunction(p, 0.0, 0.0)
    assert v0 == pytest.approx(2.0 * 0.3948 / (4.0 * math.pi), rel=1e-12)
    rng = np.random.default_rng(9)
    for _ in range(20):
        a, b = rng.exponential(2.0, size=2)
        assert hplus_wavefunction(p, a, b) == pytest.approx(
            hplus_wavefunction(p, b, a), rel=1e-14
        )
    with pytest.raises(ValueError):
        hplus_wavefunction(p, -0.5, 1.0)


# ---------------------------------------------------------------------------
# variational energy oracle
# ---------------------------------------------------------------------------


def test_hplus_variational_energy_window():
    e = hplus_variational_energy()
    assert -0.5143 <= e <= -0.5123
    assert e < -0.5  # bound against atom + free positron


def test_hplus_energy_exponent_swap_invariance():
    p = ChandrasekharParams()
    q = ChandrasekharParams(norm=p.norm, alpha=p.beta, beta=p.alpha)
    assert hplus_variational_energy(q) == pytest.approx(
        hplus_variational_energy(p), rel=1e-10
    )


def test_hplus_energy_stationarity():
    p = ChandrasekharParams()
    e0 = hplus_variational_energy(p)
    for dalpha, dbeta in ((1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)):
        q = ChandrasekharParams(
            norm=p.norm, alpha=p.alpha + dalpha, beta=p.beta + dbeta
        )
        assert abs(hplus_variational_energy(q) - e0) < 5e-6


# ---------------------------------------------------------------------------
# kinematics
# ---------------------------------------------------------------------------


def test_kinematics_example_momentum():
    kin = kinematics(10.0, PsState(1, 0))
    assert kin.k_i == pytest.approx(2.0 * math.sqrt(10.0 / HARTREE_EV), rel=1e-12)
    assert kin.mu_i == 2.0 and kin.mu_f == 1.0


def test_thresholds_from_energy_conservation():
    # E_th = |eps_hplus| - |eps_hbar| - |eps_ps| in magnitude:
    # 1s -> 6.05 eV, 2s/2p -> 0.95 eV, 3s -> ~0.006 eV
    assert threshold_ev(PsState(1, 0)) == pytest.approx(6.05, abs=0.01)
    assert threshold_ev(PsState(2, 0)) == pytest.approx(0.95, abs=0.01)
    assert threshold_ev(PsState(2, 1)) == pytest.approx(0.95, abs=0.01)
    assert threshold_ev(PsState(3, 0)) == pytest.approx(0.0, abs=0.05)


def test_below_threshold_raises():
    with pytest.raises(BelowThresholdError):
        kinematics(6.0, PsState(1, 0))
    # 3s channel opens essentially at zero
    kin = kinematics(0.01, PsState(3, 0))
    assert kin.k1 > 0.0


def test_k1_monotone_in_energy():
    st = PsState(1, 0)
    k_prev = 0.0
    for e in np.linspace(6.1, 200.0, 40):
        k1 = kinematics(float(e), st).k1
        assert k1 > k_prev
        k_prev = k1


def test_eps_hplus_override_linear_shift():
    st = PsState(1, 0)
    base = kinematics(10.0, st)
    override = eps_hplus_default() - 0.01  # 0.01 hartree more bound
    kin = kinematics(10.0, st, eps_hplus_override=override)
    e1_base = base.k1**2 / 2.0
    e1_new = kin.k1**2 / 2.0
    assert e1_new - e1_base == pytest.approx(0.01, rel=1e-10)


def test_chandrasekhar_affinity_option():
    # the variational energy corresponds to a 0.362 eV affinity
    e_var = hplus_variational_energy()
    affinity = (-0.5 - e_var) * HARTREE_EV
    assert affinity == pytest.approx(0.362, abs=0.005)
    kin = kinematics(7.0, PsState(1, 0), eps_hplus_override=e_var)
    assert kin.k1 > 0.0
