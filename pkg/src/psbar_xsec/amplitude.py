"""Transition amplitude for ion formation by positronium impact.

The prior-form amplitude is a nine-dimensional integral over the
electron, the positronium positron, and the atom positron.  The atom
positron only appears through exponential orbitals and screened-Coulomb
kernels, so its three dimensions integrate in closed form: the
symmetrized ion orbital times the atom orbital yields plain overlap
factors for the two coordinates that survive, and Yukawa kernels
convolved against exponentials reduce to :func:`yukawa_exp_convolution`.
What remains is a six-dimensional integral evaluated by randomized
quasi-Monte Carlo with exponential importance densities matched to the
bound-state decay scales.

A plain Monte Carlo estimator of the full nine-dimensional integral,
with every perturbation term evaluated pointwise, is kept as
:func:`amplitude_oracle_9d` to validate the reduction end to end.

Geometry: the ejected-electron momentum defines the polar axis; the
incident momentum lies in the x-z plane at the ejection angle.  All
evaluations are pure functions of (inputs, seed): results are identical
for any worker count and any scheduling order.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaincinv
from scipy.stats import qmc

from .specfun import (
    EPS_GEOM,
    DistortionParams,
    _coulomb_distortion_many,
)
from .states import (
    ChandrasekharParams,
    Kinematics,
    PsState,
    ScreeningConfig,
    _hbar_radial,
    _ps_wavefunction_many,
    hplus_wavefunction,
)

__all__ = [
    "IntegrandPoint",
    "IntegrationSpec",
    "AmplitudeValue",
    "AccuracyNotReachedError",
    "REPLICATES",
    "yukawa_exp_convolution",
    "inner_r3_reduction",
    "reduced_integrand",
    "amplitude",
    "amplitude_oracle_9d",
    "beam_vectors",
]

REPLICATES = 8
_ORACLE_CHUNK = 1 << 18
_U_EPS = 2.0**-53


class AccuracyNotReachedError(RuntimeError):
    """Relative statistical error above target at the full sample budget."""


@dataclass(frozen=True)
class IntegrandPoint:
    """One configuration: electron r1, Ps positron r2, atom positron r3.

    r3 is only consulted by the nine-dimensional oracle path.
    """

    r1: np.ndarray
    r2: np.ndarray
    r3: Optional[np.ndarray] = None


@dataclass(frozen=True)
class IntegrationSpec:
    """Monte Carlo budget and reproducibility knobs.

    ``target_rel_err`` is opt-in: when set, estimates whose relative
    statistical error exceeds it raise
    :class:`AccuracyNotReachedError` (angles where the amplitude is
    compatible with zero would otherwise abort whole sweeps).
    """

    method: str = "quasi-mc"
    samples: int = 1_000_000
    seed: int = 1
    target_rel_err: Optional[float] = None

    def __post_init__(self):
        if self.method not in ("quasi-mc", "plain-mc-oracle"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.samples < 1000:
            raise ValueError(f"need at least 1000 samples, got {self.samples}")
        if self.target_rel_err is not None and not 0.0 < self.target_rel_err < 1.0:
            raise ValueError(
                f"target_rel_err must lie in (0, 1), got {self.target_rel_err}"
            )


@dataclass(frozen=True)
class AmplitudeValue:
    """Complex amplitude with a 1-sigma statistical error (a.u.)."""

    t: complex
    std_err: float

    def __post_init__(self):
        if not (math.isfinite(self.std_err) and self.std_err >= 0.0):
            raise ValueError(f"invalid std_err {self.std_err}")


# ---------------------------------------------------------------------------
# closed-form pieces of the atom-positron integral
# ---------------------------------------------------------------------------


def yukawa_exp_convolution(c: float, mu: float, x):
    """J(c, mu, x) = int e^{-c r'} e^{-mu |x - r'|} / |x - r'| d3r'.

    Closed form via Fourier convolution:

        J = 8 pi c (e^{-mu x} - e^{-c x}) / ((c^2 - mu^2)^2 x)
            - 4 pi e^{-c x} / (c^2 - mu^2),

    evaluated through expm1 for the difference and switched to the Taylor
    expansion in (c - mu) x when that product is small, which keeps the
    removable singularities at x -> 0 and c -> mu to full precision.
    """
    if not c > 0.0:
        raise ValueError(f"decay constant must be positive, got {c}")
    if mu < 0.0:
        raise ValueError(f"screening parameter must be >= 0, got {mu}")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if np.any(x_arr < 0.0):
        raise ValueError("distance must be >= 0")

    s = c + mu
    d = c - mu
    u = d * x_arr
    out = np.empty_like(x_arr)

    small = np.abs(u) < 0.5
    if np.any(small):
        xs = x_arr[small]
        us = u[small]
        # sum_k (-u)^k [ s x (k+1)/(k+2)! + 1/(k+1)! ]
        total = np.zeros_like(xs)
        fact = 1.0  # (k+1)! running value
        powu = np.ones_like(xs)
        for k in range(18):
            fact *= k + 1
            total += powu * (s * xs * (k + 1) / (fact * (k + 2)) + 1.0 / fact)
            powu *= -us
        out[small] = 4.0 * math.pi * np.exp(-mu * xs) / (s * s) * total
    big = ~small
    if np.any(big):
        xb = x_arr[big]
        diff = -np.expm1(-d * xb) * np.exp(-mu * xb)  # e^{-mu x} - e^{-c x}
        out[big] = (
            8.0 * math.pi * c * diff / ((s * d) ** 2 * xb)
            - 4.0 * math.pi * np.exp(-c * xb) / (s * d)
        )
    return float(out[0]) if scalar else out


def _overlap_ion_atom(r2, chand: ChandrasekharParams):
    """int Phi_ion(r2, r3) phi_atom(r3) d3r3 as a function of r2."""
    a, b = chand.alpha, chand.beta
    return (2.0 * chand.norm / math.sqrt(math.pi)) * (
        np.exp(-a * r2) / (b + 1.0) ** 3 + np.exp(-b * r2) / (a + 1.0) ** 3
    )


def _inner_r3_many(r1, r2, mu: float, chand: ChandrasekharParams):
    """Atom-positron integral of the perturbation, vectorized over radii.

    r1 and r2 must be positive arrays (callers mask zeros beforehand).
    """
    a, b = chand.alpha, chand.beta
    kf = chand.norm / (4.0 * math.pi * math.sqrt(math.pi))
    ea = np.exp(-a * r2)
    eb = np.exp(-b * r2)
    yuk_r1 = ea * yukawa_exp_convolution(b + 1.0, mu, r1) + eb * yukawa_exp_convolution(
        a + 1.0, mu, r1
    )
    yuk_r2 = ea * yukawa_exp_convolution(b + 1.0, mu, r2) + eb * yukawa_exp_convolution(
        a + 1.0, mu, r2
    )
    direct = _overlap_ion_atom(r2, chand) * (
        np.exp(-mu * r1) / r1 - np.exp(-mu * r2) / r2
    )
    return direct - kf * yuk_r1 + kf * yuk_r2


def inner_r3_reduction(
    r1,
    r2,
    screen: ScreeningConfig = ScreeningConfig(0.0),
    chand: ChandrasekharParams = ChandrasekharParams(),
) -> complex:
    """Exact atom-positron integral for one (r1, r2) configuration.

    The result is real; it is returned as complex for uniformity with the
    rest of the integrand pipeline.
    """
    r1n = float(np.linalg.norm(np.asarray(r1, dtype=float)))
    r2n = float(np.linalg.norm(np.asarray(r2, dtype=float)))
    if r1n <= 0.0 or r2n <= 0.0:
        raise ValueError("coincident-with-origin configurations are singular")
    val = _inner_r3_many(np.array([r1n]), np.array([r2n]), screen.mu, chand)[0]
    return complex(val)


# ---------------------------------------------------------------------------
# geometry and the reduced six-dimensional integrand
# ---------------------------------------------------------------------------


def beam_vectors(kin: Kinematics) -> Tuple[np.ndarray, np.ndarray]:
    """(ejected momentum along +z, incident momentum in the x-z plane)."""
    k1_vec = np.array([0.0, 0.0, kin.k1])
    ki_vec = kin.k_i * np.array(
        [math.sin(kin.theta_e), 0.0, math.cos(kin.theta_e)]
    )
    return k1_vec, ki_vec


def _integrand_6d(
    r1v: np.ndarray,
    r2v: np.ndarray,
    kin: Kinematics,
    screen: ScreeningConfig,
    state: PsState,
    conj_convention: bool,
    distortion: DistortionParams,
    k1_vec: np.ndarray,
    ki_vec: np.ndarray,
    chand: ChandrasekharParams,
) -> np.ndarray:
    """Reduced integrand on (N, 3) electron / Ps-positron coordinates."""
    r1 = np.sqrt(np.einsum("ij,ij->i", r1v, r1v))
    r2 = np.sqrt(np.einsum("ij,ij->i", r2v, r2v))
    rhov = r1v - r2v
    rho = np.sqrt(np.einsum("ij,ij->i", rhov, rhov))

    k1n = float(np.linalg.norm(k1_vec))
    khat = k1_vec / k1n if k1n > 0.0 else np.array([0.0, 0.0, 1.0])
    b1 = r1 + r1v @ khat
    b2 = rho + rhov @ khat
    valid = (b1 > EPS_GEOM) & (b2 > EPS_GEOM) & (r1 > 0.0) & (r2 > 0.0)

    r1s = np.where(valid, r1, 1.0)
    r2s = np.where(valid, r2, 1.0)
    b1s = np.where(valid, b1, 1.0)
    b2s = np.where(valid, b2, 1.0)

    dist = _coulomb_distortion_many(distortion, r1v, k1_vec, conjugated=True)
    eik = np.exp(-1j * distortion.eta1 * (np.log(b1s) - np.log(b2s)))
    rr = 0.5 * (r1v + r2v)
    plane = np.exp(1j * (rr @ ki_vec - r1v @ k1_vec))
    inner = _inner_r3_many(r1s, r2s, screen.mu, chand)
    ps = _ps_wavefunction_many(state, rhov)

    vals = dist * eik * plane * inner * ps
    vals[~valid] = 0.0
    if not conj_convention:
        vals = np.conj(vals)
    return vals


def reduced_integrand(
    point: IntegrandPoint,
    kin: Kinematics,
    screen: ScreeningConfig,
    state: PsState,
    conj_convention: bool = True,
    distortion: Optional[DistortionParams] = None,
    chand: ChandrasekharParams = ChandrasekharParams(),
) -> complex:
    """Value of the reduced (atom-positron already integrated) integrand.

    ``conj_convention=True`` evaluates the amplitude integrand with the
    final-state distortion conjugated into the bra; ``False`` conjugates
    the whole integrand instead, which flips only the phase of the
    resulting amplitude.  ``distortion`` may override the couplings (zero
    couplings give the plane-wave Born integrand).
    """
    if distortion is None:
        distortion = DistortionParams.for_momentum(kin.k1)
    k1_vec, ki_vec = beam_vectors(kin)
    r1v = np.asarray(point.r1, dtype=float).reshape(1, 3)
    r2v = np.asarray(point.r2, dtype=float).reshape(1, 3)
    return complex(
        _integrand_6d(
            r1v, r2v, kin, screen, state, conj_convention, distortion,
            k1_vec, ki_vec, chand,
        )[0]
    )


# ---------------------------------------------------------------------------
# importance sampling maps
# ---------------------------------------------------------------------------


def _radii_from_uniform(u: np.ndarray, rate: float) -> np.ndarray:
    """Inverse-CDF map: gamma(shape 3) radius for a 3D density ~ e^{-rate r}."""
    return gammaincinv(3.0, u) / rate


def _isotropic(r: np.ndarray, u_ct: np.ndarray, u_phi: np.ndarray) -> np.ndarray:
    ct = 2.0 * u_ct - 1.0
    st = np.sqrt(np.maximum(0.0, 1.0 - ct * ct))
    phi = 2.0 * math.pi * u_phi
    vec = np.empty((r.shape[0], 3))
    vec[:, 0] = r * st * np.cos(phi)
    vec[:, 1] = r * st * np.sin(phi)
    vec[:, 2] = r * ct
    return vec


def _vectors_from_uniform(u3: np.ndarray, rate: float):
    """Map (N, 3) uniforms to sampled vectors and their 3D density values."""
    r = _radii_from_uniform(u3[:, 0], rate)
    vec = _isotropic(r, u3[:, 1], u3[:, 2])
    dens = rate**3 / (8.0 * math.pi) * np.exp(-rate * r)
    return vec, dens


def _vectors_from_uniform_mix(u3: np.ndarray, rates, weights):
    """Mixture of exponential-tail proposals, one component per decay rate.

    The radius uniform picks the component (a stratified split of [0,1])
    and is rescaled within it; the returned density is the full mixture,
    so the weights 1/p stay bounded for any integrand term decaying at
    least as fast as the slowest rate.
    """
    u0 = u3[:, 0]
    r = np.empty_like(u0)
    lo = 0.0
    for rate, w in zip(rates, weights):
        sel = (u0 >= lo) & (u0 < lo + w)
        if np.any(sel):
            r[sel] = _radii_from_uniform((u0[sel] - lo) / w, rate)
        lo += w
    vec = _isotropic(r, u3[:, 1], u3[:, 2])
    dens = np.zeros_like(r)
    for rate, w in zip(rates, weights):
        dens += w * rate**3 / (8.0 * math.pi) * np.exp(-rate * r)
    return vec, dens


def _rho_rate(state: PsState) -> float:
    # matches the e^{-rho/(2n)} tail of the Ps orbital (Bohr radius 2)
    return 1.0 / (2.0 * state.n)


def _r2_mixture(chand: ChandrasekharParams):
    # both ion-orbital decay scales; the slow one keeps the weights bounded
    return (chand.alpha, chand.beta), (0.5, 0.5)


def _task_seed(
    master: int,
    state: PsState,
    kin: Kinematics,
    tag: str,
    replicate: int,
) -> np.random.SeedSequence:
    """Deterministic per-task seed, independent of scheduling order.

    The screening parameter is deliberately not part of the key: runs at
    different mu share random numbers, so screened-minus-unscreened
    differences are common-random-number estimates.
    """
    e_bits = int(np.float64(kin.E_i).view(np.uint64))
    t_bits = int(np.float64(kin.theta_e).view(np.uint64))
    key = (
        state.n,
        state.l,
        state.m & 0xFFFFFFFF,
        e_bits >> 32,
        e_bits & 0xFFFFFFFF,
        t_bits >> 32,
        t_bits & 0xFFFFFFFF,
        zlib.crc32(tag.encode("ascii")),
        replicate,
    )
    return np.random.SeedSequence(entropy=master, spawn_key=key)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def _check_accuracy(t: complex, std_err: float, spec: IntegrationSpec) -> None:
    if spec.target_rel_err is None:
        return
    if abs(t) == 0.0 or std_err / abs(t) > spec.target_rel_err:
        raise AccuracyNotReachedError(
            f"relative error {std_err / abs(t) if abs(t) else math.inf:.3g} "
            f"above target {spec.target_rel_err} at {spec.samples} samples"
        )



def amplitude(
    kin: Kinematics,
    state: PsState,
    screen: ScreeningConfig,
    spec: IntegrationSpec,
    conj_convention: bool = True,
    chand: ChandrasekharParams = ChandrasekharParams(),
) -> AmplitudeValue:
    """Randomized-QMC estimate of the prior-form transition amplitude.

    The six-dimensional reduced integral is sampled with independently
    scrambled Sobol replicates (REPLICATES of them); the replicate spread
    gives an unbiased standard error.  Fixed (spec, kinematics) give a
    bit-identical result regardless of worker count.
    """
    if spec.method != "quasi-mc":
        raise ValueError("amplitude requires method='quasi-mc'")
    distortion = DistortionParams.for_momentum(kin.k1)
    k1_vec, ki_vec = beam_vectors(kin)
    rates2, w2mix = _r2_mixture(chand)
    rate_rho = _rho_rate(state)
    m = max(7, round(math.log2(max(1.0, spec.samples / REPLICATES))))

    estimates = np.empty(REPLICATES, dtype=np.complex128)
    for rep in range(REPLICATES):
        ss = _task_seed(spec.seed, state, kin, "qmc6d", rep)
        sob = qmc.Sobol(d=6, scramble=True, seed=np.random.default_rng(ss))
        u = np.clip(sob.random_base2(m), _U_EPS, 1.0 - _U_EPS)
        r2v, p2 = _vectors_from_uniform_mix(u[:, 0:3], rates2, w2mix)
        rhov, pr = _vectors_from_uniform(u[:, 3:6], rate_rho)
        r1v = r2v + rhov
        vals = _integrand_6d(
            r1v, r2v, kin, screen, state, conj_convention, distortion,
            k1_vec, ki_vec, chand,
        )
        estimates[rep] = np.mean(vals / (p2 * pr))

    pref = -kin.mu_f / (2.0 * math.pi)
    estimates *= pref
    t = complex(np.mean(estimates))
    se_re = float(np.std(estimates.real, ddof=1) / math.sqrt(REPLICATES))
    se_im = float(np.std(estimates.imag, ddof=1) / math.sqrt(REPLICATES))
    std_err = math.hypot(se_re, se_im)
    _check_accuracy(t, std_err, spec)
    return AmplitudeValue(t=t, std_err=std_err)


def amplitude_oracle_9d(
    kin: Kinematics,
    state: PsState,
    screen: ScreeningConfig,
    spec: IntegrationSpec,
    conj_convention: bool = True,
    chand: ChandrasekharParams = ChandrasekharParams(),
    vi_signs: Sequence[float] = (1.0, -1.0, -1.0, 1.0),
) -> AmplitudeValue:
    """Plain Monte Carlo estimate of the full nine-dimensional integral.

    Samples all three light-particle coordinates from exponential
    proposals and evaluates the symmetrized ion orbital, the atom
    orbital, and all four perturbation terms pointwise.  Exists to
    validate the analytic atom-positron reduction; ``vi_signs`` lets
    tests flip or drop individual perturbation terms.
    """
    if spec.method != "plain-mc-oracle":
        raise ValueError("amplitude_oracle_9d requires method='plain-mc-oracle'")
    distortion = DistortionParams.for_momentum(kin.k1)
    k1_vec, ki_vec = beam_vectors(kin)
    khat = k1_vec / kin.k1
    mu = screen.mu
    rates2, w2mix = _r2_mixture(chand)
    rate_rho = _rho_rate(state)
    rate3 = 1.0 + chand.beta
    s1, s2, s3, s4 = (float(s) for s in vi_signs)

    rng = np.random.default_rng(_task_seed(spec.seed, state, kin, "mc9d", 0))
    n_total = 0
    acc = 0.0 + 0.0j
    acc_re2 = 0.0
    acc_im2 = 0.0
    remaining = int(spec.samples)
    while remaining > 0:
        n = min(_ORACLE_CHUNK, remaining)
        remaining -= n
        u = np.clip(rng.random((n, 9)), _U_EPS, 1.0 - _U_EPS)
        r2v, p2 = _vectors_from_uniform_mix(u[:, 0:3], rates2, w2mix)
        rhov, pr = _vectors_from_uniform(u[:, 3:6], rate_rho)
        r3v, p3 = _vectors_from_uniform(u[:, 6:9], rate3)
        r1v = r2v + rhov

        r1 = np.sqrt(np.einsum("ij,ij->i", r1v, r1v))
        r2 = np.sqrt(np.einsum("ij,ij->i", r2v, r2v))
        r3 = np.sqrt(np.einsum("ij,ij->i", r3v, r3v))
        rho = np.sqrt(np.einsum("ij,ij->i", rhov, rhov))
        d13 = r1v - r3v
        d23 = r2v - r3v
        r13 = np.sqrt(np.einsum("ij,ij->i", d13, d13))
        r23 = np.sqrt(np.einsum("ij,ij->i", d23, d23))

        b1 = r1 + r1v @ khat
        b2 = rho + rhov @ khat
        valid = (
            (b1 > EPS_GEOM)
            & (b2 > EPS_GEOM)
            & (r1 > 0.0)
            & (r2 > 0.0)
            & (r13 > 0.0)
            & (r23 > 0.0)
        )
        r1s = np.where(valid, r1, 1.0)
        r2s = np.where(valid, r2, 1.0)
        r13s = np.where(valid, r13, 1.0)
        r23s = np.where(valid, r23, 1.0)
        b1s = np.where(valid, b1, 1.0)
        b2s = np.where(valid, b2, 1.0)

        vi = (
            s1 * np.exp(-mu * r1s) / r1s
            + s2 * np.exp(-mu * r2s) / r2s
            + s3 * np.exp(-mu * r13s) / r13s
            + s4 * np.exp(-mu * r23s) / r23s
        )
        dist = _coulomb_distortion_many(distortion, r1v, k1_vec, conjugated=True)
        eik = np.exp(-1j * distortion.eta1 * (np.log(b1s) - np.log(b2s)))
        rr = 0.5 * (r1v + r2v)
        plane = np.exp(1j * (rr @ ki_vec - r1v @ k1_vec))
        ion = hplus_wavefunction(chand, r2, r3)
        atom = _hbar_radial(r3)
        ps = _ps_wavefunction_many(state, rhov)

        vals = dist * eik * plane * vi * ion * atom * ps
        vals[~valid] = 0.0
        if not conj_convention:
            vals = np.conj(vals)
        vals = vals / (p2 * pr * p3)

        acc += np.sum(vals)
        acc_re2 += np.sum(vals.real**2)
        acc_im2 += np.sum(vals.imag**2)
        n_total += n

    pref = -kin.mu_f / (2.0 * math.pi)
    mean = acc / n_total
    var_re = max(0.0, acc_re2 / n_total - mean.real**2)
    var_im = max(0.0, acc_im2 / n_total - mean.imag**2)
    t = pref * complex(mean)
    std_err = abs(pref) * math.sqrt((var_re + var_im) / max(1, n_total - 1))
    _check_accuracy(t, std_err, spec)
    return AmplitudeValue(t=t, std_err=std_err)
