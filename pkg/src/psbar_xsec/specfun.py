"""Complex special functions for the Coulomb-distorted ejected electron.

The distorted continuum state of the ejected electron combines a complex
gamma normalization, the confluent hypergeometric function 1F1(a; 1; z)
with a on (or one unit off) the imaginary axis and z on the imaginary
axis, and unit-modulus eikonal phase factors.  scipy's hyp1f1 only takes
real parameters, so the hypergeometric evaluation lives here.

Evaluation strategy for 1F1(a; 1; z), calibrated against 40-digit mpmath
reference values:

* plain float64 Taylor series while the partial sums stay small enough
  that cancellation keeps ~8 significant digits (|z| below roughly
  19 - 1.6|a|);
* Taylor series in double-double arithmetic up to the asymptotic
  switchover (partial sums grow like e^|z|, so the 32-digit accumulator
  holds ~1e-12 accuracy through |z| ~ 60);
* the large-|z| asymptotic expansion (two gamma-prefactor terms, each
  series truncated at its smallest term) beyond |z| = max(30, 22+2.6|a|),
  with the smallest retained term as an error estimate; if the estimate
  misses tolerance the double-double series is used as a fallback.

All functions are pure; callers may evaluate from any number of workers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _dd

__all__ = [
    "Cplx",
    "DistortionParams",
    "SpecialFunctionError",
    "GammaPoleError",
    "ConvergenceError",
    "DegenerateGeometryError",
    "cgamma",
    "hyp1f1_b1",
    "coulomb_distortion",
    "eikonal_phase",
    "EPS_GEOM",
]

Cplx = complex

#: integration points with r + z below this are on the negative polar axis
#: (measure zero) and are rejected rather than fed to the log.
EPS_GEOM = 1e-12

_HYP_TOL = 1e-9  # internal accuracy target, one digit under the 1e-8 contract
_DD_MAX_ABS_Z = 60.0
_TAYLOR_MAX_TERMS = 900


class SpecialFunctionError(Exception):
    """Base class for special-function failures."""


class GammaPoleError(SpecialFunctionError):
    """Gamma evaluated at a non-positive integer."""


class ConvergenceError(SpecialFunctionError):
    """Neither series nor asymptotic branch met the accuracy target."""


class DegenerateGeometryError(SpecialFunctionError):
    """Eikonal phase requested on the negative polar axis (r + z ~ 0)."""


@dataclass(frozen=True)
class DistortionParams:
    """Coulomb and eikonal coupling strengths of the ejected electron.

    The standard construction ties both couplings to the ejected momentum
    (alpha1 = eta1 = 1/k1); build through :meth:`for_momentum` to get that
    exactly.  Direct construction is permitted so tests can switch the
    distortion off (alpha1 = eta1 = 0 recovers the plane-wave Born limit).
    """

    alpha1: float
    eta1: float
    k1: float

    @classmethod
    def for_momentum(cls, k1: float) -> "DistortionParams":
        if not k1 > 0.0:
            raise ValueError(f"ejected momentum must be positive, got {k1}")
        return cls(alpha1=1.0 / k1, eta1=1.0 / k1, k1=k1)


# ---------------------------------------------------------------------------
# complex gamma
# ---------------------------------------------------------------------------

# Lanczos approximation, g = 607/128, 15 coefficients.  Relative error of
# the rational part is ~1e-15 on the right half plane; the reflection
# formula extends it to Re z < 0.5.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def cgamma(z: Cplx) -> Cplx:
    """Complex gamma function.

    Accurate to better than 1e-12 relative for |Im z| <= 50.  Raises
    :class:`GammaPoleError` at the poles z = 0, -1, -2, ...
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise GammaPoleError(f"gamma pole at z = {z}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return math.pi / (cmath.sin(math.pi * z) * cgamma(1.0 - z))
    zm = z - 1.0
    series = complex(_LANCZOS_C[0])
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        series += c / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (zm + 0.5) * cmath.exp(-t) * series


def _rcgamma(z: complex) -> complex:
    """1/Gamma(z); zero at the poles instead of raising."""
    if _is_nonpositive_integer(z):
        return 0.0 + 0.0j
    return 1.0 / cgamma(z)


# ---------------------------------------------------------------------------
# confluent hypergeometric function, second parameter fixed at 1
# ---------------------------------------------------------------------------


def _taylor_f64(a: complex, z: np.ndarray) -> np.ndarray:
    """Plain float64 Taylor sum of 1F1(a; 1; z); fine while |z| is small."""
    term = np.ones_like(z, dtype=np.complex128)
    total = term.copy()
    for k in range(_TAYLOR_MAX_TERMS):
        term = term * ((a + k) / ((k + 1.0) * (k + 1.0))) * z
        total += term
        if k > 3 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            return total
    return total


def _taylor_dd(a: complex, z: np.ndarray) -> np.ndarray:
    """Taylor sum in double-double arithmetic for the cancellation band."""
    zr = np.ascontiguousarray(z.real)
    zi = np.ascontiguousarray(z.imag)
    zrl = np.zeros_like(zr)
    zil = np.zeros_like(zr)
    tr, trl = np.ones_like(zr), np.zeros_like(zr)
    ti, til = np.zeros_like(zr), np.zeros_like(zr)
    sr, srl = np.ones_like(zr), np.zeros_like(zr)
    si, sil = np.zeros_like(zr), np.zeros_like(zr)
    for k in range(_TAYLOR_MAX_TERMS):
        den = float((k + 1) * (k + 1))  # exact in float64 for all k used here
        # term *= (a + k)
        tr, trl, ti, til = _dd.cdd_mul(
            tr, trl, ti, til, a.real + k, 0.0, a.imag, 0.0
        )
        # term *= z
        tr, trl, ti, til = _dd.cdd_mul(tr, trl, ti, til, zr, zrl, zi, zil)
        # term /= (k+1)^2
        tr, trl = _dd.dd_div_exact(tr, trl, den)
        ti, til = _dd.dd_div_exact(ti, til, den)
        sr, srl = _dd.dd_add(sr, srl, tr, trl)
        si, sil = _dd.dd_add(si, sil, ti, til)
        if k > 3 and np.all(
            _dd.cdd_abs(tr, ti) <= 1e-26 * _dd.cdd_abs(sr, si)
        ):
            break
    return (sr + srl) + 1j * (si + sil)


def _asymptotic(a: complex, z: np.ndarray):
    """Large-|z| expansion of 1F1(a; 1; z).

    Returns (values, relative error estimate per point).  Both component
    series are divergent; each is truncated at its smallest term, which
    also bounds the truncation error.
    """
    sgn = np.where(z.imag >= 0.0, 1.0, -1.0)
    logz = np.log(z)
    pref1 = np.exp(1j * math.pi * a * sgn - a * logz) * _rcgamma(1.0 - a)
    pref2 = np.exp(z + (a - 1.0) * logz) * _rcgamma(a)

    def summed(c: complex, w: np.ndarray):
        term = np.ones_like(w, dtype=np.complex128)
        total = term.copy()
        frozen = np.zeros(w.shape, dtype=bool)
        err = np.full(w.shape, np.inf)
        prev_mag = np.abs(term)
        for k in range(200):
            term = term * ((c + k) * (c + k)) / ((k + 1.0) * w)
            mag = np.abs(term)
            # freeze points whose terms started growing (past the optimal
            # truncation) or that converged; the smallest term bounds the
            # local truncation error.
            growing = (mag >= prev_mag) & (k > 1) & ~frozen
            err[growing] = prev_mag[growing]
            frozen |= growing
            done = mag <= 1e-17 * np.abs(total)
            err[done & ~frozen] = mag[done & ~frozen]
            frozen |= done
            if np.all(frozen):
                break
            add = ~frozen
            total[add] += term[add]
            prev_mag = mag
        err[~frozen] = prev_mag[~frozen]
        return total, err

    s1, e1 = summed(a, -z)
    s2, e2 = summed(1.0 - a, z)
    vals = pref1 * s1 + pref2 * s2
    abs_err = np.abs(pref1) * e1 + np.abs(pref2) * e2
    rel_err = abs_err / np.maximum(np.abs(vals), 1e-300)
    return vals, rel_err


def _f64_band_edge(a_mag: float) -> float:
    """|z| below which the float64 Taylor sum keeps ~9 digits."""
    return max(6.0, 19.0 - 1.6 * a_mag)


def _asymptotic_edge(a_mag: float) -> float:
    """|z| above which the asymptotic expansion reaches 1e-9."""
    return max(30.0, 22.0 + 2.6 * a_mag)


def _hyp1f1_b1_many(a: complex, z: np.ndarray) -> np.ndarray:
    """Vectorized 1F1(a; 1; z) over an array of z, fixed a."""
    a = complex(a)
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty(z.shape, dtype=np.complex128)
    az = np.abs(z)
    a_mag = abs(a)
    lo = _f64_band_edge(a_mag)
    hi = _asymptotic_edge(a_mag)

    small = az < lo
    mid = (az >= lo) & (az < hi)
    big = az >= hi

    if np.any(small):
        out[small] = _taylor_f64(a, z[small])
    if np.any(mid):
        zm = z[mid]
        # beyond ~e^60 of cancellation even the double-double series is out
        if np.any(np.abs(zm) > _DD_MAX_ABS_Z):
            worst = zm[np.abs(zm) > _DD_MAX_ABS_Z][0]
            raise ConvergenceError(
                f"1F1({a}; 1; z) did not converge at z = {worst}: the "
                "coupling is too strong for the asymptotic expansion there "
                "and |z| too large for the double-double series"
            )
        out[mid] = _taylor_dd(a, zm)
    if np.any(big):
        vals, rel = _asymptotic(a, z[big])
        bad = rel > _HYP_TOL
        if np.any(bad):
            zb = z[big][bad]
            rescue = np.abs(zb) <= _DD_MAX_ABS_Z
            if not np.all(rescue):
                worst = zb[~rescue][0]
                raise ConvergenceError(
                    f"1F1({a}; 1; z) did not converge at z = {worst}: "
                    "asymptotic error estimate above tolerance and |z| too "
                    "large for the double-double series"
                )
            vals[bad] = _taylor_dd(a, zb)
        out[big] = vals
    return out


def hyp1f1_b1(a: Cplx, z: Cplx) -> Cplx:
    """Confluent hypergeometric function 1F1(a; 1; z).

    Intended for a on or near the imaginary axis and z on or near the
    imaginary axis with |z| up to ~1e4; relative accuracy 1e-8 or better
    across the series/asymptotic crossover.  Raises
    :class:`ConvergenceError` if no branch meets tolerance.
    """
    result = _hyp1f1_b1_many(complex(a), np.array([complex(z)]))[0]
    if not (math.isfinite(result.real) and math.isfinite(result.imag)):
        raise ConvergenceError(f"1F1({a}; 1; {z}) produced a non-finite value")
    return complex(result)


# ---------------------------------------------------------------------------
# Coulomb distortion and eikonal phase
# ---------------------------------------------------------------------------


def _coulomb_norm(alpha1: float, conjugated: bool) -> complex:
    """exp(-pi alpha1/2) Gamma(1 -+ i alpha1): the continuum normalization."""
    sign = -1.0 if conjugated else 1.0
    return math.exp(-0.5 * math.pi * alpha1) * cgamma(1.0 + sign * 1j * alpha1)


def _coulomb_distortion_many(
    p: DistortionParams,
    r1: np.ndarray,
    k1_vec: np.ndarray,
    conjugated: bool,
) -> np.ndarray:
    """Vectorized normalization x hypergeometric over rows of r1 (N, 3)."""
    if p.alpha1 == 0.0:
        return np.ones(r1.shape[0], dtype=np.complex128)
    radii = np.sqrt(np.einsum("ij,ij->i", r1, r1))
    x = p.k1 * radii + r1 @ k1_vec
    sign = 1.0 if conjugated else -1.0
    a = sign * 1j * p.alpha1
    vals = _hyp1f1_b1_many(a, sign * 1j * x)
    return _coulomb_norm(p.alpha1, conjugated) * vals


def coulomb_distortion(
    p: DistortionParams,
    r1,
    k1_vec,
    conjugated: bool = True,
) -> Cplx:
    """Coulomb distortion factor of the ejected electron at position r1.

    Returns exp(-pi alpha1/2) Gamma(1 -+ i alpha1)
    1F1[+-i alpha1; 1; +-i(k1 r1 + k1.r1)], the upper signs for
    ``conjugated=True`` (the form that enters the transition amplitude as
    part of the bra) and the lower signs for the state itself.  The two
    are complex conjugates of each other.  The plane-wave factor is not
    included.
    """
    r1 = np.asarray(r1, dtype=float).reshape(1, 3)
    k1_vec = np.asarray(k1_vec, dtype=float)
    k1 = float(np.linalg.norm(k1_vec))
    if p.alpha1 != 0.0 and not math.isclose(k1, p.k1, rel_tol=1e-12):
        raise ValueError(f"|k1_vec| = {k1} does not match params.k1 = {p.k1}")
    out = complex(_coulomb_distortion_many(p, r1, k1_vec, conjugated)[0])
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise ConvergenceError("coulomb_distortion produced a non-finite value")
    return out


def _eikonal_phase_many(
    b1: np.ndarray, b2: np.ndarray, eta1: float
) -> np.ndarray:
    """exp(i eta1 ln(b1/b2)) for positive base arrays (validity unchecked)."""
    if eta1 == 0.0:
        return np.ones_like(b1, dtype=np.complex128)
    return np.exp(1j * eta1 * (np.log(b1) - np.log(b2)))


def eikonal_phase(r1, r12, eta1: float) -> Cplx:
    """Eikonal phase (r1 + z1)^{i eta1} (r12 + z12)^{-i eta1}.

    z components are taken literally (the caller has already rotated the
    ejected-electron momentum onto the polar axis).  Unit modulus by
    construction; conjugate for the bra-side convention.  Points on the
    negative polar axis (either base below EPS_GEOM) raise
    :class:`DegenerateGeometryError`.
    """
    r1 = np.asarray(r1, dtype=float)
    r12 = np.asarray(r12, dtype=float)
    b1 = float(np.linalg.norm(r1) + r1[2])
    b2 = float(np.linalg.norm(r12) + r12[2])
    if b1 < EPS_GEOM or b2 < EPS_GEOM:
        raise DegenerateGeometryError(
            f"point on the negative polar axis: r1+z1 = {b1}, r12+z12 = {b2}"
        )
    return complex(np.exp(1j * eta1 * (math.log(b1) - math.log(b2))))
