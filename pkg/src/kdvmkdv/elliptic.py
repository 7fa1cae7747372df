"""Jacobi elliptic functions sn, cn, dn and the complete integral K(m).

Parameter convention: dn^2 = 1 - m*sn^2 with m in [0, 1].  m=0 degenerates
to circular functions, m=1 to hyperbolic ones.  Evaluation uses the
arithmetic-geometric mean with the descending Landen (amplitude) recursion;
m=1 is a separate closed-form branch because K(1) diverges.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

_AGM_TOL = 1e-15
_AGM_MAX_ITER = 32


class DomainError(ValueError):
    """Argument outside the supported real parameter range."""


class EllipticTriple(NamedTuple):
    sn: float | np.ndarray
    cn: float | np.ndarray
    dn: float | np.ndarray


def _agm_scale(m: float) -> tuple[list[float], list[float]]:
    """AGM sequences a_n and c_n=(a_{n-1}-b_{n-1})/2 for parameter m < 1."""
    a, b = 1.0, float(np.sqrt(1.0 - m))
    avals = [a]
    cvals = [float(np.sqrt(m))]
    for _ in range(_AGM_MAX_ITER):
        if abs(cvals[-1]) <= _AGM_TOL:
            break
        a, b = 0.5 * (a + b), float(np.sqrt(a * b))
        avals.append(a)
        cvals.append(avals[-2] - a)  # (a_n - b_n)/2
    return avals, cvals


def complete_K(m: float) -> float:
    """Complete elliptic integral of the first kind, K(m) = pi/(2*AGM(1, sqrt(1-m))).

    Valid for 0 <= m < 1; relative error at the AGM convergence floor (~1e-15).
    """
    if not np.isfinite(m) or m < 0.0 or m >= 1.0:
        raise DomainError("K diverges at m=1; parameter out of range: m=%r" % (m,))
    a, b = 1.0, float(np.sqrt(1.0 - m))
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= _AGM_TOL:
            break
        a, b = 0.5 * (a + b), float(np.sqrt(a * b))
    return float(np.pi / (2.0 * a))


def _amplitude(x: np.ndarray, m: float) -> np.ndarray:
    """Jacobi amplitude phi(x, m) by the descending Landen recursion, m < 1.

    Accurate for reduced arguments (callers reduce x into [0, K]).
    """
    avals, cvals = _agm_scale(m)
    n = len(avals) - 1
    phi = (2.0**n) * avals[n] * x
    for k in range(n, 0, -1):
        ratio = cvals[k] / avals[k]
        phi = 0.5 * (phi + np.arcsin(np.clip(ratio * np.sin(phi), -1.0, 1.0)))
    return phi


def jacobi(xi, m: float) -> EllipticTriple:
    """Evaluate (sn, cn, dn) at argument xi for parameter m in [0, 1].

    xi may be a scalar or ndarray.  For m=1 the exact hyperbolic limit
    (tanh, sech, sech) is returned; for m<1 the argument is first reduced
    modulo the period 4K(m) and folded into [0, K] with the quarter- and
    half-period symmetries, then evaluated by the AGM amplitude recursion.
    dn is recovered from dn^2 = 1 - m*sn^2 (positive for all real xi, m<1).
    """
    x = np.asarray(xi, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite argument xi")
    if not np.isfinite(m) or m < 0.0 or m > 1.0:
        raise DomainError("elliptic parameter m=%r outside [0, 1]" % (m,))
    scalar = x.ndim == 0

    if m == 1.0:
        sn = np.tanh(x)
        cn = 1.0 / np.cosh(x)
        dn = cn
    else:
        K = complete_K(m)
        r = np.mod(x, 4.0 * K)
        sign_s = np.ones_like(r)
        sign_c = np.ones_like(r)
        # shift by the half period 2K: sn,cn flip sign, dn unchanged
        upper = r >= 2.0 * K
        r = np.where(upper, r - 2.0 * K, r)
        sign_s = np.where(upper, -sign_s, sign_s)
        sign_c = np.where(upper, -sign_c, sign_c)
        # reflect about the quarter period K: sn symmetric, cn antisymmetric
        refl = r > K
        r = np.where(refl, 2.0 * K - r, r)
        sign_c = np.where(refl, -sign_c, sign_c)

        phi = _amplitude(r, m)
        sn = sign_s * np.sin(phi)
        cn = sign_c * np.cos(phi)
        dn = np.sqrt(np.maximum(1.0 - m * sn * sn, 0.0))

    if scalar:
        return EllipticTriple(float(sn), float(cn), float(dn))
    return EllipticTriple(sn, cn, dn)
