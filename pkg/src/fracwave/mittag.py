r"""Two-parameter Mittag-Leffler function on the real line.

.. math::

    E_{a,b}(z) = \sum_{k \ge 0} \frac{z^k}{\Gamma(ak + b)}

Evaluation strategy for the default ``"auto"`` policy:

1. closed forms for ``(1, 1)`` (exp) and ``(2, 1)``, ``(2, 2)`` (cos/sin and
   cosh/sinh);
2. for ``z < 0``, the asymptotic expansion when its optimal-truncation error
   meets the tolerance;
3. otherwise the power series in double precision with compensated summation,
   when the cancellation bound ``eps * sum |term|`` meets the tolerance;
4. otherwise the same power series in extended precision (mpmath), with the
   working precision raised by the number of digits lost to cancellation.

Tolerances are absolute for ``|E| <= 1`` and relative above.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from typing import Iterable

import mpmath
from mpmath.libmp import from_float, mpf_add, mpf_mul, round_nearest, to_float
import numpy as np

from .errors import DomainError, NonConvergence
from .fracops import OrderLike, as_order, rgamma

POLICIES = ("auto", "series", "asymptotic", "exp_special", "trig_special")

_EPS = 2.0**-52
_LOG_RGAMMA_MAX = math.log(1.13)


@dataclass(frozen=True)
class MLSpec:
    """Parameters and evaluation policy for :func:`ml`."""

    a: float
    b: float = 1.0
    policy: str = "auto"
    tol: float = 1e-12
    kmax: int = 1000
    z_switch: float = 30.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"Mittag-Leffler parameter a must be > 0, got {self.a}")
        if not math.isfinite(self.b):
            raise DomainError(f"Mittag-Leffler parameter b must be finite, got {self.b}")
        if self.policy not in POLICIES:
            raise DomainError(f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        if self.kmax < 10:
            raise DomainError("kmax must be at least 10")
        if not self.tol > 0:
            raise DomainError("tol must be positive")


def _same(x: float, y: float) -> bool:
    return abs(x - y) <= 1e-15 * max(1.0, abs(y))


def _special(a: float, b: float, z: float):
    if _same(a, 1.0) and _same(b, 1.0):
        return math.exp(z)
    if _same(a, 2.0) and _same(b, 1.0):
        return math.cos(math.sqrt(-z)) if z <= 0 else math.cosh(math.sqrt(z))
    if _same(a, 2.0) and _same(b, 2.0):
        if z == 0:
            return 1.0
        s = math.sqrt(abs(z))
        return math.sin(s) / s if z < 0 else math.sinh(s) / s
    return None


def _tail_small(terms, bound) -> bool:
    """Last term, inflated by the geometric tail factor, is below ``bound``."""
    last = abs(terms[-1])
    if len(terms) > 1 and terms[-2] != 0.0:
        ratio = last / abs(terms[-2])
        if ratio >= 1.0:
            return False
        last /= 1.0 - ratio
    return last <= bound


def _series(a: float, b: float, z: float, tol: float, kmax: int):
    """Double-precision series; returns ``(value, rounding-error bound)``."""
    terms = []
    err = 0.0
    partial = 0.0
    small = 0
    logz = math.log(abs(z)) if z != 0 else -math.inf
    sign_z = -1.0 if z < 0 else 1.0
    for k in range(kmax):
        arg = a * k + b
        if z != 0 and (arg > 170.0 or k * logz > 700.0):
            expo = k * logz - math.lgamma(arg)
            if expo > 709.0:
                raise NonConvergence(f"E_{{{a},{b}}} series terms overflow at z={z}")
            term = (sign_z**k) * math.exp(expo)
            err += abs(term) * _EPS * (abs(expo) + 8)
        else:
            term = (z**k) * rgamma(arg)
            err += abs(term) * _EPS * (8 + abs(arg) * math.log(abs(arg) + 8))
        terms.append(term)
        partial += term
        if _tail_small(terms, tol * abs(partial)) or (term == 0.0 and partial == 0.0 and k > 0):
            small += 1
            if small == 3:
                return math.fsum(terms), err
        else:
            small = 0
    raise NonConvergence(f"E_{{{a},{b}}}({z}) series not converged after {kmax} terms")


_MP_COEFFS: dict = {}
_MP_LOCK = threading.Lock()


def _mp_coeffs(a: float, b: float, prec: int, count: int) -> list:
    """Cached raw ``1/Gamma(a k + b)``, ``k < count``, at ``prec`` bits."""
    with _MP_LOCK:
        coeffs = _MP_COEFFS.setdefault((a, b, prec), [])
        if len(coeffs) < count:
            with mpmath.workprec(prec):
                aa, bb = mpmath.mpf(a), mpmath.mpf(b)
                coeffs.extend(mpmath.rgamma(aa * k + bb)._mpf_ for k in range(len(coeffs), count))
        return coeffs


def _log_term(a: float, b: float, k: int, logx: float) -> float:
    arg = a * k + b
    if arg <= 0 and arg == round(arg):
        return -math.inf
    return k * logx - math.lgamma(arg)


def _series_extent(a: float, b: float, x: float, bound: float, kmax: int):
    """``(K, log_peak)``: terms needed so the tail of ``sum x^k/|Gamma(ak+b)|``
    is below ``bound``, and the log of the largest term.

    Past the peak the term ratios decrease, so the geometric bound on the tail
    is rigorous there.
    """
    logx = math.log(x)
    log_bound = math.log(bound)
    prev = _log_term(a, b, 0, logx)
    peak = prev
    for k in range(1, kmax):
        cur = _log_term(a, b, k, logx)
        peak = max(peak, cur)
        if cur < prev and cur != -math.inf:
            ratio = math.exp(cur - prev)
            if cur - math.log1p(-ratio) <= log_bound:
                return k + 3, peak
        prev = cur if cur != -math.inf else prev
    raise NonConvergence(f"E_{{{a},{b}}} series at |z|={x} needs more than {kmax} terms")


def _series_mp(a: float, b: float, z: float, tol: float, kmax: int, scale: float = 1.0) -> float:
    """Extended-precision series.

    ``scale`` estimates ``|E|``; the truncation error is kept below
    ``0.1 * tol * max(1, scale)``. The working precision covers the digits
    lost to cancellation (largest term against ``scale``), the term count
    comes from the term envelope, and the sum is done by Horner's rule.
    """
    floor = max(1.0, scale)
    K, log_peak = _series_extent(a, b, abs(z), 0.1 * tol * floor, kmax)
    extra = max(0, int(math.ceil((log_peak - math.log(floor)) / math.log(10) + math.log10(K))))
    digits = 20 + 5 * ((extra + 4) // 5)  # coarse steps so coefficient caches are shared
    prec = int(digits * 3.33) + 8
    coeffs = _mp_coeffs(a, b, prec, max(64, K))
    zt = from_float(z)
    acc = coeffs[K - 1]
    for k in range(K - 2, -1, -1):
        acc = mpf_add(mpf_mul(acc, zt, prec, round_nearest), coeffs[k], prec, round_nearest)
    return to_float(acc, rnd=round_nearest)


def _asymptotic(a: float, b: float, z: float, kmax: int):
    """Asymptotic expansion for large ``|z|``; returns ``(value, error estimate)``.

    Algebraic part ``-sum_k z**-k / Gamma(b - a k)`` truncated at its smallest
    term, plus the exponential contributions ``(1/a) zeta**(1-b) exp(zeta)`` of
    every branch ``zeta`` of ``z**(1/a)`` inside the sector ``|arg| <= a*pi``.
    """
    if z == 0:
        raise DomainError("asymptotic expansion is not defined at z = 0")
    x = abs(z)
    arg = math.pi if z < 0 else 0.0
    root = x ** (1.0 / a)
    if root < 1e-100:
        raise DomainError(f"asymptotic expansion is meaningless at |z| = {x}")

    expo = 0.0
    omitted = 0.0
    # Branches just outside the sector are not summed, but near the Stokes
    # lines their size is comparable to the truncation error, so it is kept.
    m_lo = math.ceil((-a * math.pi - arg) / (2 * math.pi) - 1e-12)
    m_hi = math.floor((a * math.pi - arg) / (2 * math.pi) + 1e-12)
    for m in (m_lo - 1, m_hi + 1):
        theta = (arg + 2 * math.pi * m) / a
        if abs(theta) < (a + 0.5) * math.pi and root > 0.0:
            omitted += root ** (1.0 - b) * math.exp(min(root * math.cos(theta), 700.0)) / a
    if z < 0 and a < 1.0:
        pass  # no branch of z**(1/a) inside the sector
    elif z < 0 and a == 1.0:
        # single real branch exp(z); only its size is kept, as error
        omitted += root ** (1.0 - b) * math.exp(-root) if root > 0.0 else 0.0
    else:
        acc = 0j
        for m in range(m_lo, m_hi + 1):
            zeta = root * cmath.exp(1j * (arg + 2 * math.pi * m) / a)
            if zeta.real > 709.0:
                raise DomainError(f"E_{{{a},{b}}}({z}) overflows double precision")
            acc += zeta ** (1.0 - b) * cmath.exp(zeta)
        expo = acc.real / a

    # Truncate where the envelope of |z|**-k / |Gamma(x)|, x = b - a*k, is
    # smallest (Gamma(1 - x)/pi bounds 1/|Gamma(x)| for x < -1); the terms themselves dip near the zeros of 1/Gamma.
    terms = []
    prev = math.inf
    err = None
    logx = math.log(x)
    inv = 1.0 / z
    power = 1.0
    for k in range(1, kmax):
        power *= inv
        arg_k = b - a * k
        if arg_k < -160.0:
            break
        if arg_k >= 1.0:
            env = -k * logx - math.lgamma(arg_k)
        elif arg_k >= -1.0:
            env = -k * logx + _LOG_RGAMMA_MAX  # |1/Gamma| <= 1.13 on [-1, 1]
        else:
            env = -k * logx + math.lgamma(1.0 - arg_k) - math.log(math.pi)
        if env > prev:
            err = math.exp(min(env, 700.0))
            break
        prev = env
        terms.append(-power * rgamma(arg_k))
        if math.exp(env) <= _EPS * 1e-3 * max(1.0, abs(expo)):
            err = math.exp(env)
            break
    if err is None:
        err = math.exp(min(prev, 700.0))
    return expo + math.fsum(terms), err + omitted


def ml(spec: MLSpec, z: float) -> float:
    """Evaluate ``E_{a,b}(z)`` for real ``z`` according to ``spec``."""
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"Mittag-Leffler argument must be finite, got {z}")
    a, b, tol = spec.a, spec.b, spec.tol

    if spec.policy in ("exp_special", "trig_special"):
        ok = (_same(a, 1.0) and _same(b, 1.0)) if spec.policy == "exp_special" else (
            _same(a, 2.0) and (_same(b, 1.0) or _same(b, 2.0)))
        if not ok:
            raise DomainError(f"policy {spec.policy!r} does not cover (a, b) = ({a}, {b})")
        return _special(a, b, z)
    if spec.policy == "series":
        if abs(z) > spec.z_switch:
            raise DomainError(f"series policy restricted to |z| <= {spec.z_switch}, got {z}")
        return _series(a, b, z, tol, spec.kmax)[0]
    if spec.policy == "asymptotic":
        return _asymptotic(a, b, z, spec.kmax)[0]

    if z == 0.0:
        return rgamma(b)
    special = _special(a, b, z)
    if special is not None:
        return special
    if z < -1.0:  # the expansion is useless for |z| <= 1
        value, err = _asymptotic(a, b, z, spec.kmax)
        if err <= tol * max(1.0, abs(value)):
            return value
    try:
        value, err = _series(a, b, z, tol, spec.kmax)
    except NonConvergence:
        value, err = None, math.inf
    if value is not None and err <= tol * max(1.0, abs(value)):
        return value
    if z > 0:
        # exponential growth: the single real branch dominates
        big, big_err = _asymptotic(a, b, z, spec.kmax)
        if big_err <= tol * max(1.0, abs(big)):
            return big
        value = big if value is None else value
    return _series_mp(a, b, z, tol, 10 * spec.kmax, abs(value) if value is not None else 1.0)


def ml_values(spec: MLSpec, zs: Iterable[float]) -> np.ndarray:
    """:func:`ml` mapped over an array of arguments."""
    zs = np.asarray(zs, dtype=float)
    return np.array([ml(spec, z) for z in zs.ravel()]).reshape(zs.shape)


def _t_power(t: float, alpha: float) -> float:
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}")
    return t**alpha


def ml_cos_branch(alpha: OrderLike, mubar: float, t: float, tol: float = 1e-12) -> float:
    """Cosine-like branch ``E_{2a,1}(-mubar**2 t**(2a))``."""
    al = as_order(alpha).value
    ta = _t_power(t, al)
    if al == 1.0:
        return math.cos(mubar * t)
    return ml(MLSpec(2 * al, 1.0, tol=tol), -(mubar**2) * ta * ta)


def ml_sin_branch(alpha: OrderLike, mubar: float, t: float, tol: float = 1e-12) -> float:
    """Sine-like branch ``mubar * t**a * E_{2a,a+1}(-mubar**2 t**(2a))``.

    Reduces to ``sin(mubar*t)`` at ``a = 1``; the sign convention of the
    caller's solution is applied by the caller.
    """
    al = as_order(alpha).value
    ta = _t_power(t, al)
    if al == 1.0:
        return math.sin(mubar * t)
    if ta == 0.0:
        return 0.0
    return mubar * ta * ml(MLSpec(2 * al, al + 1.0, tol=tol), -(mubar**2) * ta * ta)


def caputo_of_ml(alpha: OrderLike, lam: float, t: float, tol: float = 1e-12) -> tuple[float, float]:
    r"""Closed-form Caputo derivatives of the two Mittag-Leffler branches.

    Returns ``(D^a[E_{2a,1}(lam t^{2a})], D^a[t^a E_{2a,a+1}(lam t^{2a})])``,
    which by termwise application of the power rule equal
    ``lam t^a E_{2a,a+1}(lam t^{2a})`` and ``E_{2a,1}(lam t^{2a})``.
    """
    al = as_order(alpha).value
    if al > 1.0:
        raise DomainError(f"caputo_of_ml needs alpha in (0, 1], got {al}")
    ta = _t_power(t, al)
    z = lam * ta * ta
    first = lam * ta * ml(MLSpec(2 * al, al + 1.0, tol=tol), z) if ta else 0.0
    second = ml(MLSpec(2 * al, 1.0, tol=tol), z)
    return first, second
