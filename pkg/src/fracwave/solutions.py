"""Closed-form separated solutions of Caputo-in-time K-family wave equations.

Three families:

* :class:`SimilaritySolution` of ``D^a u = d3(u^2/2)`` on ``{1, x, x^2, x^3}``,
  ``u = (C0 + C1 x + C2 x^2 + C3 x^3) t^-a``;
* :class:`QuinticSolution` of the fifth-order equation on ``{1, cos x, sin x}``,
  built from the two Mittag-Leffler branches;
* :class:`OdibatSolution`, the compactly supported wave of the KdV variant
  ``D^a u + a d1(u^2) + d1(u u_xx) = 0``.

Each solution exposes its basis and time coefficients (``coefficients(t)``) so
that :mod:`fracwave.verify` can evaluate the spatial operator exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ConditionError, DegenerateError, DomainError, IntegerAlphaError, SingularAlphaError, SupportError
from .fracops import Order, OrderLike, as_order, gamma_fn
from .mittag import MLSpec, ml
from .subspace import Basis, KOperator, exact

CONDITION_TOL = 1e-12
ALPHA_TOL = 1e-12


def _similarity_kappa(alpha: float) -> float:
    return gamma_fn(1.0 - alpha) / gamma_fn(1.0 - 2.0 * alpha)


@dataclass(frozen=True)
class SimilaritySolution:
    """``u(x, t) = (C0 + C1 x + C2 x^2 + C3 x^3) / t**alpha``.

    ``kappa = Gamma(1-a)/Gamma(1-2a)`` is the factor produced by the Caputo
    derivative of ``t**-a``; the coefficients solve ``C_i kappa = Phi_i(C)``.
    """

    alpha: Order
    C: Tuple[float, float, float, float]
    kappa: float

    basis = Basis.monomial(3)

    @property
    def printed_C0(self) -> float:
        """Alternative constant ``(400/3) (Gamma(1-2a) / (60 Gamma(1-a)))**2``.

        It does not satisfy the ``i = 0`` consistency equation; kept so the
        verifier can report its residual next to the consistent one.
        """
        return 400.0 / 3.0 * (1.0 / (60.0 * self.kappa)) ** 2

    def coefficients(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("similarity solution is defined for t > 0 only")
        scale = t ** (-self.alpha.value)
        return tuple(c * scale for c in self.C)

    def to_record(self) -> dict:
        return {"alpha": self.alpha.value, "C": list(self.C), "kappa": self.kappa}

    @classmethod
    def from_record(cls, rec) -> "SimilaritySolution":
        return cls(Order(rec["alpha"]), tuple(float(c) for c in rec["C"]), float(rec["kappa"]))


def build_similarity(alpha: OrderLike) -> SimilaritySolution:
    """Coefficients of the similarity solution for ``alpha`` in (0, 1/2) U (1/2, 1).

    With ``g_i = C_i t^-a`` the system reduces to ``C_i kappa = Phi_i(C)``:
    ``C3 = kappa/60``, ``C2 = 1``, ``C1 = 20/kappa``, ``C0 = 400/(3 kappa^2)``.

    Raises
    ------
    SingularAlphaError
        At ``alpha = 1/2``, where ``Gamma(1 - 2a)`` has a pole.
    IntegerAlphaError
        At ``alpha = 1``; the classical equation applies there.
    """
    a = as_order(alpha)
    if a.near_half:
        raise SingularAlphaError("similarity solution diverges at alpha = 1/2")
    if abs(a.value - 1.0) < ALPHA_TOL:
        raise IntegerAlphaError("alpha = 1 is the classical equation; no fractional similarity solution")
    if not 0.0 < a.value < 1.0:
        raise DomainError(f"similarity solution needs alpha in (0, 1), got {a.value}")
    kappa = _similarity_kappa(a.value)
    C3 = kappa / 60.0
    C1 = 20.0 / kappa
    C0 = 400.0 / (3.0 * kappa * kappa)
    return SimilaritySolution(a, (C0, C1, 1.0, C3), kappa)


def eval_similarity(s: SimilaritySolution, x, t):
    """``(C0 + C1 x + C2 x^2 + C3 x^3) t**-alpha`` for ``t > 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("similarity solution is defined for t > 0 only")
    C0, C1, C2, C3 = s.C
    x = np.asarray(x, dtype=float)
    return (C0 + x * (C1 + x * (C2 + x * C3))) * t ** (-s.alpha.value)


@dataclass(frozen=True)
class QuinticSolution:
    """``u = C + E_{2a,1}(-mb^2 t^{2a}) cos x - mb t^a E_{2a,a+1}(-mb^2 t^{2a}) sin x``.

    ``mu = 2(nu - beta + gamma)``, ``mubar = C mu``.
    """

    alpha: Order
    nu: float
    beta: float
    gamma_c: float
    C: float
    mu: float
    mubar: float

    basis = Basis.trig(1)

    @property
    def operator(self) -> KOperator:
        return KOperator.quintic(self.nu, self.beta, self.gamma_c)

    def branches(self, t):
        """``(g2, g3)`` at times ``t`` (scalar or array)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        a = self.alpha.value
        mb = self.mubar
        if a == 1.0:
            g2 = np.cos(mb * t_arr)
            g3 = -np.sin(mb * t_arr)
        else:
            cos_spec = MLSpec(2 * a, 1.0)
            sin_spec = MLSpec(2 * a, a + 1.0)
            ta = t_arr**a
            z = -(mb * mb) * ta * ta
            g2 = np.array([ml(cos_spec, zi) for zi in z])
            g3 = -mb * ta * np.array([ml(sin_spec, zi) for zi in z])
        if np.ndim(t) == 0:
            return float(g2[0]), float(g3[0])
        return g2, g3

    def coefficients(self, t):
        g2, g3 = self.branches(t)
        return (np.full_like(np.asarray(g2, dtype=float), self.C), g2, g3)

    def to_record(self) -> dict:
        return {
            "alpha": self.alpha.value,
            "nu": self.nu,
            "beta": self.beta,
            "gamma_c": self.gamma_c,
            "C": self.C,
            "mu": self.mu,
            "mubar": self.mubar,
        }

    @classmethod
    def from_record(cls, rec) -> "QuinticSolution":
        return cls(Order(rec["alpha"]), *(float(rec[k]) for k in ("nu", "beta", "gamma_c", "C", "mu", "mubar")))


def build_quintic(alpha: OrderLike, nu: float, beta: float, gamma_c: float, C: float) -> QuinticSolution:
    """Validate the invariance condition and non-degeneracy, then build the solution.

    Raises
    ------
    ConditionError
        If ``16 nu - 4 beta + gamma != 0``.
    DegenerateError
        If ``mu = 2(nu - beta + gamma) = 0`` or ``C = 0``.
    """
    a = as_order(alpha)
    if a.value > 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {a.value}")
    nu, beta, gamma_c, C = (float(v) for v in (nu, beta, gamma_c, C))
    cond = 16.0 * nu - 4.0 * beta + gamma_c
    if abs(cond) > CONDITION_TOL:
        raise ConditionError(f"16*nu - 4*beta + gamma = {cond} != 0; {{1, cos x, sin x}} is not invariant")
    mu = 2.0 * (nu - beta + gamma_c)
    if abs(mu) < CONDITION_TOL:
        raise DegenerateError("mu = 2(nu - beta + gamma) = 0 gives only the trivial solution")
    if C == 0.0:
        raise DegenerateError("C = 0 gives mubar = 0 and a time-independent profile")
    return QuinticSolution(a, nu, beta, gamma_c, C, mu, C * mu)


def eval_quintic(q: QuinticSolution, x, t):
    """Value of the quintic solution; broadcasts over ``x`` for scalar ``t``."""
    if np.any(np.asarray(t) < 0):
        raise DomainError("time must be non-negative")
    x = np.asarray(x, dtype=float)
    if q.alpha.value == 1.0:
        return q.C + np.cos(x + q.mubar * np.asarray(t, dtype=float))
    g2, g3 = q.branches(t)
    return q.C + g2 * np.cos(x) + g3 * np.sin(x)


@dataclass(frozen=True)
class OdibatSolution:
    """``(c/a) [1 - cos(k x) E_{2a,1}(-s^2) - sin(k x) s E_{2a,a+1}(-s^2)]``.

    ``k = sqrt(a)``, ``s = k c t**alpha``; zero outside
    ``|x - c t**alpha| < pi / mu_supp`` with ``mu_supp = sqrt(a)/2``.
    """

    a: float
    c: float
    alpha: Order
    mu_supp: float

    @property
    def basis(self) -> Basis:
        return Basis.trig(exact(math.sqrt(self.a)))

    @property
    def operator(self) -> KOperator:
        return KOperator.odibat(self.a)

    def half_width(self) -> float:
        return math.pi / self.mu_supp

    def inside(self, x, t):
        t = np.asarray(t, dtype=float)
        return np.abs(np.asarray(x, dtype=float) - self.c * t**self.alpha.value) <= self.half_width()

    def coefficients(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        al = self.alpha.value
        k = math.sqrt(self.a)
        amp = self.c / self.a
        s = k * self.c * t**al
        if al == 1.0:
            cos_b, sin_b = np.cos(s), np.sin(s)
        else:
            cos_spec = MLSpec(2 * al, 1.0)
            sin_spec = MLSpec(2 * al, al + 1.0)
            cos_b = np.array([ml(cos_spec, -si * si) for si in s])
            sin_b = s * np.array([ml(sin_spec, -si * si) for si in s])
        return (np.full_like(s, amp), -amp * cos_b, -amp * sin_b)

    def to_record(self) -> dict:
        return {"a": self.a, "c": self.c, "alpha": self.alpha.value, "mu_supp": self.mu_supp}

    @classmethod
    def from_record(cls, rec) -> "OdibatSolution":
        return cls(float(rec["a"]), float(rec["c"]), Order(rec["alpha"]), float(rec["mu_supp"]))


def build_odibat(a: float, c: float, alpha: OrderLike) -> OdibatSolution:
    al = as_order(alpha)
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    if al.value > 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {al.value}")
    return OdibatSolution(float(a), float(c), al, math.sqrt(a) / 2.0)


def eval_odibat(o: OdibatSolution, x, t: float):
    """Compact wave at scalar time ``t``; ``x`` may be an array.

    Boundary points of the support take the interior formula's value.
    """
    if t < 0:
        raise DomainError("time must be non-negative")
    x = np.asarray(x, dtype=float)
    g1, g2, g3 = (float(v[0]) for v in o.coefficients(t))
    k = math.sqrt(o.a)
    u = g1 + g2 * np.cos(k * x) + g3 * np.sin(k * x)
    return np.where(o.inside(x, t), u, 0.0) if x.ndim else (float(u) if o.inside(x, t) else 0.0)


def odibat_field(o: OdibatSolution, x, t):
    """Interior formula without the support cut-off, for residual checks.

    Raises
    ------
    SupportError
        If any ``(x, t)`` pair lies outside the support.
    """
    xs = np.asarray(x, dtype=float)
    ts = np.asarray(t, dtype=float)
    if not np.all(o.inside(xs[None, :], ts[:, None])):
        raise SupportError("sample grid leaves the support |x - c t^alpha| < pi/mu")
    return o.coefficients(ts)


def rosenau_hyman(alpha: OrderLike = 1.0) -> KOperator:
    """Time-fractional Rosenau-Hyman operator ``d3(u^2) + d1(u^2)`` (``nu = 0``).

    Its invariance-condition value is ``16*0 - 4*1 + 1 = -3``, so
    ``{1, cos x, sin x}`` is not invariant.
    """
    as_order(alpha)
    return KOperator(nu=0, beta=1, gamma_c=1, p=2, n=2, m=2)


def quintic_condition_value(op: KOperator):
    return 16 * op.nu - 4 * op.beta + op.gamma_c


__all__ = [
    "SimilaritySolution", "build_similarity", "eval_similarity",
    "QuinticSolution", "build_quintic", "eval_quintic",
    "OdibatSolution", "build_odibat", "eval_odibat", "odibat_field",
    "rosenau_hyman", "quintic_condition_value",
]
