"""Residual checks for the closed-form solutions.

Exact targets are checked algebraically. Numerical targets sample the
solution on a uniform grid from ``t = 0``, apply the L1 Caputo scheme in time
and evaluate the spatial operator exactly, through the closure expansion of
the operator on the solution's basis. Residuals are taken only at nodes
``t >= t_min`` and measured on several nested grids (``h * 2**k``) to
estimate the convergence order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .fracops import PowerTerm, TimeGrid, as_order, caputo_l1, caputo_power
from .mittag import caputo_of_ml, ml_cos_branch, ml_sin_branch
from .solutions import OdibatSolution, build_similarity, odibat_field
from .subspace import Basis, KOperator, apply_operator, reduce_to_system

TARGETS = ("similarity_system", "quintic_system", "quintic_pde", "odibat_pde", "custom")
SCHEMA = 1

ANALYTIC_TOL = 1e-10
NUMERIC_TOL = 1e-3
DEFAULT_H = 2.0**-11
DEFAULT_T_MIN = 0.5


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of one verification run.

    ``passed`` is ``None`` for report-only targets. ``levels`` lists the
    ``(h, max_residual)`` pairs of the nested grids, coarsest first.
    """

    target: str
    grid: Optional[TimeGrid]
    x_samples: Tuple[float, ...]
    max_residual: float
    l2_residual: float
    est_order: Optional[float] = None
    notes: str = ""
    tol: Optional[float] = None
    passed: Optional[bool] = None
    levels: Tuple[Tuple[float, float], ...] = ()
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target not in TARGETS:
            raise DomainError(f"unknown target {self.target!r}")
        if not self.max_residual >= 0:
            raise DomainError("max_residual must be non-negative")

    def to_record(self) -> dict:
        grid = None if self.grid is None else {"t0": self.grid.t0, "h": self.grid.h, "n": self.grid.n}
        return {
            "schema": SCHEMA,
            "target": self.target,
            "grid": grid,
            "x_samples": list(self.x_samples),
            "max_residual": self.max_residual,
            "l2_residual": self.l2_residual,
            "est_order": self.est_order,
            "levels": [list(lv) for lv in self.levels],
            "tol": self.tol,
            "passed": self.passed,
            "notes": self.notes,
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, indent=2)

    def summary(self) -> str:
        status = "report" if self.passed is None else ("PASS" if self.passed else "FAIL")
        order = "n/a" if self.est_order is None else f"{self.est_order:.3f}"
        h = "exact" if self.grid is None else f"h={self.grid.h:.6g}"
        return (f"{self.target}: {status} max={self.max_residual:.3e} l2={self.l2_residual:.3e} "
                f"order={order} {h}")


def estimate_order(hs: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of ``log(error)`` against ``log(h)``; ``None`` if undefined."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.size < 2 or np.any(errors <= 0):
        return None
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def _norms(r: np.ndarray) -> Tuple[float, float]:
    r = np.abs(np.asarray(r, dtype=float))
    return float(np.max(r)), float(np.sqrt(np.mean(r * r)))


def time_derivative(values: np.ndarray, alpha: float, grid: TimeGrid) -> np.ndarray:
    """L1 Caputo derivative along axis 0; at ``alpha = 1`` the backward difference.

    The backward difference is what the L1 formula becomes as ``alpha -> 1``.
    """
    values = np.asarray(values, dtype=float)
    if alpha == 1.0:
        out = np.zeros_like(values)
        out[1:] = np.diff(values, axis=0) / grid.h
        return out
    if values.ndim == 1:
        return caputo_l1(values, alpha, grid)
    cols = values.reshape(values.shape[0], -1)
    out = np.column_stack([caputo_l1(cols[:, j], alpha, grid) for j in range(cols.shape[1])])
    return out.reshape(values.shape)


def nested_grids(grid: TimeGrid, levels: int):
    """``[(stride, coarse grid), ...]`` from coarsest to ``grid`` itself."""
    if grid.t0 != 0.0:
        raise DomainError("verification grids start at t = 0 (the Caputo lower terminal)")
    if levels < 1:
        raise DomainError("need at least one grid level")
    top = 2 ** (levels - 1)
    if grid.n % top:
        raise DomainError(f"grid steps ({grid.n}) must be divisible by {top} for {levels} levels")
    if grid.n // top < 2:
        raise DomainError("coarsest grid needs at least two steps")
    out = []
    for k in reversed(range(levels)):
        s = 2**k
        out.append((s, TimeGrid(0.0, grid.h * s, grid.n // s)))
    return out


def make_grid(T: float, h: float, levels: int) -> TimeGrid:
    """Grid from 0 with finest step ``h`` whose step count suits ``levels`` nestings."""
    if not (T > 0 and h > 0):
        raise DomainError("need T > 0 and h > 0")
    top = 2 ** (levels - 1)
    coarse = max(2, int(round(T / (h * top))))
    return TimeGrid(0.0, h, coarse * top)


def _multilevel(samples: np.ndarray, alpha: float, grid: TimeGrid, levels: int, t_min: float,
                residual: Callable[[np.ndarray, np.ndarray, slice, int], np.ndarray]):
    """Run ``residual(derivative, samples, rows, stride)`` on every nested grid.

    ``samples`` are given on the finest grid; coarser levels subsample them.
    Only nodes with ``t >= t_min`` enter the norms.
    """
    per_level = []
    final = None
    for stride, g in nested_grids(grid, levels):
        sub = samples[::stride]
        deriv = time_derivative(sub, alpha, g)
        first = int(math.ceil(t_min / g.h - 1e-9))
        if first > g.n:
            raise DomainError(f"window start {t_min} lies beyond the grid end {g.T}")
        first = max(first, 1)
        r = residual(deriv, sub, slice(first, None), stride)
        mx, l2 = _norms(r)
        per_level.append((g.h, mx))
        final = (mx, l2)
    order = estimate_order(*zip(*per_level)) if levels >= 3 else None
    return final[0], final[1], order, tuple(per_level)


def verify_similarity(alpha) -> ResidualReport:
    """Algebraic residuals ``C_i kappa - Phi_i(C)`` of the third-order system.

    ``D^a[C_i t^-a] = C_i kappa t^-2a`` (power rule) and ``Phi_i(C t^-a) =
    Phi_i(C) t^-2a``, so the time dependence cancels and the check is exact.
    The notes also report the residuals with the printed ``C0`` value.
    """
    s = build_similarity(alpha)
    a = s.alpha.value
    kappa = caputo_power(PowerTerm(1.0, -a), a).coeff
    phi = reduce_to_system(KOperator.third_order(), Basis.monomial(3))
    C = list(s.C)
    res = np.array([C[i] * kappa - float(phi[i](C)) for i in range(4)])
    printed = [s.printed_C0] + C[1:]
    res_printed = [printed[i] * kappa - float(phi[i](printed)) for i in range(4)]
    mx, l2 = _norms(res)
    return ResidualReport(
        target="similarity_system",
        grid=None,
        x_samples=(),
        max_residual=mx,
        l2_residual=l2,
        notes=(f"derived C0={C[0]:.12g}; printed C0={s.printed_C0:.12g} leaves residual "
               f"{res_printed[0]:.6g} in the equation for g0"),
        tol=1e-11,
        passed=bool(mx <= 1e-11),
        extras={"C": C, "kappa": kappa, "residuals": res.tolist(),
                "printed_C0": s.printed_C0, "printed_C0_residuals": res_printed},
    )


def verify_quintic_system(alpha, mubar: float, t_window=(DEFAULT_T_MIN, 5.0), h: float = DEFAULT_H,
                          levels: int = 4, tol: float = NUMERIC_TOL,
                          analytic_tol: float = ANALYTIC_TOL, numerical: bool = True) -> ResidualReport:
    """Check ``D^a g2 = mubar g3`` and ``D^a g3 = -mubar g2``.

    ``g2 = E_{2a,1}(-mubar^2 t^2a)`` and ``g3 = -mubar t^a E_{2a,a+1}(-mubar^2 t^2a)``.
    The analytic branch takes ``D^a`` from the closed forms
    (:func:`caputo_of_ml`); the numerical branch from the L1 scheme on nested
    grids from 0, with residuals at nodes in ``t_window``; ``numerical=False``
    skips it. At ``alpha = 1`` only the classical derivatives of ``cos``/``sin``
    are checked.
    """
    al = as_order(alpha).value
    if al > 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {al}")
    t_min, T = (float(v) for v in t_window)
    if not (t_min >= DEFAULT_T_MIN and T > t_min):
        raise DomainError(f"window must satisfy {DEFAULT_T_MIN} <= t0 < T, got {t_window}")
    grid = make_grid(T, h, levels)
    t = grid.nodes
    inside = t >= t_min - 1e-12

    if al == 1.0:
        g2 = np.cos(mubar * t)
        g3 = -np.sin(mubar * t)
        r = np.concatenate([(-mubar * np.sin(mubar * t) - mubar * g3)[inside],
                            (-mubar * np.cos(mubar * t) + mubar * g2)[inside]])
        mx, l2 = _norms(r)
        return ResidualReport("quintic_system", grid, (), mx, l2, notes="alpha = 1: classical derivatives",
                              tol=analytic_tol, passed=bool(mx <= analytic_tol), extras={"analytic_max": mx})

    lam = -mubar * mubar

    # analytic branch on the window nodes of the coarsest grid
    stride = 2 ** (levels - 1)
    idx = np.nonzero(inside)[0]
    idx = idx[idx % stride == 0]
    ra = []
    for i in idx:
        d_cos, d_sin = caputo_of_ml(al, lam, t[i])
        g2_i = ml_cos_branch(al, mubar, t[i])
        g3_i = -ml_sin_branch(al, mubar, t[i])  # = -mubar * t^a E_{2a,a+1}
        ra.append(d_cos - mubar * g3_i)
        ra.append(-mubar * d_sin + mubar * g2_i)
    analytic_max = _norms(np.array(ra))[0]
    if not numerical:
        return ResidualReport(
            "quintic_system", grid, (), analytic_max, _norms(np.array(ra))[1],
            notes="analytic branch only", tol=analytic_tol, passed=bool(analytic_max <= analytic_tol),
            extras={"analytic_max": analytic_max, "analytic_tol": analytic_tol},
        )

    g2 = np.array([ml_cos_branch(al, mubar, ti) for ti in t])
    g3 = -np.array([ml_sin_branch(al, mubar, ti) for ti in t])
    samples = np.column_stack([g2, g3])

    def residual(deriv, sub, rows, stride):
        return np.concatenate([deriv[rows, 0] - mubar * sub[rows, 1], deriv[rows, 1] + mubar * sub[rows, 0]])

    mx, l2, order, per_level = _multilevel(samples, al, grid, levels, t_min, residual)
    passed = bool(mx <= tol and analytic_max <= analytic_tol)
    return ResidualReport(
        "quintic_system", grid, (), mx, l2, order,
        notes=f"analytic branch max {analytic_max:.3e}; L1 order expected {2 - al:.3f}",
        tol=tol, passed=passed, levels=per_level,
        extras={"analytic_max": analytic_max, "analytic_tol": analytic_tol, "expected_order": 2 - al},
    )


@dataclass(frozen=True)
class SeparatedField:
    """``u(x, t) = sum_i g_i(t) f_i(x)`` from a basis and a coefficient function.

    ``coeff_fn(t_array)`` returns one array per basis element.
    """

    basis: Basis
    coeff_fn: Callable
    alpha: object = 0.5

    def coefficients(self, t):
        return self.coeff_fn(np.asarray(t, dtype=float))


def verify_pde(solution, op: KOperator, grid: TimeGrid, x_samples: Optional[Sequence[float]] = None,
               alpha=None, t_min: float = DEFAULT_T_MIN, levels: int = 3, tol: Optional[float] = NUMERIC_TOL,
               target: str = "quintic_pde") -> ResidualReport:
    """Residual ``D^a u - F[u]`` on ``grid`` x ``x_samples``.

    ``solution`` exposes ``basis`` and ``coefficients(t)``; ``F[u]`` is the
    exact expansion of the operator on that basis, evaluated with the sampled
    coefficients, and ``D^a u`` is the L1 derivative of ``u(x, .)`` at each
    ``x``. ``tol=None`` makes the report ungated.
    """
    al = as_order(alpha if alpha is not None else solution.alpha).value
    if al > 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {al}")
    xs = np.asarray(x_samples if x_samples is not None else np.linspace(0, 2 * np.pi, 16, endpoint=False),
                    dtype=float)
    basis = solution.basis
    t = grid.nodes
    coeffs = [np.asarray(c, dtype=float) for c in solution.coefficients(t)]
    u = sum(np.multiply.outer(c, basis.element_values(k, xs)) for c, k in zip(coeffs, basis.keys))
    F = apply_operator(op, basis).evaluate(xs, coeffs)
    F = np.broadcast_to(np.asarray(F, dtype=float), u.shape)

    def residual(deriv, sub, rows, stride):
        return (deriv[rows] - F[::stride][rows]).ravel()

    mx, l2, order, per_level = _multilevel(u, al, grid, levels, t_min, residual)
    return ResidualReport(
        target, grid, tuple(float(x) for x in xs), mx, l2, order,
        notes=f"alpha={al}; residuals at t >= {t_min}",
        tol=tol, passed=None if tol is None else bool(mx <= tol), levels=per_level,
    )


def odibat_x_samples(o: OdibatSolution, T: float, count: int = 16) -> np.ndarray:
    """Points that stay inside the support for every ``t`` in ``[0, T]``."""
    hw = o.half_width()
    lo = min(0.0, o.c * T**o.alpha.value)
    hi = max(0.0, o.c * T**o.alpha.value)
    left, right = hi - hw, lo + hw
    if not left < right:
        raise DomainError("no x stays inside the support over the whole window; shorten T")
    margin = 0.1 * (right - left)
    return np.linspace(left + margin, right - margin, count)


def verify_odibat(o: OdibatSolution, grid: Optional[TimeGrid] = None, x_samples=None,
                  t_min: float = DEFAULT_T_MIN, levels: int = 3) -> ResidualReport:
    """Residual of ``D^a u + a (u^2)_x + (u u_xx)_x = 0`` inside the support.

    Report-only: ``passed`` is ``None``. At ``alpha = 1`` the time derivative
    is the backward difference, so the residual decays like ``h``.

    Raises
    ------
    SupportError
        If any ``(x, t)`` sample, history nodes included, leaves the support.
    """
    if grid is None:
        grid = make_grid(2.0, 2.0**-10, levels)
    xs = odibat_x_samples(o, grid.T) if x_samples is None else np.asarray(x_samples, dtype=float)
    odibat_field(o, xs, grid.nodes)  # support check over the whole history
    rep = verify_pde(o, o.operator, grid, xs, alpha=o.alpha, t_min=t_min, levels=levels, tol=None,
                     target="odibat_pde")
    return ResidualReport(
        "odibat_pde", rep.grid, rep.x_samples, rep.max_residual, rep.l2_residual, rep.est_order,
        notes=f"a={o.a}, c={o.c}, alpha={o.alpha.value}; report only",
        levels=rep.levels,
    )


__all__ = [
    "ResidualReport", "SeparatedField", "TARGETS", "estimate_order", "time_derivative", "nested_grids",
    "make_grid", "verify_similarity", "verify_quintic_system", "verify_pde", "verify_odibat",
    "odibat_x_samples",
]
