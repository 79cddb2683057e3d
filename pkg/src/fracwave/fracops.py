r"""Fractional-calculus primitives.

Gamma function, Riemann-Liouville integral and Caputo derivative, both in
exact form on power functions and as discrete schemes on uniform grids.

The discrete operators work on samples ``f(t_j)``, ``t_j = t0 + j*h``:

* :func:`rl_integral_num` uses product integration: ``f`` is replaced by its
  piecewise-linear interpolant and the kernel :math:`(t - \tau)^{\gamma - 1}`
  is integrated exactly on every panel.
* :func:`caputo_l1` is the L1 scheme, :math:`O(h^{2-\alpha})` for
  :math:`C^2` functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, PoleError

POLE_TOL = 1e-12
INTEGER_TOL = 1e-12

# Lanczos approximation (13 terms, g ~ 6.0247) in rational form, exp(g) scaled:
# Gamma(x) = num(x)/den(x) * (x + g - 1/2)**(x - 1/2) * exp(1/2 - x).
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_NUM = (
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
)
# x (x+1) ... (x+11), highest power first
_LANCZOS_DEN = (1, 66, 1925, 32670, 357423, 2637558, 13339535, 45995730,
                105258076, 150917976, 120543840, 39916800, 0)


@dataclass(frozen=True)
class Order:
    """A positive fractional order."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v <= 0.0:
            raise DomainError(f"order must be a positive finite real, got {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def is_integer(self) -> bool:
        return abs(self.value - round(self.value)) < INTEGER_TOL

    @property
    def near_half(self) -> bool:
        return abs(self.value - 0.5) < INTEGER_TOL

    def __float__(self) -> float:
        return self.value


OrderLike = Union[Order, float, int]


def as_order(value: OrderLike) -> Order:
    return value if isinstance(value, Order) else Order(value)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t0, t0 + h, ..., t0 + n*h``."""

    t0: float
    h: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.t0) and self.t0 >= 0.0):
            raise DomainError(f"t0 must be finite and >= 0, got {self.t0}")
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise DomainError(f"step must be positive, got {self.h}")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"number of steps must be a non-negative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def span(cls, T: float, h: float, t0: float = 0.0) -> "TimeGrid":
        """Grid from ``t0`` to (approximately) ``T`` with step ``h``."""
        if T <= t0:
            raise DomainError(f"empty window [{t0}, {T}]")
        return cls(t0, h, int(round((T - t0) / h)))

    @property
    def nodes(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n + 1, dtype=float)

    @property
    def T(self) -> float:
        return self.t0 + self.n * self.h

    def refine(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t0, self.h / factor, self.n * factor)


@dataclass(frozen=True)
class PowerTerm:
    """The power function ``coeff * t**exponent``."""

    coeff: float
    exponent: float

    def __call__(self, t):
        return self.coeff * np.power(t, self.exponent)


def _sinpi(x: float) -> float:
    """sin(pi*x) with the argument reduced before scaling by pi."""
    k = round(x)
    s = math.sin(math.pi * (x - k))
    return -s if k % 2 else s


def _nearest_pole(x: float) -> bool:
    k = round(x)
    return k <= 0 and abs(x - k) < POLE_TOL


def gamma_fn(x: float) -> float:
    """Euler Gamma function of a real argument.

    Lanczos approximation for ``x >= 0.5``, reflection formula below.

    Raises
    ------
    PoleError
        If ``x`` is within ``1e-12`` of a non-positive integer.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma_fn needs a finite argument, got {x}")
    if _nearest_pole(x):
        raise PoleError(f"Gamma has a pole at {round(x)} (argument {x!r})")
    if x.is_integer() and 0 < x <= 171:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma_fn(1.0 - x))
    num = den = 0.0
    for cn, cd in zip(_LANCZOS_NUM, _LANCZOS_DEN):
        num = num * x + cn
        den = den * x + cd
    shift = _LANCZOS_G - 0.5
    t = x + shift
    # exact rounding error of t (TwoSum); without it the power loses ~x ulps
    tx = t - shift
    d = (x - tx) + (shift - (t - tx))
    corr = math.exp((x - 0.5) * math.log1p(d / t))
    # split the power so that it overflows only when the result does
    half = t ** (0.5 * x - 0.25)
    return num / den * half * (half * math.exp(0.5 - x)) * corr


def rgamma(x: float) -> float:
    """Reciprocal Gamma function; zero at the poles of Gamma."""
    x = float(x)
    if _nearest_pole(x):
        return 0.0
    if x > 170.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / gamma_fn(x)


def rl_integral_power(term: PowerTerm, gamma: OrderLike) -> PowerTerm:
    """Exact Riemann-Liouville integral of ``coeff * t**delta`` (``delta > -1``)."""
    g = as_order(gamma).value
    d = term.exponent
    if not d > -1.0:
        raise DomainError(f"RL integral of t**{d} diverges (need exponent > -1)")
    return PowerTerm(term.coeff * gamma_fn(d + 1.0) / gamma_fn(d + g + 1.0), d + g)


def caputo_power(term: PowerTerm, gamma: OrderLike) -> PowerTerm:
    """Exact Caputo derivative of ``coeff * t**delta``.

    Uses ``Gamma(delta+1)/Gamma(delta-gamma+1) * t**(delta-gamma)`` for
    ``delta`` in (-1, 0) or (0, inf). When ``delta - gamma + 1`` is a pole of
    Gamma the coefficient is zero (``1/Gamma`` vanishes there). Non-negative
    integer exponents below ``ceil(gamma)``, constants included, are
    annihilated outright.
    """
    g = as_order(gamma).value
    d = float(term.exponent)
    if not d > -1.0:
        raise DomainError(f"Caputo power rule needs exponent in (-1, 0) U (0, inf), got {d}")
    if abs(d - round(d)) < INTEGER_TOL and round(d) < math.ceil(g - INTEGER_TOL):
        return PowerTerm(0.0, 0.0)
    return PowerTerm(term.coeff * gamma_fn(d + 1.0) * rgamma(d - g + 1.0), d - g)


def _check_samples(values, grid: TimeGrid) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    if f.ndim != 1 or f.shape[0] != grid.n + 1:
        raise DomainError(f"expected {grid.n + 1} samples on the grid, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise DomainError("samples must be finite")
    return f


def rl_integral_num(values: Sequence[float], gamma: OrderLike, grid: TimeGrid) -> np.ndarray:
    """Riemann-Liouville integral of sampled data, lower terminal ``grid.t0``.

    Product trapezoidal rule. The result at node ``n`` is

    ``h**g / Gamma(g+2) * (a0n*f0 + sum_{j=1..n} w_{n-j} f_j)``

    with ``w_0 = 1``, ``w_k = (k+1)**(g+1) - 2 k**(g+1) + (k-1)**(g+1)`` and
    ``a0n = (n-1)**(g+1) - (n-1-g) n**g``. Exact for linear ``f``.
    """
    g = as_order(gamma).value
    f = _check_samples(values, grid)
    N = grid.n
    out = np.zeros(N + 1)
    if N == 0:
        return out
    k = np.arange(N, dtype=float)
    p = g + 1.0
    w = np.empty(N)
    w[0] = 1.0
    if N > 1:
        kk = k[1:]
        w[1:] = (kk + 1.0) ** p - 2.0 * kk**p + (kk - 1.0) ** p
    n = np.arange(1, N + 1, dtype=float)
    a0 = (n - 1.0) ** p - (n - 1.0 - g) * n**g
    conv = np.convolve(w, f[1:])[:N]
    out[1:] = (grid.h**g * rgamma(g + 2.0)) * (a0 * f[0] + conv)
    return out


def l1_weights(alpha: float, count: int) -> np.ndarray:
    """L1 weights ``b_j = (j+1)**(1-alpha) - j**(1-alpha)``, ``j = 0..count-1``."""
    j = np.arange(count + 1, dtype=float) ** (1.0 - alpha)
    return np.diff(j)


def caputo_l1(values: Sequence[float], alpha: OrderLike, grid: TimeGrid) -> np.ndarray:
    """L1 approximation of the Caputo derivative of order ``alpha`` in (0, 1).

    The grid must start at 0. The value at ``t = 0`` is returned as 0.
    """
    a = as_order(alpha).value
    if not 0.0 < a < 1.0:
        raise DomainError(f"L1 scheme needs alpha in (0, 1), got {a}")
    if grid.t0 != 0.0:
        raise DomainError("the Caputo derivative is taken from t = 0; grid must start there")
    if grid.n < 2:
        raise DomainError("L1 scheme needs at least two steps")
    f = _check_samples(values, grid)
    d = np.diff(f)
    b = l1_weights(a, grid.n)
    out = np.zeros(grid.n + 1)
    out[1:] = np.convolve(b, d)[: grid.n] * (grid.h ** (-a) * rgamma(2.0 - a))
    return out


@dataclass(frozen=True)
class InversionReport:
    """Max-norm discrepancies of ``D J f = f`` and ``J D f = f - f(0)``."""

    gamma: float
    h: float
    dj_max: float
    jd_max: float


def inversion_check(values: Sequence[float], gamma: OrderLike, grid: TimeGrid,
                    skip: int = 1) -> InversionReport:
    """Check both inversion identities on sampled ``f``, ignoring the first ``skip`` nodes."""
    g = as_order(gamma).value
    if not 0.0 < g < 1.0:
        raise DomainError(f"inversion check implemented for gamma in (0, 1), got {g}")
    f = _check_samples(values, grid)
    dj = caputo_l1(rl_integral_num(f, g, grid), g, grid)
    jd = rl_integral_num(caputo_l1(f, g, grid), g, grid)
    sl = slice(skip, None)
    return InversionReport(
        gamma=g,
        h=grid.h,
        dj_max=float(np.max(np.abs(dj[sl] - f[sl]))),
        jd_max=float(np.max(np.abs(jd[sl] - (f[sl] - f[0])))),
    )
