"""Exact closure computations for nonlinear operators on finite function bases.

A function in the span of a :class:`Basis` is written ``u = sum_i C_i f_i(x)``.
Applying a :class:`KOperator` to it produces a function in an *extended*
basis (higher polynomial degree, or higher harmonics ``cos(k w x)``,
``sin(k w x)``); the coefficients there are polynomials in the ``C_i``. If every
coefficient outside the original span vanishes identically the basis is
invariant and the in-span coefficients are the closure map ``Phi``.

Arithmetic is exact over :class:`fractions.Fraction` when the inputs are
rational; floating-point inputs fall back to a zero test with tolerance
``ZERO_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, NotInvariantError

ZERO_TOL = 1e-10
MAX_EXTENT = 64
MAX_POWER = 6

Number = Union[Fraction, float]


def exact(x) -> Number:
    """Coerce to ``Fraction`` when the value is a short rational, else ``float``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"coefficient must be finite, got {x}")
    f = Fraction(x)
    return f if f.denominator <= 2**20 else x


def _is_zero(c: Number, tol: float = ZERO_TOL) -> bool:
    return c == 0 if isinstance(c, Fraction) else abs(c) <= tol


class Poly:
    """Sparse multivariate polynomial in ``C_1..C_n``.

    Terms map exponent tuples to coefficients. Instances are treated as
    immutable.
    """

    __slots__ = ("names", "terms")

    def __init__(self, names: Sequence[str], terms: Optional[Mapping[Tuple[int, ...], Number]] = None):
        self.names = tuple(names)
        self.terms: Dict[Tuple[int, ...], Number] = {}
        for mono, c in (terms or {}).items():
            if c != 0:
                self.terms[mono] = c

    @classmethod
    def const(cls, names: Sequence[str], c) -> "Poly":
        return cls(names, {(0,) * len(names): exact(c)})

    @classmethod
    def var(cls, names: Sequence[str], i: int) -> "Poly":
        mono = tuple(1 if j == i else 0 for j in range(len(names)))
        return cls(names, {mono: Fraction(1)})

    def _lift(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly.const(self.names, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0) + c
        return Poly(self.names, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.names, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = exact(other)
            return Poly(self.names, {m: v * c for m, v in self.terms.items()})
        out: Dict[Tuple[int, ...], Number] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(self.names, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = self._lift(other)
        return (self - other).is_zero(tol=0.0)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return all(_is_zero(c, tol) for c in self.terms.values())

    def chop(self, tol: float = ZERO_TOL) -> "Poly":
        """Drop floating-point coefficients below ``tol``."""
        return Poly(self.names, {m: c for m, c in self.terms.items() if not _is_zero(c, tol)})

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def is_homogeneous(self, k: int) -> bool:
        return all(sum(m) == k for m in self.terms)

    def constant(self) -> Number:
        return self.terms.get((0,) * len(self.names), Fraction(0))

    def __call__(self, values):
        """Evaluate at ``values`` (numbers or equally shaped numpy arrays)."""
        if len(values) != len(self.names):
            raise DomainError(f"expected {len(self.names)} values, got {len(values)}")
        inexact = any(isinstance(v, (float, np.ndarray)) for v in values)
        total = 0
        for mono, c in self.terms.items():
            term = float(c) if inexact else c
            for v, e in zip(values, mono):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def coefficient(self, *exponents: int) -> Number:
        return self.terms.get(tuple(exponents), Fraction(0))

    def proportional_to(self, other: "Poly", tol: float = ZERO_TOL) -> Optional[Number]:
        """Return ``c`` with ``self == c * other``, or None when not proportional."""
        if other.is_zero(tol=0.0):
            return None
        if set(self.terms) - set(other.terms):
            return None
        mono0 = next(iter(other.terms))
        c = self.terms.get(mono0, 0) / other.terms[mono0]
        return c if (self - other * c).is_zero(tol) else None

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (-sum(m), [-e for e in m])):
            c = self.terms[mono]
            factors = []
            for name, e in zip(self.names, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            neg = c < 0
            mag = -c if neg else c
            cs = str(mag) if isinstance(mag, Fraction) else repr(mag)
            if factors and mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([cs] + factors)
            parts.append(("- " if neg else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


def quadratic_matrix(form: Poly):
    """Symmetric matrix ``Q`` with ``form(C) == C^T Q C`` for a quadratic form."""
    if not form.is_homogeneous(2):
        raise DomainError("not a homogeneous quadratic form")
    n = len(form.names)
    Q = [[Fraction(0)] * n for _ in range(n)]
    for mono, c in form.terms.items():
        idx = [i for i, e in enumerate(mono) for _ in range(e)]
        i, j = idx
        if i == j:
            Q[i][i] += c
        else:
            Q[i][j] += c / 2
            Q[j][i] += c / 2
    return Q


# Keys of the extended basis: an int degree for monomials; (k, "c" | "s") for
# cos(k w x)/sin(k w x) (trig) or cosh/sinh (hyperbolic).
Key = Union[int, Tuple[int, str]]

KINDS = ("monomial", "trig", "hyperbolic")


@dataclass(frozen=True)
class Basis:
    """Monomials ``1..x^d``, or ``1, cos(w x), sin(w x)`` / ``1, cosh(w x), sinh(w x)``."""

    kind: str
    degree: int = 3
    omega: Number = Fraction(1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown basis kind {self.kind!r}")
        if self.kind == "monomial":
            if int(self.degree) != self.degree or self.degree < 0:
                raise DomainError(f"degree must be a non-negative integer, got {self.degree}")
        else:
            w = exact(self.omega)
            if not w > 0:
                raise DomainError(f"frequency must be positive, got {self.omega}")
            object.__setattr__(self, "omega", w)

    @classmethod
    def monomial(cls, degree: int) -> "Basis":
        return cls("monomial", degree=degree)

    @classmethod
    def trig(cls, omega=1) -> "Basis":
        return cls("trig", omega=exact(omega))

    @classmethod
    def hyperbolic(cls, omega=Fraction(1, 2)) -> "Basis":
        return cls("hyperbolic", omega=exact(omega))

    @property
    def keys(self) -> Tuple[Key, ...]:
        if self.kind == "monomial":
            return tuple(range(self.degree + 1))
        return ((0, "c"), (1, "c"), (1, "s"))

    @property
    def dim(self) -> int:
        return len(self.keys)

    @property
    def var_names(self) -> Tuple[str, ...]:
        if self.kind == "monomial":
            return tuple(f"C{i}" for i in range(self.dim))
        return ("C1", "C2", "C3")

    def symbols(self) -> Tuple[Poly, ...]:
        return tuple(Poly.var(self.var_names, i) for i in range(self.dim))

    def element_name(self, key: Key) -> str:
        if self.kind == "monomial":
            return "1" if key == 0 else ("x" if key == 1 else f"x^{key}")
        k, part = key
        if k == 0:
            return "1"
        fn = {"trig": ("cos", "sin"), "hyperbolic": ("cosh", "sinh")}[self.kind][part == "s"]
        freq = k * self.omega
        arg = "x" if freq == 1 else f"{freq}x" if isinstance(freq, Fraction) and freq.denominator == 1 else f"({freq})x"
        return f"{fn}({arg})"

    @property
    def elements(self) -> Tuple[str, ...]:
        return tuple(self.element_name(k) for k in self.keys)

    def element_values(self, key: Key, x):
        """Numeric values of one extended-basis element at ``x``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "monomial":
            return x**key
        k, part = key
        arg = float(k * self.omega) * x
        if self.kind == "trig":
            return np.cos(arg) if part == "c" else np.sin(arg)
        return np.cosh(arg) if part == "c" else np.sinh(arg)

    def to_record(self) -> dict:
        rec = {"kind": self.kind}
        if self.kind == "monomial":
            rec["degree"] = self.degree
        else:
            rec["omega"] = str(self.omega) if isinstance(self.omega, Fraction) else self.omega
        return rec


@dataclass
class Expansion:
    """A function ``sum_key coeffs[key] * element(key)`` in the extended basis of ``basis``."""

    basis: Basis
    coeffs: Dict[Key, Poly] = field(default_factory=dict)

    def _new(self, coeffs) -> "Expansion":
        return Expansion(self.basis, {k: v for k, v in coeffs.items() if not v.is_zero(tol=0.0)})

    @property
    def names(self):
        return self.basis.var_names

    def extent(self) -> int:
        if not self.coeffs:
            return 0
        return max(k if isinstance(k, int) else k[0] for k in self.coeffs)

    def __add__(self, other: "Expansion") -> "Expansion":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return self._new(out)

    def scale(self, c) -> "Expansion":
        c = exact(c) if not isinstance(c, Poly) else c
        return self._new({k: v * c for k, v in self.coeffs.items()})

    def __mul__(self, other: "Expansion") -> "Expansion":
        out: Dict[Key, Poly] = {}

        def acc(key, val):
            out[key] = out[key] + val if key in out else val

        if self.basis.kind == "monomial":
            for i, a in self.coeffs.items():
                for j, b in other.coeffs.items():
                    acc(i + j, a * b)
        else:
            hyp = self.basis.kind == "hyperbolic"
            half = Fraction(1, 2)
            for (j, pj), a in self.coeffs.items():
                for (k, pk), b in other.coeffs.items():
                    ab = a * b * half
                    s, d = j + k, abs(j - k)
                    # sign of the odd function at the difference frequency
                    sd = 1 if j >= k else -1
                    if pj == "c" and pk == "c":
                        acc((s, "c"), ab)
                        acc((d, "c"), ab)
                    elif pj == "s" and pk == "s":
                        if hyp:  # sinh sinh = (cosh(s) - cosh(d)) / 2
                            acc((s, "c"), ab)
                            acc((d, "c"), -ab)
                        else:  # sin sin = (cos(d) - cos(s)) / 2
                            acc((d, "c"), ab)
                            acc((s, "c"), -ab)
                    else:
                        # sin(j) cos(k) = (sin(s) + sin(j - k)) / 2, same for sinh cosh
                        sj = sd if pj == "s" else -sd
                        acc((s, "s"), ab)
                        if d:
                            acc((d, "s"), ab * sj)
        res = self._new(out)
        if res.extent() > MAX_EXTENT:
            raise OverflowError(f"extended basis exceeds degree/frequency {MAX_EXTENT}")
        return res

    def power(self, k: int) -> "Expansion":
        if k < 1:
            raise DomainError(f"power must be a positive integer, got {k}")
        result = self
        for _ in range(k - 1):
            result = result * self
        return result

    def diff(self, order: int = 1) -> "Expansion":
        cur = self
        for _ in range(order):
            out: Dict[Key, Poly] = {}
            if self.basis.kind == "monomial":
                for i, a in cur.coeffs.items():
                    if i:
                        out[i - 1] = a * i
            else:
                hyp = self.basis.kind == "hyperbolic"
                for (k, part), a in cur.coeffs.items():
                    if k == 0:
                        continue
                    w = self.basis.omega * k
                    if part == "c":
                        key, val = (k, "s"), (a * w if hyp else a * (-w))
                    else:
                        key, val = (k, "c"), a * w
                    out[key] = out[key] + val if key in out else val
            cur = cur._new(out)
        return cur

    def split(self, tol: float = ZERO_TOL):
        """Return ``(in-span coefficients in basis order, out-of-span {key: Poly})``."""
        zero = Poly(self.names)
        inside = tuple(self.coeffs.get(k, zero) for k in self.basis.keys)
        outside = {k: v for k, v in self.coeffs.items() if k not in self.basis.keys and not v.is_zero(tol)}
        return inside, outside

    def evaluate(self, x, values=None):
        """Numeric value at ``x``; ``values`` substitutes the symbolic coefficients.

        With array-valued ``values`` (e.g. coefficients sampled in time) the
        result has shape ``values_shape + x_shape``.
        """
        total = 0.0
        for key, poly in self.coeffs.items():
            if values is None:
                if not poly.is_homogeneous(0):
                    raise DomainError("symbolic coefficients need values")
                c = poly.constant()
            else:
                c = poly(values)
            total = total + np.multiply.outer(np.asarray(c, dtype=float), self.basis.element_values(key, x))
        return total


def from_coefficients(basis: Basis, coeffs: Optional[Sequence] = None) -> Expansion:
    """Expansion of ``sum_i coeffs[i] f_i``; symbolic ``C_i`` when ``coeffs`` is None."""
    names = basis.var_names
    if coeffs is None:
        polys = basis.symbols()
    else:
        if len(coeffs) != basis.dim:
            raise DomainError(f"basis has {basis.dim} elements, got {len(coeffs)} coefficients")
        polys = tuple(c if isinstance(c, Poly) else Poly.const(names, c) for c in coeffs)
    return Expansion(basis)._new(dict(zip(basis.keys, polys)))


PARAMS = ("nu", "beta", "gamma_c", "flux")


@dataclass(frozen=True)
class KOperator:
    """``nu d5(u^p) + beta d3(u^n) + gamma_c d1(u^m) + flux d1(u * d2 u)``.

    ``flux`` is zero for the K family proper; it carries the extra
    ``d/dx(u u_xx)`` term of the KdV variant with compacton solutions.
    """

    nu: Number = 0
    beta: Number = 0
    gamma_c: Number = 0
    p: int = 2
    n: int = 2
    m: int = 2
    flux: Number = 0

    def __post_init__(self):
        for name in PARAMS:
            object.__setattr__(self, name, exact(getattr(self, name)))
        for name in ("p", "n", "m"):
            v = getattr(self, name)
            if int(v) != v or not 1 <= v <= MAX_POWER:
                raise DomainError(f"power {name} must be an integer in [1, {MAX_POWER}], got {v}")
            object.__setattr__(self, name, int(v))

    @classmethod
    def third_order(cls) -> "KOperator":
        """``d3(u^2 / 2)``."""
        return cls(nu=0, beta=Fraction(1, 2), gamma_c=0, n=2)

    @classmethod
    def quintic(cls, nu, beta, gamma_c) -> "KOperator":
        return cls(nu=nu, beta=beta, gamma_c=gamma_c, p=2, n=2, m=2)

    @classmethod
    def odibat(cls, a) -> "KOperator":
        """Right-hand side of ``D^a u + a d1(u^2) + d1(u u_xx) = 0``."""
        return cls(gamma_c=-exact(a), m=2, flux=-1)

    @property
    def is_zero(self) -> bool:
        return all(getattr(self, k) == 0 for k in PARAMS)

    def coefficient(self, name: str) -> Number:
        return getattr(self, name)

    def to_record(self) -> dict:
        rec = {}
        for k in ("nu", "beta", "gamma_c", "p", "n", "m", "flux"):
            v = getattr(self, k)
            rec[k] = str(v) if isinstance(v, Fraction) else v
        return rec

    @classmethod
    def from_record(cls, rec: Mapping) -> "KOperator":
        return cls(**{k: rec[k] for k in ("nu", "beta", "gamma_c", "p", "n", "m", "flux") if k in rec})


def _term_expansions(op: KOperator, u: Expansion, names: Iterable[str]) -> Dict[str, Expansion]:
    out = {}
    for name in names:
        if name == "nu":
            out[name] = u.power(op.p).diff(5)
        elif name == "beta":
            out[name] = u.power(op.n).diff(3)
        elif name == "gamma_c":
            out[name] = u.power(op.m).diff(1)
        else:
            out[name] = (u * u.diff(2)).diff(1)
    return out


def _family(op: KOperator) -> Tuple[str, ...]:
    return PARAMS if op.flux != 0 else PARAMS[:3]


def expand_power(basis: Basis, coeffs: Optional[Sequence], k: int) -> Expansion:
    """Exact expansion of ``(sum_i C_i f_i)**k`` in the extended basis."""
    return from_coefficients(basis, coeffs).power(k)


def apply_operator(op: KOperator, basis: Basis, coeffs: Optional[Sequence] = None) -> Expansion:
    """Exact expansion of ``F[sum_i C_i f_i]``; symbolic ``C_i`` when ``coeffs`` is None."""
    u = from_coefficients(basis, coeffs)
    active = [k for k in _family(op) if op.coefficient(k) != 0]
    total = Expansion(basis, {})
    for name, term in _term_expansions(op, u, active).items():
        total = total + term.scale(op.coefficient(name))
    return total


@dataclass(frozen=True)
class LinearCondition:
    """``sum coeffs[param] * param == 0`` over operator coefficients."""

    coeffs: Tuple[Tuple[str, Number], ...]

    def as_dict(self) -> Dict[str, Number]:
        return dict(self.coeffs)

    def value(self, op: KOperator) -> Number:
        return sum((c * op.coefficient(k) for k, c in self.coeffs), Fraction(0))

    def holds(self, op: KOperator, tol: float = 1e-12) -> bool:
        return _is_zero(self.value(op), tol)

    def __str__(self):
        label = {"nu": "nu", "beta": "beta", "gamma_c": "gamma", "flux": "flux"}
        parts = []
        for k, c in self.coeffs:
            if c == 0:
                continue
            mag = abs(c)
            cs = "" if mag == 1 else (f"{mag}*" if isinstance(mag, Fraction) else f"{mag!r}*")
            parts.append(("- " if c < 0 else "+ ") + cs + label[k])
        text = " ".join(parts)
        text = text[2:] if text.startswith("+ ") else "-" + text[2:]
        return f"{text} = 0"


def _normalize(vec: Dict[str, Number]) -> Tuple[Tuple[str, Number], ...]:
    vals = list(vec.values())
    if all(isinstance(v, Fraction) for v in vals):
        den = math.lcm(*(v.denominator for v in vals))
        ints = [int(v * den) for v in vals]
        g = math.gcd(*ints)
        ints = [i // g for i in ints]
        lead = next(i for i in ints if i)
        scaled = [Fraction(i if lead > 0 else -i) for i in ints]
    else:
        lead = next(float(v) for v in vals if v != 0)
        scaled = [float(v) / lead for v in vals]
    return tuple(zip(vec.keys(), scaled))


@dataclass
class ClosureReport:
    """Outcome of an invariance check.

    ``phi`` holds the closure forms (one per basis element) when the operator
    leaves the basis invariant. ``conditions`` are linear constraints on the
    operator coefficients that make the out-of-span remainder vanish for all
    ``C``; they describe the operator family and are reported whether or not
    this particular operator satisfies them.
    """

    operator: KOperator
    basis: Basis
    invariant: bool
    phi: Optional[Tuple[Poly, ...]]
    residual_terms: Tuple[Tuple[str, Poly], ...]
    conditions: Optional[Tuple[LinearCondition, ...]]

    @property
    def condition(self) -> Optional[LinearCondition]:
        if self.conditions and len(self.conditions) == 1:
            return self.conditions[0]
        return None

    def phi_matrices(self):
        if self.phi is None:
            return None
        return [quadratic_matrix(f) if not f.is_zero(tol=0.0) else None for f in self.phi]

    def to_record(self) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else v

        return {
            "operator": self.operator.to_record(),
            "basis": self.basis.to_record(),
            "elements": list(self.basis.elements),
            "invariant": self.invariant,
            "phi": [str(f) for f in self.phi] if self.phi is not None else None,
            "residual_terms": [[name, str(p)] for name, p in self.residual_terms],
            "conditions": None if self.conditions is None else [
                {"text": str(c), "coefficients": {k: num(v) for k, v in c.coeffs}} for c in self.conditions
            ],
        }

    def __str__(self):
        lines = [f"basis: {', '.join(self.basis.elements)}",
                 f"invariant: {'yes' if self.invariant else 'no'}"]
        if self.phi is not None:
            for name, form in zip(self.basis.elements, self.phi):
                lines.append(f"  Phi[{name}] = {form}")
        for name, form in self.residual_terms:
            lines.append(f"  remainder[{name}] = {form}")
        if self.conditions:
            for c in self.conditions:
                lines.append(f"condition: {c}  (value at this operator: {c.value(self.operator)})")
        elif self.conditions is None:
            lines.append("condition: none linear in the operator coefficients")
        return "\n".join(lines)


def check_invariance(op: KOperator, basis: Basis, tol: float = ZERO_TOL) -> ClosureReport:
    """Project ``F[sum C_i f_i]`` onto ``basis`` and report closure or its obstruction."""
    u = from_coefficients(basis)
    family = _family(op)
    terms = _term_expansions(op, u, family)
    total = Expansion(basis, {})
    for name in family:
        total = total + terms[name].scale(op.coefficient(name))
    inside, outside = total.split(tol)
    invariant = not outside

    zero = Poly(basis.var_names)
    conditions = []
    feasible = True
    out_keys = set()
    for name in family:
        out_keys |= {k for k in terms[name].coeffs if k not in basis.keys}
    for key in sorted(out_keys, key=str):
        polys = {name: terms[name].coeffs.get(key, zero) for name in family}
        ref = next((p for p in polys.values() if not p.is_zero(tol)), None)
        if ref is None:
            continue
        vec = {}
        for name, p in polys.items():
            c = Fraction(0) if p.is_zero(tol) else p.proportional_to(ref, tol)
            if c is None:
                feasible = False
                break
            vec[name] = exact(c) if not isinstance(c, Fraction) else c
        if not feasible:
            break
        cond = LinearCondition(_normalize(vec))
        if cond not in conditions:
            conditions.append(cond)

    return ClosureReport(
        operator=op,
        basis=basis,
        invariant=invariant,
        phi=tuple(p.chop(tol) for p in inside) if invariant else None,
        residual_terms=tuple((basis.element_name(k), p) for k, p in sorted(outside.items(), key=lambda kv: str(kv[0]))),
        conditions=tuple(conditions) if feasible else None,
    )


def reduce_to_system(op: KOperator, basis: Basis, tol: float = ZERO_TOL) -> Tuple[Poly, ...]:
    """Right-hand sides ``Phi_i`` of the ODE system ``D^a g_i = Phi_i(g)``.

    Raises
    ------
    NotInvariantError
        If the basis is not invariant under ``op``.
    """
    report = check_invariance(op, basis, tol)
    if not report.invariant:
        detail = f"; requires {report.condition}" if report.condition else ""
        raise NotInvariantError(f"{', '.join(basis.elements)} is not invariant under this operator{detail}")
    return report.phi
