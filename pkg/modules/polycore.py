"""
Sparse multivariate polynomials over C.

Two coefficient modes live side by side:

  - ``exact``: Gaussian rationals (pairs of ``fractions.Fraction``), used for
    every identity check; arithmetic never leaves the mode.
  - ``float``: double-precision ``complex``, used for approximation work.

Terms are kept in graded-lexicographic order (ascending), so the last term is
the leading term, serialisation is canonical and float evaluation is
reproducible bit-for-bit.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

DEFAULT_DEGREE_CAP = 512

# Above this total degree an exact polynomial with anchors is evaluated on grids through an
# exactly re-centred expansion instead of its monomial coefficients.
STABLE_EVAL_DEGREE = 1

FLOAT_DROP_TOL = 1e-13


class PolyError(ValueError):
    pass


class DimensionMismatchError(PolyError):
    pass


class DegreeOverflowError(ArithmeticError):
    def __init__(self, degree: int, cap: int):
        super().__init__(f"total degree {degree} exceeds the cap {cap}")
        self.degree = degree
        self.cap = cap


class NonDivisibleError(PolyError):
    def __init__(self, remainder: "SparsePoly"):
        super().__init__(f"division is not exact; remainder witness has {len(remainder.terms)} terms")
        self.remainder = remainder


# === Gaussian rationals ===

def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


@dataclass(frozen=True, slots=True)
class GaussianRational:
    """Exact complex number re + i*im with rational parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, (np.complexfloating,)):
            return cls(Fraction(float(value.real)), Fraction(float(value.imag)))
        if isinstance(value, (np.floating, np.integer)):
            return cls(Fraction(value.item()))
        return cls(_frac(value))

    def __add__(self, other):
        o = _gr_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _gr_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _gr_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _gr_or_none(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussianRational(self.re * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _gr_or_none(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by exact zero")
        if not o.im:
            return GaussianRational(self.re / o.re, self.im / o.re)
        den = o.re * o.re + o.im * o.im
        num = self * o.conjugate()
        return GaussianRational(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = _gr_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        result = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = _gr_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __repr__(self):
        if not self.im:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def _gr_or_none(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return GaussianRational(value)
    return None


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)

Coef = Union[GaussianRational, complex]
Exponent = tuple


def ratio_string(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _is_exact_scalar(value) -> bool:
    return isinstance(value, (GaussianRational, Fraction, int)) and not isinstance(value, bool)


def to_coef(value, mode: str) -> Coef:
    if mode == EXACT:
        return GaussianRational.coerce(value)
    if isinstance(value, GaussianRational):
        return complex(value)
    return complex(value)


def _coef_is_zero(c: Coef, mode: str) -> bool:
    if mode == EXACT:
        return not c
    return c == 0


def _grlex_key(exp: Exponent):
    return (sum(exp), exp)


# === SparsePoly ===

@dataclass(frozen=True)
class SparsePoly:
    """
    Immutable sparse polynomial in ``nvars`` variables.

    ``terms`` is a tuple of (exponent tuple, coefficient) in ascending grlex
    order with no zero coefficient. ``anchors`` are evaluation centres (points
    in C^nvars) near which the polynomial is meant to be accurate; they are
    metadata and take no part in equality.
    """

    nvars: int
    terms: tuple
    mode: str = EXACT
    anchors: tuple = field(default=(), compare=False, repr=False)

    # --- construction ---

    @classmethod
    def from_terms(cls, nvars: int, mapping: Mapping | Iterable, mode: str = EXACT, anchors=()) -> "SparsePoly":
        if mode not in MODES:
            raise PolyError(f"unknown coefficient mode {mode!r}")
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        acc: dict = {}
        for exp, value in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise DimensionMismatchError(f"exponent {exp} does not have length {nvars}")
            if any(e < 0 for e in exp):
                raise PolyError(f"negative exponent in {exp}")
            c = to_coef(value, mode)
            acc[exp] = acc[exp] + c if exp in acc else c
        return cls._normalized(nvars, acc, mode, anchors)

    @classmethod
    def _normalized(cls, nvars: int, acc: dict, mode: str, anchors=()) -> "SparsePoly":
        if mode == FLOAT:
            items = [(e, c) for e, c in acc.items() if c != 0]
        else:
            items = [(e, c) for e, c in acc.items() if c]
        items.sort(key=lambda item: _grlex_key(item[0]))
        return cls(nvars, tuple(items), mode, tuple(anchors))

    @classmethod
    def zero(cls, nvars: int, mode: str = EXACT) -> "SparsePoly":
        return cls(nvars, (), mode)

    @classmethod
    def constant(cls, value, nvars: int, mode: str = EXACT) -> "SparsePoly":
        return cls.from_terms(nvars, {(0,) * nvars: value}, mode)

    @classmethod
    def one(cls, nvars: int, mode: str = EXACT) -> "SparsePoly":
        return cls.constant(1, nvars, mode)

    @classmethod
    def variable(cls, index: int, nvars: int, mode: str = EXACT) -> "SparsePoly":
        if not 0 <= index < nvars:
            raise DimensionMismatchError(f"variable index {index} out of range for {nvars} variables")
        exp = tuple(1 if i == index else 0 for i in range(nvars))
        return cls.from_terms(nvars, {exp: 1}, mode)

    @classmethod
    def univariate(cls, coeffs: Sequence, mode: str = EXACT) -> "SparsePoly":
        """coeffs[k] multiplies z**k."""
        return cls.from_terms(1, {(k,): c for k, c in enumerate(coeffs)}, mode)

    def with_anchors(self, anchors) -> "SparsePoly":
        return SparsePoly(self.nvars, self.terms, self.mode, tuple(tuple(complex(v) for v in a) for a in anchors))

    # --- inspection ---

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return sum(self.terms[-1][0]) if self.terms else -1

    def degree_in(self, var: int) -> int:
        return max((e[var] for e, _ in self.terms), default=-1)

    def is_constant(self) -> bool:
        return self.degree() <= 0

    def constant_term(self) -> Coef:
        for exp, c in self.terms:
            if not any(exp):
                return c
        return GR_ZERO if self.mode == EXACT else 0j

    def coefficient(self, exp: Exponent) -> Coef:
        exp = tuple(exp)
        for e, c in self.terms:
            if e == exp:
                return c
        return GR_ZERO if self.mode == EXACT else 0j

    def as_dict(self) -> dict:
        return dict(self.terms)

    def leading_term(self):
        return self.terms[-1]

    def to_float(self) -> "SparsePoly":
        if self.mode == FLOAT:
            return self
        return SparsePoly(self.nvars, tuple((e, complex(c)) for e, c in self.terms), FLOAT, self.anchors)

    def max_abs_coefficient(self) -> float:
        return max((abs(complex(c)) for _, c in self.terms), default=0.0)

    # --- operators ---

    def _promote(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            return other
        mode = self.mode
        if mode == EXACT and not _is_exact_scalar(other):
            mode = FLOAT
        return SparsePoly.constant(other, self.nvars, mode)

    def __add__(self, other):
        return poly_add(self, self._promote(other))

    def __radd__(self, other):
        return poly_add(self._promote(other), self)

    def __sub__(self, other):
        return poly_add(self, -self._promote(other))

    def __rsub__(self, other):
        return poly_add(self._promote(other), -self)

    def __mul__(self, other):
        return poly_mul(self, self._promote(other))

    def __rmul__(self, other):
        return poly_mul(self._promote(other), self)

    def __neg__(self):
        return SparsePoly(self.nvars, tuple((e, -c) for e, c in self.terms), self.mode, self.anchors)

    def __pow__(self, k: int):
        return poly_pow(self, k)

    def __call__(self, *x):
        return poly_eval(self, list(x))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp, c in reversed(self.terms):
            mono = "*".join(f"z{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exp) if e)
            parts.append(f"{c!r}*{mono}" if mono else f"{c!r}")
        return " + ".join(parts)

    # --- serialisation ---

    def to_json(self) -> dict:
        terms = []
        for exp, c in self.terms:
            if self.mode == EXACT:
                terms.append([list(exp), ratio_string(c.re), ratio_string(c.im)])
            else:
                terms.append([list(exp), c.real, c.imag])
        return {"nvars": self.nvars, "mode": self.mode, "terms": terms}

    @classmethod
    def from_json(cls, data: dict) -> "SparsePoly":
        try:
            nvars = int(data["nvars"])
            mode = data.get("mode", EXACT)
            mapping = []
            for exp, re, im in data["terms"]:
                if mode == EXACT:
                    mapping.append((exp, GaussianRational(_frac(str(re)), _frac(str(im)))))
                else:
                    mapping.append((exp, complex(float(re), float(im))))
        except (KeyError, TypeError, ValueError) as e:
            raise PolyError(f"malformed polynomial JSON: {e}") from e
        return cls.from_terms(nvars, mapping, mode)


def _common_mode(a: SparsePoly, b: SparsePoly) -> str:
    return EXACT if a.mode == EXACT and b.mode == EXACT else FLOAT


def _as_mode(p: SparsePoly, mode: str) -> SparsePoly:
    return p if p.mode == mode else p.to_float()


def _check_same_nvars(a: SparsePoly, b: SparsePoly):
    if a.nvars != b.nvars:
        raise DimensionMismatchError(f"polynomials in {a.nvars} and {b.nvars} variables")


# === Operations ===

def poly_add(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    _check_same_nvars(a, b)
    mode = _common_mode(a, b)
    a, b = _as_mode(a, mode), _as_mode(b, mode)
    acc = dict(a.terms)
    for exp, c in b.terms:
        acc[exp] = acc[exp] + c if exp in acc else c
    return SparsePoly._normalized(a.nvars, acc, mode, a.anchors or b.anchors)


def poly_scale(p: SparsePoly, factor) -> SparsePoly:
    mode = p.mode if (p.mode == EXACT and _is_exact_scalar(factor)) else FLOAT
    p = _as_mode(p, mode)
    f = to_coef(factor, mode)
    if _coef_is_zero(f, mode):
        return SparsePoly.zero(p.nvars, mode)
    return SparsePoly(p.nvars, tuple((e, c * f) for e, c in p.terms), mode, p.anchors)


def poly_mul(a: SparsePoly, b: SparsePoly, degree_cap: int = DEFAULT_DEGREE_CAP) -> SparsePoly:
    _check_same_nvars(a, b)
    mode = _common_mode(a, b)
    a, b = _as_mode(a, mode), _as_mode(b, mode)
    if a.is_zero() or b.is_zero():
        return SparsePoly.zero(a.nvars, mode)
    degree = a.degree() + b.degree()
    if degree > degree_cap:
        raise DegreeOverflowError(degree, degree_cap)
    acc: dict = {}
    for ea, ca in a.terms:
        for eb, cb in b.terms:
            exp = tuple(x + y for x, y in zip(ea, eb))
            prod = ca * cb
            acc[exp] = acc[exp] + prod if exp in acc else prod
    return SparsePoly._normalized(a.nvars, acc, mode)


def poly_pow(p: SparsePoly, k: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> SparsePoly:
    if k < 0:
        raise PolyError("negative powers are not polynomials")
    if k and p.degree() * k > degree_cap:
        raise DegreeOverflowError(p.degree() * k, degree_cap)
    result = SparsePoly.one(p.nvars, p.mode)
    base = p
    while k:
        if k & 1:
            result = poly_mul(result, base, degree_cap)
        k >>= 1
        if k:
            base = poly_mul(base, base, degree_cap)
    return result


def poly_compose(p: SparsePoly, args: Sequence[SparsePoly], degree_cap: int = DEFAULT_DEGREE_CAP,
                 nvars: int | None = None) -> SparsePoly:
    """
    Substitute ``args[i]`` for variable i of ``p``.

    ``nvars`` is only needed when ``p`` has no variables (then ``args`` is empty).
    """
    if len(args) != p.nvars:
        raise DimensionMismatchError(f"{len(args)} arguments for a polynomial in {p.nvars} variables")
    m = args[0].nvars if args else nvars
    if m is None:
        raise DimensionMismatchError("target variable count is unknown for a constant polynomial")
    if any(a.nvars != m for a in args):
        raise DimensionMismatchError("substituted polynomials do not share a variable count")
    mode = p.mode
    for a in args:
        if a.mode == FLOAT:
            mode = FLOAT
    p = _as_mode(p, mode)
    args = [_as_mode(a, mode) for a in args]

    degree = max((sum(e * max(a.degree(), 0) for e, a in zip(exp, args)) for exp, _ in p.terms), default=0)
    if degree > degree_cap:
        raise DegreeOverflowError(degree, degree_cap)

    powers = [[SparsePoly.one(m, mode)] for _ in args]

    def power(i: int, k: int) -> SparsePoly:
        table = powers[i]
        while len(table) <= k:
            table.append(poly_mul(table[-1], args[i], degree_cap))
        return table[k]

    acc: dict = {}
    one_exp = (0,) * m
    for exp, c in p.terms:
        term = None
        for i, e in enumerate(exp):
            if e:
                factor = power(i, e)
                term = factor if term is None else poly_mul(term, factor, degree_cap)
        if term is None:
            acc[one_exp] = acc[one_exp] + c if one_exp in acc else c
            continue
        for te, tc in term.terms:
            v = tc * c
            acc[te] = acc[te] + v if te in acc else v
    return SparsePoly._normalized(m, acc, mode)


def poly_embed(p: SparsePoly, nvars: int, positions: Sequence[int]) -> SparsePoly:
    """Re-index the variables of ``p`` as variables ``positions`` of a ring with ``nvars`` variables."""
    if len(positions) != p.nvars:
        raise DimensionMismatchError("one position per variable is required")
    mapping = []
    for exp, c in p.terms:
        new = [0] * nvars
        for pos, e in zip(positions, exp):
            new[pos] += e
        mapping.append((tuple(new), c))
    return SparsePoly.from_terms(nvars, mapping, p.mode)


def poly_derivative(p: SparsePoly, var: int) -> SparsePoly:
    if not 0 <= var < p.nvars:
        raise DimensionMismatchError(f"variable index {var} out of range for {p.nvars} variables")
    acc = {}
    for exp, c in p.terms:
        e = exp[var]
        if e:
            new = exp[:var] + (e - 1,) + exp[var + 1:]
            acc[new] = c * e
    return SparsePoly._normalized(p.nvars, acc, p.mode)


def _divides(den_exp: Exponent, exp: Exponent) -> bool:
    return all(d <= e for d, e in zip(den_exp, exp))


def poly_divide_exact(num: SparsePoly, den: SparsePoly) -> SparsePoly:
    """
    Quotient ``q`` with ``q * den == num``.

    Multivariate division by leading terms in grlex order; when ``den`` divides
    ``num`` every leading term of the running remainder is divisible by the
    leading term of ``den``. Otherwise ``NonDivisibleError`` carries the
    remainder at the point division got stuck.
    """
    _check_same_nvars(num, den)
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    mode = _common_mode(num, den)
    num, den = _as_mode(num, mode), _as_mode(den, mode)
    lead_exp, lead_c = den.leading_term()
    scale = max(num.max_abs_coefficient(), 1.0)
    remainder = dict(num.terms)
    quotient: dict = {}
    while remainder:
        exp = max(remainder, key=_grlex_key)
        c = remainder[exp]
        if mode == FLOAT and abs(c) <= FLOAT_DROP_TOL * scale:
            del remainder[exp]
            continue
        if not _divides(lead_exp, exp):
            raise NonDivisibleError(SparsePoly._normalized(num.nvars, remainder, mode))
        q_exp = tuple(e - d for e, d in zip(exp, lead_exp))
        q_c = c / lead_c
        quotient[q_exp] = quotient[q_exp] + q_c if q_exp in quotient else q_c
        for d_exp, d_c in den.terms:
            t_exp = tuple(x + y for x, y in zip(q_exp, d_exp))
            v = remainder.get(t_exp, GR_ZERO if mode == EXACT else 0j) - q_c * d_c
            if _coef_is_zero(v, mode):
                remainder.pop(t_exp, None)
            else:
                remainder[t_exp] = v
        if mode == FLOAT:
            remainder.pop(exp, None)
    return SparsePoly._normalized(num.nvars, quotient, mode)


def _horner(items: list, x: Sequence, k: int, zero):
    if k == len(x):
        acc = zero
        for _, c in items:
            acc = acc + c
        return acc
    groups: dict = {}
    for exp, c in items:
        groups.setdefault(exp[k], []).append((exp, c))
    acc = zero
    for d in range(max(groups), -1, -1):
        acc = acc * x[k]
        if d in groups:
            acc = acc + _horner(groups[d], x, k + 1, zero)
    return acc


def poly_eval(p: SparsePoly, x: Sequence):
    """
    Horner evaluation, variable by variable, in canonical term order.

    Exact when ``p`` is exact and every coordinate is an exact scalar;
    otherwise a ``complex``.
    """
    if len(x) != p.nvars:
        raise DimensionMismatchError(f"point of length {len(x)} for a polynomial in {p.nvars} variables")
    if p.mode == EXACT and all(_is_exact_scalar(v) for v in x):
        point = [GaussianRational.coerce(v) for v in x]
        if not p.terms:
            return GR_ZERO
        return _horner(list(p.terms), point, 0, GR_ZERO)
    point = [complex(v) for v in x]
    if not p.terms:
        return 0j
    return _horner([(e, complex(c)) for e, c in p.terms], point, 0, 0j)


def _horner_grid(items: list, x: np.ndarray, k: int) -> np.ndarray:
    if k == x.shape[1]:
        return np.full(x.shape[0], sum(c for _, c in items), dtype=complex)
    groups: dict = {}
    for exp, c in items:
        groups.setdefault(exp[k], []).append((exp, c))
    acc = np.zeros(x.shape[0], dtype=complex)
    col = x[:, k]
    for d in range(max(groups), -1, -1):
        acc = acc * col
        if d in groups:
            acc = acc + _horner_grid(groups[d], x, k + 1)
    return acc


def _center_key(center) -> tuple:
    return tuple(GaussianRational.coerce(complex(c)) for c in center)


@functools.lru_cache(maxsize=512)
def _recentered_float_terms(p: SparsePoly, center: tuple) -> tuple:
    shifted = poly_recenter(p, center)
    return tuple((e, complex(c)) for e, c in shifted.terms)


def poly_recenter(p: SparsePoly, center: Sequence) -> SparsePoly:
    """The polynomial u -> p(center + u), computed in p's own mode."""
    if len(center) != p.nvars:
        raise DimensionMismatchError("centre dimension does not match")
    args = []
    for i, c in enumerate(center):
        shift = SparsePoly.constant(c if p.mode == EXACT else complex(c), p.nvars, p.mode)
        args.append(SparsePoly.variable(i, p.nvars, p.mode) + shift)
    return poly_compose(p, args, degree_cap=max(p.degree(), 0) + 1)


def eval_grid(p: SparsePoly, points: np.ndarray) -> np.ndarray:
    """
    Evaluate ``p`` at every row of ``points`` (shape (N, nvars)).

    High-degree exact polynomials are evaluated through the exact expansion at
    the nearest anchor, so that values near the anchors carry no cancellation
    from far-away monomial coefficients.
    """
    points = np.asarray(points, dtype=complex)
    if points.ndim == 1:
        points = points.reshape(-1, p.nvars)
    if points.shape[1] != p.nvars:
        raise DimensionMismatchError(f"points have {points.shape[1]} coordinates, polynomial has {p.nvars} variables")
    if not p.terms:
        return np.zeros(points.shape[0], dtype=complex)
    if p.mode == FLOAT or p.degree() <= STABLE_EVAL_DEGREE or not p.anchors:
        return _horner_grid([(e, complex(c)) for e, c in p.terms], points, 0)
    anchors = np.array(p.anchors, dtype=complex).reshape(-1, p.nvars)
    dist = np.linalg.norm(points[:, None, :] - anchors[None, :, :], axis=2)
    nearest = np.argmin(dist, axis=1)
    out = np.empty(points.shape[0], dtype=complex)
    for idx in np.unique(nearest):
        mask = nearest == idx
        key = _center_key(anchors[idx])
        items = list(_recentered_float_terms(p, key))
        if not items:
            out[mask] = 0
            continue
        out[mask] = _horner_grid(items, points[mask] - anchors[idx], 0)
    return out


# === PolyMap ===

@dataclass(frozen=True)
class PolyMap:
    """A polynomial self-map of C^n; ``components[i]`` is the i-th output."""

    n: int
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.n:
            raise DimensionMismatchError(f"{len(self.components)} components for dimension {self.n}")
        if any(c.nvars != self.n for c in self.components):
            raise DimensionMismatchError("all components must be polynomials in n variables")

    @classmethod
    def identity(cls, n: int, mode: str = EXACT) -> "PolyMap":
        return cls(n, tuple(SparsePoly.variable(i, n, mode) for i in range(n)))

    @classmethod
    def linear(cls, matrix: Sequence[Sequence], mode: str = EXACT) -> "PolyMap":
        n = len(matrix)
        comps = []
        for row in matrix:
            mapping = {tuple(1 if k == j else 0 for k in range(n)): v for j, v in enumerate(row)}
            comps.append(SparsePoly.from_terms(n, mapping, mode))
        return cls(n, tuple(comps))

    def compose(self, other: "PolyMap", degree_cap: int = DEFAULT_DEGREE_CAP) -> "PolyMap":
        """self ∘ other (``other`` is applied first)."""
        if other.n != self.n:
            raise DimensionMismatchError("maps of different dimension")
        return PolyMap(self.n, tuple(poly_compose(c, list(other.components), degree_cap) for c in self.components))

    def __call__(self, *x):
        return tuple(poly_eval(c, list(x)) for c in self.components)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, self.n)
        return np.stack([eval_grid(c, points) for c in self.components], axis=1)

    def jacobian(self) -> list:
        return [[poly_derivative(c, j) for j in range(self.n)] for c in self.components]

    def to_json(self) -> dict:
        return {"n": self.n, "components": [c.to_json() for c in self.components]}
