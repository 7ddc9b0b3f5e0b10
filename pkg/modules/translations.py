"""
Generalised translations: escape indices, separating-hyperplane certificates,
the diagonal translation of C^n, the translations tau_a of a Danielewski
surface x*y = p(z), and the product-space examples.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy

from modules.expsum import ExpSum, SemiSymbolicMap
from modules.polycore import (
    EXACT,
    GaussianRational,
    PolyMap,
    SparsePoly,
    poly_compose,
    poly_derivative,
    poly_divide_exact,
    poly_embed,
    poly_eval,
    poly_mul,
    poly_pow,
)
from modules.regions import Polydisc, Region
from modules.shearcalc import MapGenerator

SURFACE_TOL = 1e-10


class TranslationError(ValueError):
    pass


class NonConvexRegionError(TranslationError):
    pass


class OffSurfaceError(TranslationError):
    pass


# === diagonal translation of C^n ===

@dataclass(frozen=True)
class DiagonalTranslation(MapGenerator):
    """z -> z + b*(1, ..., 1)."""

    n: int
    b: float

    def __post_init__(self):
        if self.n < 1:
            raise TranslationError(f"dimension must be positive, got {self.n}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise TranslationError(f"shift must be a positive real, got {self.b}")

    def shift(self, m: int = 1) -> tuple:
        return (complex(m * self.b),) * self.n

    def power_map(self, k: int) -> SemiSymbolicMap:
        step = GaussianRational.coerce(float(self.b)) * k
        return SemiSymbolicMap(self.n, tuple(ExpSum.variable(i, self.n) + ExpSum.constant(step, self.n) for i in range(self.n)))

    def to_map(self) -> SemiSymbolicMap:
        return self.power_map(1)

    def inverse_map(self) -> SemiSymbolicMap:
        return self.power_map(-1)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=complex) + self.b

    def apply_inverse(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=complex) - self.b

    def apply_power(self, points: np.ndarray, k: int) -> np.ndarray:
        return np.asarray(points, dtype=complex) + k * self.b

    def to_json(self) -> dict:
        return {"kind": "translation", "n": self.n, "b": self.b}


def escape_index(tau: DiagonalTranslation, K: Region) -> int:
    """Smallest m >= 1 for which tau^m(K) and K have disjoint real extents in some coordinate."""
    if K.n != tau.n:
        raise TranslationError(f"region in C^{K.n} for a translation of C^{tau.n}")
    widths = [K.width(k) for k in range(K.n)]
    if not all(math.isfinite(w) for w in widths):
        raise TranslationError("region is unbounded")
    return int(math.floor(min(widths) / tau.b)) + 1


def regions_disjoint(K1: Region, K2: Region) -> bool:
    if isinstance(K1, Polydisc) and isinstance(K2, Polydisc):
        return any(abs(c1 - c2) > r1 + r2 for c1, r1, c2, r2 in zip(K1.centers, K1.radii, K2.centers, K2.radii))
    for k in range(K1.n):
        lo1, hi1 = K1.coordinate_extent(k)
        lo2, hi2 = K2.coordinate_extent(k)
        if hi1 < lo2 or hi2 < lo1:
            return True
    return False


# === separation certificates ===

@dataclass
class SeparationCertificate:
    """ell(z) = sum_k (u_{2k} Re z_k + u_{2k+1} Im z_k); ell < threshold on K1, ell > threshold on K2."""

    verdict: bool
    method: str
    functional: list = field(default_factory=list)
    threshold: float = 0.0
    gap: float = 0.0
    iterations: int = 0

    def label(self) -> str:
        if not self.functional:
            return "none"
        names = []
        for i, u in enumerate(self.functional):
            if u:
                part = "Re" if i % 2 == 0 else "Im"
                names.append(f"{u:+g} {part} z{i // 2 + 1}")
        return " ".join(names)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "method": self.method,
            "functional": self.functional,
            "functional_label": self.label(),
            "threshold": self.threshold,
            "gap": self.gap,
            "iterations": self.iterations,
        }


def _axis(n: int, index: int, sign: float = 1.0) -> np.ndarray:
    u = np.zeros(2 * n)
    u[index] = sign
    return u


def _to_real(z: np.ndarray) -> np.ndarray:
    out = np.empty(2 * len(z))
    out[0::2] = np.real(z)
    out[1::2] = np.imag(z)
    return out


def _check_convex(*regions: Region):
    for K in regions:
        if not K.is_convex:
            raise NonConvexRegionError(f"{type(K).__name__} is not convex; separation needs convex pieces")


def _gap_along(K1: Region, K2: Region, u: np.ndarray) -> tuple[float, float]:
    """(gap, midpoint) of K2 beyond K1 along unit direction u."""
    top1, _ = K1.support(u)
    neg2, _ = K2.support(-u)
    bottom2 = -neg2
    return bottom2 - top1, (bottom2 + top1) / 2.0


def separation_certificate(K1: Region, K2: Region, max_iter: int = 2000, tol: float = 1e-12) -> SeparationCertificate:
    """
    Strictly separating real hyperplane for two convex compacts.

    Coordinate functionals are tried first (largest gap wins, first on ties);
    otherwise the minimum-norm point of K2 - K1 is found by Gilbert's
    iteration and its direction is used.
    """
    _check_convex(K1, K2)
    if K1.n != K2.n:
        raise TranslationError("regions live in different dimensions")
    n = K1.n

    best = None
    for index in range(2 * n):
        for sign in (1.0, -1.0):
            u = _axis(n, index, sign)
            gap, mid = _gap_along(K1, K2, u)
            if gap > 0 and (best is None or gap > best[0]):
                best = (gap, mid, u)
    if best is not None:
        gap, mid, u = best
        return SeparationCertificate(True, "coordinate", [float(v) for v in u], float(mid), float(gap), 0)

    def support_diff(direction: np.ndarray) -> np.ndarray:
        # minimiser of <direction, x> over K2 - K1
        _, p2 = K2.support(-direction)
        _, p1 = K1.support(direction)
        return _to_real(np.asarray(p2) - np.asarray(p1))

    v = support_diff(_axis(n, 0))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        norm2 = float(v @ v)
        if norm2 <= tol:
            break
        s = support_diff(v)
        if norm2 - float(v @ s) <= tol * max(norm2, 1.0):
            break
        d = v - s
        t = min(max(float(v @ d) / float(d @ d), 0.0), 1.0)
        v = v + t * (s - v)

    norm = float(np.sqrt(v @ v))
    if norm <= math.sqrt(tol):
        return SeparationCertificate(False, "min-norm", [], 0.0, 0.0, iterations)
    u = v / norm
    gap, mid = _gap_along(K1, K2, u)
    if gap <= 0:
        return SeparationCertificate(False, "min-norm", [float(x) for x in u], float(mid), float(gap), iterations)
    return SeparationCertificate(True, "min-norm", [float(x) for x in u], float(mid), float(gap), iterations)


@dataclass
class ZajacVerdict:
    verdict: bool
    m: int
    disjoint: bool
    separation: SeparationCertificate

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "m": self.m,
            "escape": {"disjoint": self.disjoint},
            "separation": self.separation.to_json(),
        }


def zajac_check(tau: DiagonalTranslation, K: Region, m: int) -> ZajacVerdict:
    _check_convex(K)
    moved = K.translate(tau.shift(m))
    disjoint = regions_disjoint(K, moved)
    cert = separation_certificate(K, moved)
    return ZajacVerdict(disjoint and cert.verdict, m, disjoint, cert)


# === distance curves ===

@dataclass
class DistanceCurve:
    rows: list  # [(m, value), ...]
    header: tuple = ("m", "min_distance")

    def values(self) -> list:
        return [v for _, v in self.rows]

    def is_strictly_increasing(self, start: int = 0) -> bool:
        vals = [v for m, v in self.rows if m >= start]
        return all(b > a for a, b in zip(vals, vals[1:]))

    def to_json(self) -> list:
        return [{self.header[0]: m, self.header[1]: v} for m, v in self.rows]


def set_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a[:, None, :] - b[None, :, :]
    return float(np.linalg.norm(diff, axis=2).min())


def orbit_distance_curve(step, samples: np.ndarray, m_range: Sequence[int]) -> DistanceCurve:
    """Minimum distance between step^m(samples) and samples, for every m in m_range."""
    m_values = sorted(set(int(m) for m in m_range))
    if m_values and m_values[0] < 0:
        raise TranslationError("escape curves run over non-negative powers")
    rows = []
    current = np.asarray(samples, dtype=complex)
    done = 0
    for m in m_values:
        while done < m:
            current = step(current)
            done += 1
        rows.append((m, set_distance(current, samples)))
    return DistanceCurve(rows)


# === Danielewski surfaces ===

X, Y, Z = 0, 1, 2


def _to_sympy(p: SparsePoly, symbol) -> sympy.Expr:
    expr = sympy.Integer(0)
    for (e,), c in p.terms:
        c = GaussianRational.coerce(c)
        coeff = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)
        expr += coeff * symbol ** e
    return expr


def is_square_free(p: SparsePoly) -> bool:
    symbol = sympy.Symbol("z")
    expr = _to_sympy(p, symbol)
    common = sympy.gcd(expr, sympy.diff(expr, symbol))
    return sympy.Poly(common, symbol).degree() == 0


@dataclass(frozen=True)
class DanielewskiSurface:
    """D_p = {(x, y, z) : x*y = p(z)} for square-free univariate p."""

    p: SparsePoly

    def __post_init__(self):
        if self.p.nvars != 1:
            raise TranslationError("p must be univariate")
        if self.p.degree() < 1:
            raise TranslationError("p must have degree >= 1")
        if not is_square_free(self.p):
            raise TranslationError(f"p = {self.p!r} has a repeated root")

    @property
    def p_xyz(self) -> SparsePoly:
        return poly_embed(self.p, 3, [Z])

    def relation(self) -> SparsePoly:
        """x*y - p(z)."""
        x = SparsePoly.variable(X, 3, self.p.mode)
        y = SparsePoly.variable(Y, 3, self.p.mode)
        return x * y - self.p_xyz

    def residual(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, 3)
        pz = np.array([complex(poly_eval(self.p, [z])) for z in points[:, 2]], dtype=complex)
        return np.abs(points[:, 0] * points[:, 1] - pz)

    def check_points(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, 3)
        bad = self.residual(points) >= SURFACE_TOL
        if np.any(bad):
            idx = int(np.argmax(bad))
            raise OffSurfaceError(f"sample {idx} = {points[idx].tolist()} is not on x*y = p(z)")
        return points

    def fiber_points(self, z0, ys: Sequence) -> np.ndarray:
        """Points (0, y, z0) on the x = 0 fibre over a root z0 of p."""
        return np.array([[0, y, z0] for y in ys], dtype=complex)


@dataclass(frozen=True)
class DanielewskiMap:
    surface: DanielewskiSurface
    a: object
    q: SparsePoly
    map: PolyMap

    def __call__(self, x, y, z):
        return self.map(x, y, z)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.map.evaluate(points)

    def to_json(self) -> dict:
        a = complex(self.a)
        return {"a": [a.real, a.imag], "q": self.q.to_json(), "map": self.map.to_json()}


def _scalar(a, mode: str):
    return GaussianRational.coerce(a) if mode == EXACT else complex(a)


def danielewski_translation(S: DanielewskiSurface, a) -> DanielewskiMap:
    """tau_a(x, y, z) = (x, y + (p(z + a x) - p(z)) / x, z + a x)."""
    if complex(a) == 0:
        raise TranslationError("tau_a needs a != 0")
    mode = S.p.mode
    x = SparsePoly.variable(X, 3, mode)
    y = SparsePoly.variable(Y, 3, mode)
    z = SparsePoly.variable(Z, 3, mode)
    moved_z = z + x * SparsePoly.constant(_scalar(a, mode), 3, mode)
    difference = poly_compose(S.p, [moved_z]) - S.p_xyz
    q = poly_divide_exact(difference, x)
    return DanielewskiMap(S, a, q, PolyMap(3, (x, y + q, moved_z)))


def identity_xyz(mode: str = EXACT) -> PolyMap:
    return PolyMap.identity(3, mode)


def surface_normal_form(S: DanielewskiSurface, d: SparsePoly) -> SparsePoly:
    """x^k d(x, p(z)/x, z) with k = deg_y d; zero exactly when d vanishes on D_p."""
    k = max(d.degree_in(Y), 0)
    p = S.p_xyz
    x = SparsePoly.variable(X, 3, d.mode)
    result = SparsePoly.zero(3, d.mode if d.mode == p.mode else "float")
    for exp, c in d.terms:
        e_y = exp[Y]
        mono = SparsePoly.from_terms(3, {(exp[X], 0, exp[Z]): c}, d.mode)
        term = poly_mul(poly_mul(mono, poly_pow(p, e_y)), poly_pow(x, k - e_y))
        result = result + term
    return result


def equal_on_surface(S: DanielewskiSurface, F: PolyMap, G: PolyMap) -> bool:
    return all(surface_normal_form(S, a - b).is_zero() for a, b in zip(F.components, G.components))


def check_invariance(S: DanielewskiSurface, tau: DanielewskiMap) -> bool:
    """x*y' - p(z') is literally x*y - p(z)."""
    rel = S.relation()
    pulled = poly_compose(rel, list(tau.map.components))
    return (pulled - rel).is_zero()


@dataclass
class CocycleVerdict:
    a: object
    b: object
    verdict: bool
    literal: bool

    def to_json(self) -> dict:
        a, b = complex(self.a), complex(self.b)
        return {"a": [a.real, a.imag], "b": [b.real, b.imag], "verdict": self.verdict, "literal": self.literal}


def danielewski_cocycle_check(S: DanielewskiSurface, a, b) -> CocycleVerdict:
    """tau_a ∘ tau_b against tau_{a+b} (the identity when a + b = 0)."""
    if complex(a) == 0 or complex(b) == 0:
        raise TranslationError("cocycle check needs a, b != 0")
    composed = danielewski_translation(S, a).map.compose(danielewski_translation(S, b).map)
    total = _scalar(a, S.p.mode) + _scalar(b, S.p.mode)
    expected = identity_xyz(S.p.mode) if complex(total) == 0 else danielewski_translation(S, total).map
    literal = composed == expected
    verdict = literal or equal_on_surface(S, composed, expected)
    return CocycleVerdict(a, b, verdict, literal)


def danielewski_power_check(S: DanielewskiSurface, a, m: int) -> bool:
    """tau_a^m = tau_{a m}."""
    tau = danielewski_translation(S, a).map
    power = identity_xyz(S.p.mode)
    for _ in range(m):
        power = tau.compose(power)
    target = danielewski_translation(S, _scalar(a, S.p.mode) * m).map
    return power == target or equal_on_surface(S, power, target)


def fiber_shift(S: DanielewskiSurface, a, z0) -> complex:
    """Shift in y of tau_a on the fibre x = 0: a * p'(z0)."""
    return complex(a) * complex(poly_eval(poly_derivative(S.p, 0), [z0]))


def surface_samples(S: DanielewskiSurface, count: int, seed: int = 0) -> np.ndarray:
    """Seeded points of D_p with 1 <= |x| <= 2 and |z| <= 1, y solved from the relation."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(1.0, 2.0, count) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, count))
    z = np.sqrt(rng.uniform(0.0, 1.0, count)) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, count))
    pz = np.array([complex(poly_eval(S.p, [v])) for v in z], dtype=complex)
    return S.check_points(np.stack([x, pz / x, z], axis=1))


def random_shift_pairs(count: int, seed: int = 0, max_num: int = 5, max_den: int = 4) -> list:
    """Seeded pairs (a, b) of non-zero rationals."""
    rng = np.random.default_rng(seed)

    def draw() -> GaussianRational:
        num = 0
        while num == 0:
            num = int(rng.integers(-max_num, max_num + 1))
        return GaussianRational(Fraction(num, int(rng.integers(1, max_den + 1))))

    return [(draw(), draw()) for _ in range(count)]


def surface_escape_probe(S: DanielewskiSurface, a, samples: np.ndarray, m_range: Sequence[int]) -> DistanceCurve:
    samples = S.check_points(samples)
    tau = danielewski_translation(S, a)
    return orbit_distance_curve(tau.apply, samples, m_range)


def fiber_escape_curve(S: DanielewskiSurface, a, m_range: Sequence[int], y0=0.0) -> tuple[list, DistanceCurve]:
    """
    Orbits of (0, y0, z0) over the roots z0 of p. On x = 0 the translation
    only moves y, by a * p'(z0), so the curve grows linearly with slope
    min |a * p'(z0)|.
    """
    coeffs = [complex(S.p.coefficient((k,))) for k in range(S.p.degree(), -1, -1)]
    roots = np.roots(coeffs)
    samples = np.concatenate([S.fiber_points(z0, [y0]) for z0 in roots])
    shifts = [{"root": complex(z0), "y_shift": fiber_shift(S, a, z0)} for z0 in roots]
    return shifts, surface_escape_probe(S, a, samples, m_range)


# === product examples ===

PRODUCT_KINDS = ("C×Y", "C*×C*×Y")
_KIND_ALIASES = {"CxY": "C×Y", "C*xC*xY": "C*×C*×Y"}


@dataclass(frozen=True)
class ProductTranslation:
    kind: str
    a: complex
    map: SemiSymbolicMap

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, self.map.n)
        if self.kind == "C×Y":
            return points + self.a
        return np.stack([self.a * points[:, 0], points[:, 1] / self.a], axis=1)

    def to_json(self) -> dict:
        return {"kind": self.kind, "a": [self.a.real, self.a.imag], "map": self.map.to_json()}


def product_translation(kind: str, a) -> ProductTranslation:
    """The map on the C (or C* x C*) factors; the Y factor is left untouched and is not carried."""
    kind = _KIND_ALIASES.get(kind, kind)
    a_c = complex(a)
    if kind not in PRODUCT_KINDS:
        raise TranslationError(f"unknown product kind {kind!r}; expected one of {PRODUCT_KINDS}")
    if a_c == 0:
        raise TranslationError("a must be non-zero")
    coef = GaussianRational.coerce(a)
    if kind == "C×Y":
        z = ExpSum.variable(0, 1)
        return ProductTranslation(kind, a_c, SemiSymbolicMap(1, (z + ExpSum.constant(coef, 1),)))
    if abs(abs(a_c) - 1.0) < 1e-12:
        raise TranslationError("|a| = 1 keeps every annulus in place; compacts cannot escape")
    z = ExpSum.variable(0, 2)
    w = ExpSum.variable(1, 2)
    return ProductTranslation(kind, a_c, SemiSymbolicMap(2, (z * ExpSum.constant(coef, 2), w * ExpSum.constant(GaussianRational(1) / coef, 2))))


def modulus_intervals(a, r_lo: float, r_hi: float, m: int) -> dict:
    """Moduli of z on an annulus r_lo <= |z| <= r_hi before and after m steps of z -> a z."""
    scale = abs(complex(a)) ** m
    moved = sorted((r_lo * scale, r_hi * scale))
    return {
        "original": [r_lo, r_hi],
        "moved": moved,
        "disjoint": moved[0] > r_hi or moved[1] < r_lo,
    }


def factor_escape_curve(pt: ProductTranslation, samples: np.ndarray, m_range: Sequence[int]) -> DistanceCurve:
    samples = np.asarray(samples, dtype=complex).reshape(-1, pt.map.n)
    return orbit_distance_curve(pt.apply, samples, m_range)

