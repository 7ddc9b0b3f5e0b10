"""
Constructive Runge approximation on finitely many disjoint discs, and the
staged Birkhoff construction of paired functions whose translates approximate
prescribed targets.

A fit is a discrete weighted least-squares problem on boundary samples of the
discs, in a Newton basis on Leja points (orthonormalised by QR). The fitted
polynomial is converted to exact monomial form and certified on a 4x denser
boundary grid with a derivative-based slack; by the maximum principle the
boundary sup controls the sup on each closed disc.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import qr, solve_triangular

from modules.polycore import (
    GaussianRational,
    SparsePoly,
    eval_grid,
    poly_compose,
    poly_derivative,
    poly_embed,
    poly_scale,
)
from modules.regions import GridSpec, Polydisc, Region, RegionUnion
from modules.translations import DiagonalTranslation, escape_index, separation_certificate

NODE_DENOMINATOR = 64
MIN_FIT_SAMPLES = 64
VALIDATION_FACTOR = 4
IMPROVEMENT_FACTOR = 0.5
# gap between consecutive translates of one compact, in radii
SERIES_GAP_FACTOR = 12.0

Target = Union[SparsePoly, Callable[[int], SparsePoly], None]


class PreconditionError(ValueError):
    pass


class InfeasibleToleranceError(ArithmeticError):
    def __init__(self, message: str, best: "ApproxCertificate | None" = None, stage: int | None = None):
        super().__init__(message)
        self.best = best
        self.stage = stage


# === certificates ===

@dataclass
class ApproxCertificate:
    p: SparsePoly
    degree: int
    err1: float
    err2: float
    fit_samples: int
    validation_samples: int
    slack: float
    feasible: bool = True
    piece_errors: list = field(default_factory=list)
    tolerances: list = field(default_factory=list)

    def to_json(self, include_poly: bool = True) -> dict:
        data = {
            "degree": self.degree,
            "err1": self.err1,
            "err2": self.err2,
            "fit_samples": self.fit_samples,
            "validation_samples": self.validation_samples,
            "slack": self.slack,
            "feasible": self.feasible,
            "piece_errors": self.piece_errors,
            "tolerances": self.tolerances,
        }
        if include_poly:
            data["p"] = self.p.to_json()
        return data


@dataclass(frozen=True)
class DiscTarget:
    center: complex
    radius: float
    target: SparsePoly
    tol: float


def _rational(value: complex) -> GaussianRational:
    return GaussianRational(
        Fraction(float(value.real)).limit_denominator(NODE_DENOMINATOR),
        Fraction(float(value.imag)).limit_denominator(NODE_DENOMINATOR),
    )


def circle_samples(center: complex, radius: float, count: int) -> np.ndarray:
    return center + radius * np.exp(2j * np.pi * np.arange(count) / count)


# === Newton basis on Leja points ===

class NewtonBasis:
    """omega_0 = 1, omega_{k+1} = omega_k * (zeta - a_k) / s with rational nodes a_k and scale s."""

    def __init__(self, candidates: np.ndarray, degree: int):
        self.degree = degree
        nodes, capacity = leja_points(candidates, max(degree, 1))
        self.nodes = [_rational(a) for a in nodes]
        self.node_values = np.array([complex(a) for a in self.nodes], dtype=complex)
        scale = Fraction(capacity).limit_denominator(NODE_DENOMINATOR)
        self.scale = scale if scale > 0 else Fraction(1)

    def columns(self, zeta: np.ndarray, degree: int | None = None) -> np.ndarray:
        degree = self.degree if degree is None else degree
        cols = np.empty((len(zeta), degree + 1), dtype=complex)
        cols[:, 0] = 1.0
        s = float(self.scale)
        for k in range(degree):
            cols[:, k + 1] = cols[:, k] * (zeta - self.node_values[k]) / s
        return cols

    def to_poly(self, coeffs: np.ndarray) -> SparsePoly:
        """Exact monomial form of sum c_k omega_k (coefficients taken exactly from their floats)."""
        d = len(coeffs) - 1
        inv_scale = GaussianRational(1 / self.scale)
        z = SparsePoly.variable(0, 1)
        p = SparsePoly.constant(GaussianRational.coerce(complex(coeffs[d])), 1)
        for k in range(d - 1, -1, -1):
            linear = poly_scale(z - SparsePoly.constant(self.nodes[k], 1), inv_scale)
            p = p * linear + SparsePoly.constant(GaussianRational.coerce(complex(coeffs[k])), 1)
        return p


def leja_points(candidates: np.ndarray, count: int) -> tuple[np.ndarray, float]:
    """Greedy Leja sequence from a finite candidate set, and the resulting capacity estimate."""
    candidates = np.asarray(candidates, dtype=complex)
    chosen = [int(np.argmax(np.abs(candidates)))]
    logsum = np.zeros(len(candidates))
    capacity = float(np.max(np.abs(candidates - candidates[chosen[0]]))) / 2 or 1.0
    for k in range(1, count):
        with np.errstate(divide="ignore"):
            logsum += np.log(np.abs(candidates - candidates[chosen[-1]]))
        idx = int(np.argmax(logsum))
        if not np.isfinite(logsum[idx]):
            break
        capacity = math.exp(logsum[idx] / k)
        chosen.append(idx)
    return candidates[chosen], capacity


# === the fitting engine ===

def _anchored(p: SparsePoly, discs: Sequence[DiscTarget], extra_anchors: Sequence) -> SparsePoly:
    anchors = [(d.center,) for d in discs] + [tuple(a) for a in extra_anchors]
    return p.with_anchors(anchors)


def certify_on_discs(p: SparsePoly, discs: Sequence[DiscTarget], validation_samples: int) -> tuple[list, float]:
    """Certified sup |p - target| per disc, and the largest slack term used."""
    errors = []
    max_slack = 0.0
    for disc in discs:
        samples = circle_samples(disc.center, disc.radius, validation_samples).reshape(-1, 1)
        e = (p - disc.target).with_anchors(p.anchors)
        de = poly_derivative(e, 0).with_anchors(p.anchors)
        values = np.abs(eval_grid(e, samples))
        slope = np.abs(eval_grid(de, samples))
        slack = float(slope.max()) * math.pi * disc.radius / validation_samples if slope.size else 0.0
        max_slack = max(max_slack, slack)
        err = float(values.max()) + slack
        errors.append(err if math.isfinite(err) else float("inf"))
    return errors, max_slack


def _ratio(errors: Sequence[float], discs: Sequence[DiscTarget]) -> float:
    return max(e / d.tol for e, d in zip(errors, discs))


def fit_on_discs(discs: Sequence[DiscTarget], max_degree: int, candidates: Sequence[SparsePoly] = (),
                 extra_anchors: Sequence = (), strict: bool = True, err1_group: Sequence[int] = (0,),
                 min_degree: int = 1) -> ApproxCertificate:
    """
    Smallest-degree polynomial p (searched upward) with certified
    sup |p - target_i| <= tol_i on every disc.

    ``candidates`` are tried first (e.g. constants). On failure the best
    certificate seen is attached to ``InfeasibleToleranceError`` or, when
    ``strict`` is False, returned with ``feasible = False``.
    """
    if not discs:
        raise PreconditionError("no discs to fit on")
    n_fit = max(MIN_FIT_SAMPLES, 2 * max_degree)
    n_val = VALIDATION_FACTOR * n_fit
    group = set(err1_group)

    def make_cert(p: SparsePoly, degree: int, errors: list, slack: float, feasible: bool) -> ApproxCertificate:
        e1 = max((e for i, e in enumerate(errors) if i in group), default=0.0)
        e2 = max((e for i, e in enumerate(errors) if i not in group), default=0.0)
        return ApproxCertificate(p, degree, e1, e2, n_fit * len(discs), n_val * len(discs), slack, feasible,
                                 list(errors), [d.tol for d in discs])

    best: ApproxCertificate | None = None
    for cand in candidates:
        p = _anchored(cand, discs, extra_anchors)
        errors, slack = certify_on_discs(p, discs, n_val)
        ok = all(e <= d.tol for e, d in zip(errors, discs))
        cert = make_cert(p, max(p.degree(), 0), errors, slack, ok)
        if ok:
            return cert
        if best is None or _ratio(errors, discs) < _ratio(best.piece_errors, discs):
            best = cert

    fit_z = np.concatenate([circle_samples(d.center, d.radius, n_fit) for d in discs])
    val_z = [circle_samples(d.center, d.radius, n_val) for d in discs]
    fit_y = np.concatenate([eval_grid(d.target, circle_samples(d.center, d.radius, n_fit).reshape(-1, 1)) for d in discs])
    val_y = [eval_grid(d.target, z.reshape(-1, 1)) for d, z in zip(discs, val_z)]
    weights = np.concatenate([np.full(n_fit, 1.0 / d.tol) for d in discs])

    basis = NewtonBasis(fit_z, max_degree)
    V_fit = basis.columns(fit_z)
    V_val = [basis.columns(z) for z in val_z]
    A_full = V_fit * weights[:, None]
    rhs = fit_y * weights

    step = max(1, max_degree // 40)
    best_trial = None
    best_trial_ratio = math.inf
    for degree in range(max(min_degree, 1), max_degree + 1, step):
        Q, R = qr(A_full[:, : degree + 1], mode="economic")
        try:
            coeffs = solve_triangular(R, Q.conj().T @ rhs)
        except (np.linalg.LinAlgError, ValueError):
            continue
        errors = [float(np.max(np.abs(V[:, : degree + 1] @ coeffs - y))) for V, y in zip(V_val, val_y)]
        ratio = _ratio(errors, discs)
        if not math.isfinite(ratio):
            continue
        if ratio < IMPROVEMENT_FACTOR * best_trial_ratio:
            best_trial, best_trial_ratio = (degree, coeffs), ratio
        if ratio <= 0.5:
            p = _anchored(basis.to_poly(coeffs), discs, extra_anchors)
            cert_errors, slack = certify_on_discs(p, discs, n_val)
            if all(e <= d.tol for e, d in zip(cert_errors, discs)):
                return make_cert(p, p.degree(), cert_errors, slack, True)

    if best_trial is not None:
        degree, coeffs = best_trial
        p = _anchored(basis.to_poly(coeffs), discs, extra_anchors)
        cert_errors, slack = certify_on_discs(p, discs, n_val)
        cert = make_cert(p, p.degree(), cert_errors, slack, False)
        if best is None or _ratio(cert_errors, discs) < _ratio(best.piece_errors, discs):
            best = cert
    if strict:
        raise InfeasibleToleranceError(
            f"tolerances {[d.tol for d in discs]} not reached up to degree {max_degree}; "
            f"best errors {best.piece_errors if best else None}", best)
    return best


# === disjoint pairs ===

def _projected_discs(K: Region, coordinate: int) -> list:
    parts = K.parts if isinstance(K, RegionUnion) else (K,)
    discs = []
    for part in parts:
        if not isinstance(part, Polydisc):
            raise PreconditionError("Runge pieces must be polydiscs or unions of polydiscs")
        discs.append((part.centers[coordinate], part.radii[coordinate]))
    return discs


@dataclass
class DisjointPair:
    K1: Region
    K2: Region
    coordinate: int = 0
    separation: float = field(init=False, default=0.0)
    hyperplane: dict | None = field(init=False, default=None)

    def __post_init__(self):
        if self.K1.n != self.K2.n:
            raise PreconditionError("pair pieces live in different dimensions")
        if not 0 <= self.coordinate < self.K1.n:
            raise PreconditionError(f"separating coordinate {self.coordinate} out of range")
        d1 = _projected_discs(self.K1, self.coordinate)
        d2 = _projected_discs(self.K2, self.coordinate)
        everything = d1 + d2
        gaps = [abs(c1 - c2) - r1 - r2 for i, (c1, r1) in enumerate(everything) for (c2, r2) in everything[i + 1:]]
        if gaps and min(gaps) <= 0:
            raise PreconditionError(f"projected discs overlap or touch (gap {min(gaps):.6g})")
        self.separation = float(min(abs(c1 - c2) - r1 - r2 for c1, r1 in d1 for c2, r2 in d2))
        if len(d1) == 1 and len(d2) == 1:
            cert = separation_certificate(Polydisc((d1[0][0],), (d1[0][1],)), Polydisc((d2[0][0],), (d2[0][1],)))
            self.hyperplane = cert.to_json()

    @property
    def discs1(self) -> list:
        return _projected_discs(self.K1, self.coordinate)

    @property
    def discs2(self) -> list:
        return _projected_discs(self.K2, self.coordinate)

    def to_json(self) -> dict:
        return {
            "K1": self.K1.to_json(),
            "K2": self.K2.to_json(),
            "coordinate": self.coordinate,
            "separation": self.separation,
            "hyperplane": self.hyperplane,
        }


@dataclass
class PiecewiseTarget:
    h1: SparsePoly
    h2: SparsePoly

    def __post_init__(self):
        if self.h1.nvars != self.h2.nvars:
            raise PreconditionError("targets live in different variable counts")


def blend_coefficient(pair: DisjointPair, eps: float, max_degree: int = 80, strict: bool = True) -> ApproxCertificate:
    """phi(zeta) in the separating coordinate with |phi - 1| <= eps on K1 and |phi| <= eps on K2."""
    discs = _blend_discs(pair, eps)
    return fit_on_discs(discs, max_degree, candidates=(SparsePoly.one(1), SparsePoly.zero(1)), strict=strict,
                        err1_group=range(len(pair.discs1)))


def _blend_discs(pair: DisjointPair, eps: float) -> list:
    if eps <= 0:
        raise PreconditionError("tolerance must be positive")
    one = SparsePoly.one(1)
    zero = SparsePoly.zero(1)
    return [DiscTarget(c, r, one, eps) for c, r in pair.discs1] + [DiscTarget(c, r, zero, eps) for c, r in pair.discs2]


def blend_degree_curve(pair: DisjointPair, degrees: Sequence[int], eps: float = 1e-6) -> list:
    """
    (allowed degree, certified max error) of the blend. A fit at degree d is
    also admissible at every larger allowed degree, so each row keeps the
    best certificate seen so far.
    """
    discs = _blend_discs(pair, eps)
    wanted = sorted(set(int(d) for d in degrees))
    if any(d < 1 for d in wanted):
        raise PreconditionError("curve degrees must be positive")
    rows = []
    best = float("inf")
    for d in wanted:
        cert = fit_on_discs(discs, d, strict=False, err1_group=range(len(pair.discs1)), min_degree=d)
        err = max(cert.err1, cert.err2) if cert is not None else float("inf")
        best = min(best, err)
        rows.append((d, best))
    return rows


def is_nonincreasing(rows: Sequence[tuple]) -> bool:
    values = [v for _, v in rows]
    return all(b <= a for a, b in zip(values, values[1:]))


def sup_norm(h: SparsePoly, K: Region, spec: GridSpec | None = None) -> float:
    spec = spec or GridSpec()
    pts = np.concatenate([K.grid(spec), K.boundary_samples(32)], axis=0)
    return float(np.max(np.abs(eval_grid(h, pts)))) if not h.is_zero() else 0.0


def runge_piecewise(pair: DisjointPair, target: PiecewiseTarget, eps: float, max_degree: int = 80) -> ApproxCertificate:
    """p = h1 phi + h2 (1 - phi), with phi blended at eps / (1 + |h1| + |h2|) on K1 ∪ K2."""
    n = pair.K1.n
    if target.h1.nvars != n:
        raise PreconditionError(f"targets must be polynomials in {n} variables")
    if target.h1 == target.h2:
        return ApproxCertificate(target.h1, max(target.h1.degree(), 0), 0.0, 0.0, 0, 0, 0.0)
    union = RegionUnion((pair.K1, pair.K2))
    n1, n2 = sup_norm(target.h1, union), sup_norm(target.h2, union)
    phi_cert = blend_coefficient(pair, eps / (1.0 + n1 + n2), max_degree)
    phi = poly_embed(phi_cert.p, n, [pair.coordinate])
    p = target.h1 * phi + target.h2 * (SparsePoly.one(n) - phi)
    anchors = [tuple(part.centers) for part in (pair.K1.parts if isinstance(pair.K1, RegionUnion) else (pair.K1,))]
    anchors += [tuple(part.centers) for part in (pair.K2.parts if isinstance(pair.K2, RegionUnion) else (pair.K2,))]
    p = p.with_anchors(anchors)
    spread = sup_norm(target.h1 - target.h2, union)
    return ApproxCertificate(p, p.degree(), phi_cert.err1 * spread, phi_cert.err2 * spread,
                             phi_cert.fit_samples, phi_cert.validation_samples, phi_cert.slack * spread, True,
                             [phi_cert.err1 * spread, phi_cert.err2 * spread], [eps, eps])


# === translated targets and piece planning ===

def shift_poly(h: SparsePoly, offset) -> SparsePoly:
    """zeta -> h(zeta - offset*(1,...,1)); an exact offset gives an exact result."""
    n = h.nvars
    shift = GaussianRational.coerce(offset)
    args = [SparsePoly.variable(i, n) - SparsePoly.constant(shift, n) for i in range(n)]
    return poly_compose(h, args)


def _first_clear_power(tau: DiagonalTranslation, radius: float, gap: float, after: int = 0, floor: int = 1) -> int:
    """Smallest m > after (and >= floor) whose translate by (m - after) b clears a disc of the same radius by gap."""
    need = (2.0 * radius + gap) / tau.b
    return max(after + max(1, math.ceil(need - 1e-12)), floor)


@dataclass
class Piece:
    owner: str
    stage: int
    m: int
    region: Polydisc
    source: SparsePoly
    target: SparsePoly
    own_tol: float
    foreign_tol: float
    term: SparsePoly | None = None
    term_errors: list = field(default_factory=list)

    @property
    def disc(self) -> tuple:
        return self.region.centers[0], self.region.radii[0]


def _resolve_target(target: Target, m: int) -> SparsePoly | None:
    if target is None:
        return None
    if callable(target) and not isinstance(target, SparsePoly):
        return target(m)
    return target


def _fit_piece(piece: Piece, pieces: Sequence[Piece], max_degree: int, extra_anchors: Sequence) -> None:
    """Term ≈ target on its own piece and ≈ 0 on every other piece; fills term and term_errors."""
    nvars = piece.region.n
    if piece.target.is_zero():
        piece.term = SparsePoly.zero(nvars)
        piece.term_errors = [0.0] * len(pieces)
        return
    if nvars == 1:
        discs = [DiscTarget(q.disc[0], q.disc[1], piece.target if q is piece else SparsePoly.zero(1),
                            piece.own_tol if q is piece else piece.foreign_tol) for q in pieces]
        cert = fit_on_discs(discs, max_degree, candidates=(SparsePoly.zero(1),), extra_anchors=extra_anchors)
        piece.term = cert.p
        piece.term_errors = list(cert.piece_errors)
        return
    norms = [max(sup_norm(piece.target, q.region), 1e-300) for q in pieces]
    discs = [DiscTarget(q.disc[0], q.disc[1], SparsePoly.one(1) if q is piece else SparsePoly.zero(1),
                        (piece.own_tol if q is piece else piece.foreign_tol) / norm) for q, norm in zip(pieces, norms)]
    cert = fit_on_discs(discs, max_degree, candidates=(SparsePoly.zero(1),))
    phi = poly_embed(cert.p, nvars, [0])
    anchors = [tuple(q.region.centers) for q in pieces] + [tuple(a) for a in extra_anchors]
    piece.term = (phi * piece.target).with_anchors(anchors)
    piece.term_errors = [e * norm for e, norm in zip(cert.piece_errors, norms)]


def _fit_tracked(piece: Piece, pieces: Sequence[Piece], max_degree: int, extra_anchors: Sequence) -> None:
    try:
        _fit_piece(piece, pieces, max_degree, extra_anchors)
    except InfeasibleToleranceError as e:
        raise InfeasibleToleranceError(f"stage {piece.stage} (power {piece.m}): {e}", e.best, piece.stage) from e


def _series(pieces: Sequence[Piece], owner: str, nvars: int, anchors: Sequence) -> SparsePoly:
    total = SparsePoly.zero(nvars)
    for piece in pieces:
        if piece.owner == owner and piece.term is not None:
            total = total + piece.term
    return total.with_anchors(anchors)


def _condition(pieces: Sequence[Piece], index: int, owner: str, series: SparsePoly, spec: GridSpec) -> dict:
    """Certified bound and direct value of |series - expected| on piece ``index``."""
    q = pieces[index]
    expected = q.target if q.owner == owner else SparsePoly.zero(q.region.n)
    bound = sum(p.term_errors[index] for p in pieces if p.owner == owner and p.term is not None)
    pts = np.concatenate([q.region.grid(spec), q.region.boundary_samples(64)], axis=0)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.abs(eval_grid(series, pts) - eval_grid(expected, pts))
    direct_max = float(direct.max()) if np.all(np.isfinite(direct)) else float("inf")
    return {"bound": float(bound), "direct": direct_max}


# === Birkhoff construction ===

STAGE_MARGIN = 0.5


@dataclass
class BirkhoffStage:
    j: int
    tolerance: float
    compact: Polydisc
    m: int
    owner: str
    escape_index: int
    containment_ok: bool
    conditions: dict = field(default_factory=dict)
    partial_degree_f: int = -1
    partial_degree_g: int = -1

    @property
    def parity(self) -> str:
        return "odd" if self.j % 2 else "even"

    def satisfied(self) -> bool:
        return all(c["bound"] <= self.tolerance and c["direct"] <= self.tolerance for c in self.conditions.values())

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "parity": self.parity,
            "owner": self.owner,
            "tolerance": self.tolerance,
            "compact": self.compact.to_json(),
            "radius": self.compact.radii[0],
            "m": self.m,
            "escape_index": self.escape_index,
            "containment_ok": self.containment_ok,
            "conditions": self.conditions,
            "partial_degree_f": self.partial_degree_f,
            "partial_degree_g": self.partial_degree_g,
            "satisfied": self.satisfied(),
        }


@dataclass
class BirkhoffSchedule:
    b: float
    sign: int
    stages: list
    pieces: list
    next_compact: Polydisc | None = None

    def all_satisfied(self) -> bool:
        return all(s.satisfied() for s in self.stages)

    def to_json(self) -> dict:
        return {
            "b": self.b,
            "sign": self.sign,
            "stages": [s.to_json() for s in self.stages],
            "pieces": [
                {"owner": p.owner, "stage": p.stage, "m": p.m, "region": p.region.to_json(),
                 "own_tol": p.own_tol, "foreign_tol": p.foreign_tol,
                 "degree": p.term.degree() if p.term is not None else None}
                for p in self.pieces
            ],
            "next_compact": self.next_compact.to_json() if self.next_compact else None,
        }


def stage_target(targets: Sequence[tuple], j: int) -> Target:
    """Stage j reads pair ceil(j/2): the odd entry on odd stages, the even entry on even ones."""
    return targets[(j - 1) // 2][(j - 1) % 2]


def birkhoff_pair(tau: DiagonalTranslation, targets: Sequence[tuple], J: int, base_radius: float = 1.0,
                  gap_factor: float = 6.0, sign: int = 1, max_degree: int = 160,
                  spec: GridSpec | None = None) -> tuple[SparsePoly, SparsePoly, BirkhoffSchedule]:
    """
    f = sum f_j, g = sum g_j such that on K_j, with m_j the power of stage j,
        odd j:   f∘τ^{m_j} ≈ odd target,  g∘τ^{m_j} ≈ 0,
        even j:  f∘τ^{m_j} ≈ 0,           g∘τ^{m_j} ≈ even target,
    each within 2^-j. K_1 is the polydisc of radius ``base_radius`` at 0 and
    K_{j+1} holds K_j and τ^{m_j}(K_j) in its interior. The translate clears
    K_j by ``gap_factor`` radii. Every term is small on every piece but its
    own, so later stages never have to correct earlier ones.
    """
    if J < 1:
        raise PreconditionError("at least one stage is needed")
    needed = (J + 1) // 2
    if len(targets) < needed:
        raise PreconditionError(f"{J} stages need {needed} target pairs, got {len(targets)}")
    if sign not in (1, -1):
        raise PreconditionError("sign must be +1 or -1")
    spec = spec or GridSpec()
    n = tau.n
    K = Polydisc((0j,) * n, (base_radius,) * n)
    margin = STAGE_MARGIN * base_radius

    plans = []
    pieces: list = []
    for j in range(1, J + 1):
        r = K.radii[0]
        esc = escape_index(tau, K)
        m = _first_clear_power(tau, r, gap_factor * r, floor=esc)
        source = _resolve_target(stage_target(targets, j), sign * m)
        if source is None:
            source = SparsePoly.zero(n)
        if source.nvars != n:
            raise PreconditionError(f"stage {j} target is in {source.nvars} variables, expected {n}")
        region = K.translate(tau.shift(sign * m))
        owner = "f" if j % 2 else "g"
        pieces.append(Piece(owner, j, sign * m, region, source, shift_poly(source, sign * m * tau.b),
                            2.0 ** (-j) / 2, 2.0 ** (-J - j - 1)))
        here, there = K.centers[0].real, region.centers[0].real
        lo, hi = min(here, there) - r, max(here, there) + r
        K_next = Polydisc((complex((lo + hi) / 2),) * n, ((hi - lo) / 2 + margin,) * n)
        containment = K_next.contains_region(K) and K_next.contains_region(region)
        plans.append((j, K, sign * m, owner, esc, containment))
        K = K_next

    anchors = [tuple(p.region.centers) for p in pieces] + [(0j,) * n]
    for piece in pieces:
        print(f"  [Info] fitting {piece.owner}_{piece.stage} on τ^{piece.m}(K_{piece.stage}) ...")
        _fit_tracked(piece, pieces, max_degree, [(0j,) * n])

    f = _series(pieces, "f", n, anchors)
    g = _series(pieces, "g", n, anchors)

    stages = []
    for idx, (j, K_j, m, owner, esc, containment) in enumerate(plans):
        stage = BirkhoffStage(j, 2.0 ** (-j), K_j, m, owner, esc, containment)
        stage.conditions["f"] = _condition(pieces, idx, "f", f, spec)
        stage.conditions["g"] = _condition(pieces, idx, "g", g, spec)
        stage.partial_degree_f = _series(pieces[: idx + 1], "f", n, anchors).degree()
        stage.partial_degree_g = _series(pieces[: idx + 1], "g", n, anchors).degree()
        stages.append(stage)
    return f, g, BirkhoffSchedule(tau.b, sign, stages, pieces, K)


@dataclass
class FixedPieceReport:
    m: int
    region: Polydisc
    condition: dict

    def to_json(self) -> dict:
        return {"m": self.m, "region": self.region.to_json(), **self.condition}


@dataclass(frozen=True)
class PiecePlan:
    """Stage ``stage`` wants s ≈ target(m) on τ^m(compact) within ``tol``."""

    stage: int
    compact: Polydisc
    m: int
    target: Target
    tol: float


def series_on_pieces(tau: DiagonalTranslation, plans: Sequence[PiecePlan], max_degree: int = 160,
                     spec: GridSpec | None = None) -> tuple[SparsePoly, list]:
    """
    One series s with |s - target(m)∘τ^{-m}| <= tol on every translate τ^m(compact).
    Each term takes tol/2 on its own piece and min(tol) / (2 count) on the
    others. Returns s and per-piece reports in plan order.
    """
    spec = spec or GridSpec()
    n = tau.n
    if not plans:
        return SparsePoly.zero(n), []
    foreign_tol = min(p.tol for p in plans) / (2 * len(plans))
    pieces: list = []
    for plan in plans:
        if plan.compact.n != n:
            raise PreconditionError("compact and translation live in different dimensions")
        if plan.tol <= 0:
            raise PreconditionError("tolerance must be positive")
        source = _resolve_target(plan.target, plan.m)
        if source is None:
            source = SparsePoly.zero(n)
        region = plan.compact.translate(tau.shift(plan.m))
        pieces.append(Piece("s", plan.stage, plan.m, region, source, shift_poly(source, plan.m * tau.b),
                            plan.tol / 2, foreign_tol))
    for i, p in enumerate(pieces):
        for q in pieces[i + 1:]:
            (c1, r1), (c2, r2) = p.disc, q.disc
            if abs(c1 - c2) <= r1 + r2:
                raise PreconditionError(f"pieces of stages {p.stage} and {q.stage} overlap")

    extra = list(dict.fromkeys(tuple(p.compact.centers) for p in plans)) + [(0j,) * n]
    anchors = [tuple(p.region.centers) for p in pieces] + extra
    for piece in pieces:
        _fit_tracked(piece, pieces, max_degree, extra)
    series = _series(pieces, "s", n, anchors)
    reports = [FixedPieceReport(p.m, p.region, _condition(pieces, i, "s", series, spec)) for i, p in enumerate(pieces)]
    return series, reports


def fixed_compact_series(tau: DiagonalTranslation, K: Polydisc, targets: Sequence[Target], eps: float,
                         sign: int = 1, gap_factor: float = SERIES_GAP_FACTOR, max_degree: int = 160,
                         first_power: int | None = None, spec: GridSpec | None = None) -> tuple[SparsePoly, list]:
    """
    One series s with s ≈ targets[i](m_i) on τ^{m_i}(K) for every i, all pieces
    translates of the same compact, consecutive ones ``gap_factor`` radii apart.
    """
    if K.n != tau.n:
        raise PreconditionError("compact and translation live in different dimensions")
    r = max(K.radii)
    floor = max(escape_index(tau, K), first_power or 1)
    plans, m = [], 0
    for stage, target in enumerate(targets, start=1):
        if target is None:
            continue
        if not plans:
            m = _first_clear_power(tau, r, gap_factor * r, floor=floor)
        else:
            m = _first_clear_power(tau, r, gap_factor * r, after=m)
        plans.append(PiecePlan(stage, K, sign * m, target, eps))
    return series_on_pieces(tau, plans, max_degree, spec)


# === orbit errors ===

@dataclass
class OrbitCurve:
    rows: list  # [(m, sup_error)]

    @property
    def argmin(self) -> int | None:
        if not self.rows:
            return None
        return min(self.rows, key=lambda row: (row[1], row[0]))[0]

    def to_json(self) -> dict:
        return {"rows": [{"m": m, "sup_error": e} for m, e in self.rows], "argmin": self.argmin}


def hypercyclic_orbit_error(f: SparsePoly, tau: DiagonalTranslation, target: SparsePoly, K: Region,
                            m_range: Sequence[int], spec: GridSpec | None = None) -> OrbitCurve:
    """sup over K's grid of |f(z + m b) - target(z)| for each m."""
    spec = spec or GridSpec()
    pts = K.grid(spec)
    expected = eval_grid(target, pts)
    rows = []
    for m in m_range:
        with np.errstate(over="ignore", invalid="ignore"):
            err = np.abs(eval_grid(f, pts + m * tau.b) - expected)
        rows.append((int(m), float(err.max()) if np.all(np.isfinite(err)) else float("inf")))
    return OrbitCurve(rows)
