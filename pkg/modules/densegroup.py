"""
Dense-subgroup experiments for the translation tau and a single shear F_{0,g}:
conjugation by translation powers, target approximation with error
propagation, the two-generator experiment with its freeness report, orbits of
the conjugation operator, and the staged schedule bookkeeping.

Every distance between maps is the sup over a deterministic grid of the
Euclidean distance between images.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from modules.expsum import SemiSymbolicMap
from modules.polycore import GaussianRational, SparsePoly
from modules.regions import GridSpec, PointHull, Polydisc, Region, RegionUnion, bounding_polydisc
from modules.runge import (
    SERIES_GAP_FACTOR,
    InfeasibleToleranceError,
    PiecePlan,
    fixed_compact_series,
    series_on_pieces,
    shift_poly,
)
from modules.shearcalc import (
    AutWord,
    MapGenerator,
    OvershearGen,
    as_map,
    cyclic_as_F_shift,
    degree_growth_report,
    enumerate_reduced_words,
    lipschitz_estimate,
    make_F,
    random_rational_poly,
    reduce_word,
    reduced_word_count,
    verify_identity,
    word_margin,
)
from modules.translations import DiagonalTranslation, escape_index

LIPSCHITZ_SAFETY = 1.1
COMPACT_MARGIN = 0.05
DEFAULT_SCAN = 64
MARGIN_THRESHOLD = 1e-3


class UnrepresentableTargetError(ValueError):
    pass


class ScheduleInfeasibleError(ArithmeticError):
    def __init__(self, message: str, stage: int | None = None, word: str | None = None):
        super().__init__(message)
        self.stage = stage
        self.word = word


# === targets ===

@dataclass(frozen=True)
class ShearTarget:
    """The shear F_{0,h} of C^n; h is a polynomial in (z_2, ..., z_n)."""

    n: int
    h: SparsePoly
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise UnrepresentableTargetError(f"shear targets need n >= 2, got {self.n}")
        if self.h.nvars != self.n - 1:
            raise UnrepresentableTargetError(f"h must be a polynomial in {self.n - 1} variables, got {self.h.nvars}")

    @classmethod
    def cyclic(cls, n: int) -> "ShearTarget":
        return cls(n, cyclic_as_F_shift(n), "I")

    @property
    def generator(self) -> OvershearGen:
        return make_F(self.n, None, self.h)

    def name(self) -> str:
        return self.label or f"F_(0,{self.h!r})"


@dataclass(frozen=True)
class TargetWord:
    """factors[0] ∘ factors[1] ∘ ... ; the empty word is the identity."""

    n: int
    factors: tuple = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if not isinstance(f, ShearTarget) or f.n != self.n:
                raise UnrepresentableTargetError("composite targets are built from shear targets of the same dimension")

    def name(self) -> str:
        if self.label:
            return self.label
        return " ∘ ".join(f.name() for f in self.factors) if self.factors else "id"

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        out = np.asarray(points, dtype=complex)
        for f in reversed(self.factors):
            out = f.generator.apply(out)
        return out


TargetLike = Union[ShearTarget, TargetWord]


def as_target_word(target: TargetLike) -> TargetWord:
    if isinstance(target, TargetWord):
        return target
    if isinstance(target, ShearTarget):
        return TargetWord(target.n, (target,), target.label)
    raise UnrepresentableTargetError(f"{type(target).__name__} is not a shear target")


# === distances ===

def _evaluator(item) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(item, MapGenerator):
        return item.apply
    if isinstance(item, (AutWord, SemiSymbolicMap, TargetWord)):
        return item.evaluate
    if isinstance(item, ShearTarget):
        return item.generator.apply
    if callable(item):
        return item
    raise UnrepresentableTargetError(f"cannot evaluate {type(item).__name__}")


@dataclass
class MapDistance:
    compact: Region
    spec: GridSpec
    value: float

    @classmethod
    def measure(cls, a, b, compact: Region, spec: GridSpec | None = None) -> "MapDistance":
        spec = spec or GridSpec()
        points = compact.grid(spec)
        with np.errstate(over="ignore", invalid="ignore"):
            gap = np.linalg.norm(_evaluator(a)(points) - _evaluator(b)(points), axis=1)
        value = float(gap.max()) if np.all(np.isfinite(gap)) else float("inf")
        return cls(compact, spec, value)

    def to_json(self) -> dict:
        return {"compact": self.compact.to_json(), "grid": self.spec.to_json(), "value": self.value}


# === conjugation ===

def drift_constant(n: int, m: int, b) -> GaussianRational:
    """The constant picked up by the last component of τ^{-m} ∘ F_{0,g} ∘ τ^{m}."""
    return GaussianRational.coerce(b) * (-2 * (-1) ** n * m)


def conjugate_by_power(F, tau: DiagonalTranslation, m: int) -> SemiSymbolicMap:
    """τ^{-m} ∘ F ∘ τ^{m}, exactly."""
    F_map = as_map(F)
    if F_map.n != tau.n:
        raise UnrepresentableTargetError("map and translation live in different dimensions")
    if m == 0:
        return F_map
    return tau.power_map(-m).compose(F_map.compose(tau.power_map(m)))


def conjugation_operator_power(F, tau: DiagonalTranslation, m: int) -> SemiSymbolicMap:
    """C̃_τ^m(F) = τ^{m} ∘ F ∘ τ^{-m}."""
    return conjugate_by_power(F, tau, -m)


def conjugated_shear_poly(g: SparsePoly, n: int, tau: DiagonalTranslation, m: int) -> SparsePoly:
    """g(· + mb) + c: the h with τ^{-m} ∘ F_{0,g} ∘ τ^{m} = F_{0,h}."""
    step = GaussianRational.coerce(tau.b) * m
    return shift_poly(g, -step) + SparsePoly.constant(drift_constant(n, m, tau.b), n - 1)


@dataclass
class DriftCheck:
    n: int
    m: int
    constant: complex
    exact_match: bool
    g_label: str

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "constant": [self.constant.real, self.constant.imag],
                "exact_match": self.exact_match, "g_label": self.g_label}


def drift_check(g: SparsePoly, tau: DiagonalTranslation, m: int, g_label: str = "g") -> DriftCheck:
    """Compare the composed conjugate of F_{0,g} with the closed form F_{0, g(·+mb) + c}."""
    n = tau.n
    composed = conjugate_by_power(make_F(n, None, g), tau, m)
    formula = make_F(n, None, conjugated_shear_poly(g, n, tau, m)).to_map()
    return DriftCheck(n, m, complex(drift_constant(n, m, tau.b)), composed == formula, g_label)


def drift_corrected(h: SparsePoly, n: int, b) -> Callable[[int], SparsePoly]:
    """s -> h + 2(-1)^n s b: the piece target that undoes the conjugation drift at signed power s."""
    step = GaussianRational.coerce(b)

    def target(s: int) -> SparsePoly:
        return h + SparsePoly.constant(step * (2 * (-1) ** n * s), h.nvars)

    return target


def _alphabet(tau: DiagonalTranslation, F: MapGenerator) -> tuple:
    return (("τ", tau), ("F", F))


def conjugate_word(tau: DiagonalTranslation, F: MapGenerator, m: int) -> AutWord:
    return reduce_word(AutWord(_alphabet(tau, F), (("τ", -m), ("F", 1), ("τ", m))))


# === target approximation ===

def shear_compact(K: Polydisc) -> Polydisc:
    """Projection of K to the coordinates (z_2, ..., z_n) the shear polynomial sees."""
    if not isinstance(K, Polydisc) or K.n < 2:
        raise UnrepresentableTargetError("shear experiments run on polydiscs in C^n, n >= 2")
    return Polydisc(K.centers[1:], K.radii[1:])


@dataclass
class CompactChain:
    """Compacts C_i on which factor i of a composite target must be approximated, with Lipschitz constants."""

    compacts: list
    lipschitz: list
    atomic_tolerance: float

    def to_json(self) -> dict:
        return {"compacts": [c.to_json() for c in self.compacts], "lipschitz": self.lipschitz,
                "atomic_tolerance": self.atomic_tolerance}


def compact_chain(word: TargetWord, K: Polydisc, eps: float, spec: GridSpec | None = None) -> CompactChain:
    """
    C_k = K for the first-applied factor, and C_{i-1} is the image of C_i under
    factor i, enlarged by eps plus a relative margin. The atomic tolerance e
    makes the propagated bound e * (1 + L_1 + L_1 L_2 + ...) stay below eps.
    """
    spec = spec or GridSpec()
    k = len(word.factors)
    compacts: list = [None] * k
    lipschitz: list = [0.0] * k
    current: Region = K
    for i in range(k - 1, -1, -1):
        compacts[i] = current
        factor = word.factors[i].generator
        lipschitz[i] = LIPSCHITZ_SAFETY * lipschitz_estimate(factor.apply, current, spec)
        pts = np.concatenate([current.grid(spec), current.boundary_samples(32)], axis=0)
        box = PointHull(factor.apply(pts)).enlarge(0.0)
        current = box.enlarge(eps + COMPACT_MARGIN * max(box.radii))
    total = 0.0
    product = 1.0
    for i in range(k):
        total += product
        product *= lipschitz[i]
    if not math.isfinite(total):
        raise ScheduleInfeasibleError(f"Lipschitz constants of {word.name()} are not finite")
    atomic = eps / (LIPSCHITZ_SAFETY * total) if total else eps
    return CompactChain(compacts, lipschitz, atomic)


@dataclass
class TargetApproximation:
    label: str
    word: AutWord
    powers: list
    achieved: float
    bound: float
    eps: float
    factor_errors: list = field(default_factory=list)
    chain: CompactChain | None = None

    @property
    def ok(self) -> bool:
        return self.achieved <= self.eps and self.bound <= self.eps

    def to_json(self) -> dict:
        return {
            "target": self.label,
            "word": self.word.label(),
            "powers": self.powers,
            "achieved": self.achieved,
            "bound": self.bound,
            "eps": self.eps,
            "factor_errors": self.factor_errors,
            "chain": self.chain.to_json() if self.chain else None,
            "ok": self.ok,
        }


def _best_power(F: OvershearGen, tau: DiagonalTranslation, target: ShearTarget, compact: Region,
                m_range: Sequence[int], spec: GridSpec) -> tuple[int, float]:
    best = (None, math.inf)
    for m in m_range:
        err = MapDistance.measure(conjugate_word(tau, F, m), target, compact, spec).value
        if err < best[1]:
            best = (int(m), err)
    return best


def approximate_target(target: TargetLike, tau: DiagonalTranslation, g: SparsePoly, K: Polydisc, eps: float,
                       m_range: Sequence[int] | None = None, spec: GridSpec | None = None) -> TargetApproximation:
    """
    Word in {τ, F_{0,g}} approximating ``target`` on K. Each shear factor gets
    the power m (searched over ``m_range``) whose conjugate τ^{-m} F τ^{m} is
    closest to it on its compact; composite bounds propagate through measured
    Lipschitz constants of the exact factors.
    """
    spec = spec or GridSpec()
    word = as_target_word(target)
    n = tau.n
    if word.n != n or K.n != n:
        raise UnrepresentableTargetError("target, compact and translation must share the dimension")
    F = make_F(n, None, g)
    alphabet = _alphabet(tau, F)
    if not word.factors:
        return TargetApproximation(word.name(), AutWord(alphabet), [0], 0.0, 0.0, eps)
    m_range = list(m_range) if m_range is not None else list(range(DEFAULT_SCAN + 1))

    chain = compact_chain(word, K, eps, spec)
    powers, errors = [], []
    for factor, compact in zip(word.factors, chain.compacts):
        m, err = _best_power(F, tau, factor, compact, m_range, spec)
        powers.append(m)
        errors.append(err)
    bound = 0.0
    for i in range(len(errors) - 1, -1, -1):
        bound = errors[i] + chain.lipschitz[i] * bound
    letters = []
    for m in powers:
        letters += [("τ", -m), ("F", 1), ("τ", m)]
    approx = reduce_word(AutWord(alphabet, tuple(letters)))
    achieved = MapDistance.measure(approx, word, K, spec).value
    if len(word.factors) == 1:
        bound = achieved
    result = TargetApproximation(word.name(), approx, powers, achieved, bound, eps, errors, chain)
    if bound > eps or achieved > eps:
        worst = int(np.argmax(errors)) + 1
        raise ScheduleInfeasibleError(
            f"{word.name()}: propagated error {bound:.3g} exceeds {eps:.3g} (worst factor {worst})", worst, approx.label())
    return result


# === freeness ===

@dataclass
class FreenessReport:
    max_length: int
    word_count: int
    expected_count: int
    min_margin: float
    min_word: str | None
    threshold: float
    margins: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.word_count == self.expected_count and (self.word_count == 0 or self.min_margin > self.threshold)

    def to_json(self) -> dict:
        return {
            "max_length": self.max_length,
            "word_count": self.word_count,
            "expected_count": self.expected_count,
            "min_margin": self.min_margin,
            "min_word": self.min_word,
            "threshold": self.threshold,
            "ok": self.ok,
            "margins": self.margins,
        }


def freeness_report(tau: DiagonalTranslation, F: MapGenerator, K: Region, max_length: int,
                    threshold: float = MARGIN_THRESHOLD, spec: GridSpec | None = None) -> FreenessReport:
    words = enumerate_reduced_words(_alphabet(tau, F), max_length)
    expected = sum(reduced_word_count(2, k) for k in range(1, max_length + 1))
    margins = []
    best = (math.inf, None)
    for w in words:
        value = word_margin(w, K, spec)
        margins.append({"word": w.label(), "margin": value})
        if value < best[0]:
            best = (value, w.label())
    return FreenessReport(max_length, len(words), expected, best[0], best[1], threshold, margins)


def quadratic_shear_poly(n: int) -> SparsePoly:
    """z_n^2 in the variables (z_2, ..., z_n)."""
    return SparsePoly.variable(n - 2, n - 1) ** 2


# === the two-generator experiment ===

@dataclass
class ExperimentReport:
    n: int
    b: float
    eps: float
    g: SparsePoly
    pieces: list
    results: list
    drift: list
    freeness: FreenessReport
    degree_growth: list
    lipschitz: dict

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results) and all(d.exact_match for d in self.drift) and self.freeness.ok

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "b": self.b,
            "eps": self.eps,
            "g_degree": self.g.degree(),
            "pieces": [p.to_json() for p in self.pieces],
            "targets": [r.to_json() for r in self.results],
            "drift": [d.to_json() for d in self.drift],
            "freeness": self.freeness.to_json(),
            "degree_growth": self.degree_growth,
            "lipschitz": self.lipschitz,
            "ok": self.ok,
        }


def _atomic_factors(words: Sequence[TargetWord]) -> list:
    seen, factors = set(), []
    for w in words:
        for f in w.factors:
            if f.h not in seen:
                seen.add(f.h)
                factors.append(f)
    return factors


def _build_compact(words: Sequence[TargetWord], K: Polydisc, eps: float, spec: GridSpec) -> tuple[Polydisc, float, dict]:
    """One compact in (z_2, ..., z_n) covering every factor's compact, and the common atomic tolerance."""
    parts = [shear_compact(K)]
    tol = eps
    chains = {}
    for w in words:
        if len(w.factors) < 2:
            continue
        chain = compact_chain(w, K, eps, spec)
        chains[w.name()] = chain
        tol = min(tol, chain.atomic_tolerance)
        parts += [shear_compact(c) for c in chain.compacts]
    box = parts[0] if len(parts) == 1 else bounding_polydisc(RegionUnion(tuple(parts)))
    return box, tol, chains


def _series_for_targets(factors: Sequence[ShearTarget], n: int, b: float, build: Polydisc, tol: float, sign: int,
                        max_degree: int, gap_factor: float, spec: GridSpec) -> tuple[SparsePoly, list]:
    tau_shear = DiagonalTranslation(n - 1, b)
    targets = [drift_corrected(f.h, n, b) for f in factors]
    try:
        return fixed_compact_series(tau_shear, build, targets, tol, sign=sign, gap_factor=gap_factor,
                                    max_degree=max_degree, spec=spec)
    except InfeasibleToleranceError as e:
        raise ScheduleInfeasibleError(str(e), e.stage, factors[e.stage - 1].name() if e.stage else None) from e


def two_generator_experiment(tau: DiagonalTranslation, targets: Sequence[TargetLike], K: Polydisc, eps: float,
                             max_degree: int = 160, word_length: int = 4, threshold: float = MARGIN_THRESHOLD,
                             gap_factor: float = SERIES_GAP_FACTOR, spec: GridSpec | None = None) -> ExperimentReport:
    """
    Build ONE g so that every target is approximated within eps on K by a word
    in {τ, F_{0,g}}, then report drift checks, the freeness margins of all
    reduced words up to ``word_length`` and the degree growth of shear words.
    """
    spec = spec or GridSpec()
    n = tau.n
    if K.n != n:
        raise UnrepresentableTargetError("compact and translation live in different dimensions")
    words = [as_target_word(t) for t in targets]
    build, tol, chains = _build_compact(words, K, eps, spec)
    factors = _atomic_factors(words)

    if factors:
        print(f"  [Info] building g for {len(factors)} shear targets (tolerance {tol:.3g}) ...")
        g, pieces = _series_for_targets(factors, n, tau.b, build, tol, 1, max_degree, gap_factor, spec)
    else:
        g, pieces = SparsePoly.zero(n - 1), []
    F = make_F(n, None, g)
    scheduled = {f.h: piece.m for f, piece in zip(factors, pieces)}

    results = []
    for w in words:
        powers = [scheduled[f.h] for f in w.factors]
        m_range = sorted(set(powers)) or [0]
        results.append(approximate_target(w, tau, g, K, eps, m_range=m_range, spec=spec))

    drift = [drift_check(g, tau, piece.m) for piece in pieces]
    freeness = freeness_report(tau, F, K, word_length, threshold, spec)
    growth_alphabet = _alphabet(tau, make_F(n, None, quadratic_shear_poly(n)))
    growth = degree_growth_report(enumerate_reduced_words(growth_alphabet, min(word_length, 3)))
    lipschitz = {name: chain.lipschitz for name, chain in chains.items()}
    return ExperimentReport(n, tau.b, eps, g, pieces, results, drift, freeness, growth, lipschitz)


# === conjugation operator orbits ===

def build_orbit_generator(tau: DiagonalTranslation, targets: Sequence[ShearTarget], K: Polydisc, eps: float,
                          max_degree: int = 160, gap_factor: float = SERIES_GAP_FACTOR,
                          spec: GridSpec | None = None) -> tuple[OvershearGen, list]:
    """F_{0,g} whose C̃_τ-orbit passes within eps of every target on K (pieces on the negative ray)."""
    spec = spec or GridSpec()
    n = tau.n
    if not targets:
        return make_F(n, None, SparsePoly.zero(n - 1)), []
    g, pieces = _series_for_targets(list(targets), n, tau.b, shear_compact(K), eps, -1, max_degree, gap_factor, spec)
    return make_F(n, None, g), pieces


@dataclass
class OrbitStage:
    j: int
    target: str
    m: int
    error: float
    eps: float
    k: int

    def to_json(self) -> dict:
        return {"j": self.j, "target": self.target, "m": self.m, "error": self.error, "eps": self.eps, "k": self.k}


@dataclass
class OrbitReport:
    stages: list
    nested: bool
    action_checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s.error <= s.eps for s in self.stages) and self.nested and all(c.verdict for c in self.action_checks)

    def to_json(self) -> dict:
        return {
            "stages": [s.to_json() for s in self.stages],
            "nested": self.nested,
            "action_checks": [c.to_json() for c in self.action_checks],
            "ok": self.ok,
        }


def orbit_word(tau: DiagonalTranslation, F: MapGenerator, m: int) -> AutWord:
    return reduce_word(AutWord(_alphabet(tau, F), (("τ", m), ("F", 1), ("τ", -m))))


def _compact_indices(compacts: Sequence[Region]) -> tuple[list, bool]:
    """k(j) for each compact (position among the distinct compacts) and whether consecutive ones are nested."""
    indices, k = [], 0
    nested = True
    for j, L in enumerate(compacts):
        if j and L != compacts[j - 1]:
            k += 1
            prev = compacts[j - 1]
            if isinstance(L, Polydisc) and isinstance(prev, Polydisc):
                nested = nested and L.contains_region(prev)
        indices.append(k + 1)
    return indices, nested


def _target_label(target) -> str:
    if isinstance(target, (ShearTarget, TargetWord)):
        return target.name()
    if isinstance(target, AutWord):
        return target.label()
    return type(target).__name__


def conjugation_orbit(F: MapGenerator, tau: DiagonalTranslation, targets: Sequence, compacts: Sequence[Region],
                      eps_list: Sequence[float], m_range: Sequence[int] | None = None,
                      spec: GridSpec | None = None) -> OrbitReport:
    """First m in ``m_range`` (default 0..64) with MapDistance(C̃_τ^m F, target_j, L_j) <= eps_j, per target."""
    spec = spec or GridSpec()
    if not len(targets) == len(compacts) == len(eps_list):
        raise UnrepresentableTargetError("one compact and one tolerance per target are required")
    m_range = list(m_range) if m_range is not None else list(range(DEFAULT_SCAN + 1))
    ks, nested = _compact_indices(compacts)
    stages = []
    for j, (target, L, eps, k) in enumerate(zip(targets, compacts, eps_list, ks), start=1):
        hit, best = None, math.inf
        for m in m_range:
            err = MapDistance.measure(orbit_word(tau, F, m), target, L, spec).value
            best = min(best, err)
            if err <= eps:
                hit = (m, err)
                break
        label = _target_label(target)
        if hit is None:
            raise ScheduleInfeasibleError(f"stage {j}: {label} not reached within {eps:.3g} (best {best:.3g})", j, label)
        print(f"  [Info] stage {j}: {label} at m={hit[0]} (error {hit[1]:.3g})")
        stages.append(OrbitStage(j, label, hit[0], hit[1], eps, k))
    return OrbitReport(stages, nested)


def group_action_checks(tau: DiagonalTranslation, m1: int, m2: int, seed: int = 0, degree: int = 2) -> list:
    """C̃^{m1+m2} = C̃^{m1} ∘ C̃^{m2} and C̃(F ∘ G) = C̃(F) ∘ C̃(G), exactly, on seeded random shears."""
    n = tau.n
    rng = np.random.default_rng(seed)
    F = make_F(n, None, random_rational_poly(rng, n - 1, degree)).to_map()
    G = make_F(n, None, random_rational_poly(rng, n - 1, degree)).to_map()
    K = Polydisc.unit(n)
    total = conjugation_operator_power(F, tau, m1 + m2)
    stepwise = conjugation_operator_power(conjugation_operator_power(F, tau, m2), tau, m1)
    product = conjugation_operator_power(F.compose(G), tau, m1)
    separate = conjugation_operator_power(F, tau, m1).compose(conjugation_operator_power(G, tau, m1))
    return [
        verify_identity(total, stepwise, K, label=f"C^{m1 + m2} = C^{m1} o C^{m2}"),
        verify_identity(product, separate, K, label=f"C^{m1}(F o G) = C^{m1}(F) o C^{m1}(G)"),
    ]


# === stage schedule ===

@dataclass
class StageRecord:
    j: int
    target: str
    eps: float
    k: int
    m: int
    delta: float
    delta_word: str | None
    C: float
    compact: Polydisc
    achieved: float | None = None
    auto_satisfied: bool = False
    tail_bound: float = 0.0

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "target": self.target,
            "eps": self.eps,
            "k": self.k,
            "m": self.m,
            "delta": self.delta,
            "delta_word": self.delta_word,
            "C": self.C,
            "tail_bound": self.tail_bound,
            "compact": self.compact.to_json(),
            "achieved": self.achieved,
            "auto_satisfied": self.auto_satisfied,
        }


@dataclass
class StageSchedule:
    stages: list
    compacts: list

    def violations(self, tau: DiagonalTranslation) -> list:
        problems = []
        eps = [s.eps for s in self.stages]
        if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            problems.append("tolerances are not positive and strictly decreasing")
        ks = [s.k for s in self.stages]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            problems.append("compact indices are not strictly increasing")
        for j, later in enumerate(self.stages):
            for earlier in self.stages[:j]:
                moved = self.compacts[earlier.k - 1].translate(tau.shift(earlier.m))
                if not self.compacts[later.k - 1].contains_region(moved):
                    problems.append(f"τ^{earlier.m}(L_{earlier.k}) is not inside L_{later.k}")
        for j, s in enumerate(self.stages):
            tail = sum(t.C * t.eps for t in self.stages[j + 1:])
            if not s.delta > tail:
                problems.append(f"stage {s.j}: margin {s.delta:.3g} does not dominate tail {tail:.3g}")
        return problems

    def record_achieved(self, j: int, error: float) -> None:
        self.stages[j - 1].achieved = error

    def unmet(self) -> list:
        """Stages whose recorded achieved error exceeds their tolerance."""
        return [s for s in self.stages if s.achieved is not None and not s.achieved <= s.eps]

    def to_json(self) -> dict:
        return {"stages": [s.to_json() for s in self.stages], "compacts": [c.to_json() for c in self.compacts]}


def covering_compact(regions: Sequence[Polydisc]) -> Polydisc:
    """A polydisc holding every given polydisc in its interior."""
    return bounding_polydisc(RegionUnion(tuple(regions))).enlarge(1.0)


def _stage_requirements(stages: Sequence, compacts: Sequence[Polydisc], tau: DiagonalTranslation) -> list:
    required = []
    for s in stages:
        L = compacts[s.k - 1]
        required += [L, L.translate(tau.shift(s.m))]
    return required


def _is_identity_target(target: TargetLike) -> bool:
    return not as_target_word(target).factors


def schedule_build(targets: Sequence[TargetLike], base_compacts: Sequence[Polydisc], tau: DiagonalTranslation,
                   F: MapGenerator | None = None, eps0: float = 1e-2, max_word_length: int = 4,
                   spec: GridSpec | None = None) -> StageSchedule:
    """
    Stage bookkeeping for finitely many targets: k(j) from the containment
    condition, m_j from the escape index, δ_j as the smallest word margin over
    reduced words in {τ, F} of length <= j, and tolerances chosen so that
    Σ_{k>j} C_k ε_k <= δ_j / 2.
    """
    spec = spec or GridSpec()
    if not targets:
        return StageSchedule([], list(base_compacts))
    n = tau.n
    F = F or make_F(n, None, quadratic_shear_poly(n))
    compacts = list(base_compacts)
    if not compacts:
        compacts = [Polydisc.unit(n)]
    alphabet = _alphabet(tau, F)

    stages: list = []
    for j, target in enumerate(targets, start=1):
        label = as_target_word(target).name()
        if not stages:
            k = 1
        else:
            required = _stage_requirements(stages, compacts, tau)
            k = stages[-1].k + 1
            while k <= len(compacts) and not all(compacts[k - 1].contains_region(R) for R in required):
                k += 1
            if k > len(compacts):
                compacts.append(covering_compact(required))
                k = len(compacts)
        L = compacts[k - 1]
        m = escape_index(tau, L)
        if stages:
            m = max(m, stages[-1].m + 1)

        length = min(j, max_word_length)
        delta, delta_word = math.inf, None
        for w in enumerate_reduced_words(alphabet, length):
            value = word_margin(w, L, spec)
            if value < delta:
                delta, delta_word = value, w.label()
        if not delta > 0:
            raise ScheduleInfeasibleError(f"stage {j}: word {delta_word} collapses on L_{k}", j, delta_word)

        lip = LIPSCHITZ_SAFETY * lipschitz_estimate(F.apply, L.enlarge(1.0), spec)
        if not math.isfinite(lip):
            raise ScheduleInfeasibleError(f"stage {j}: F has no finite Lipschitz bound on L_{k}", j, "F")
        lip = max(lip, 1.0)
        C = sum(lip ** i for i in range(length))

        if not stages:
            eps = eps0
        else:
            eps = stages[-1].eps / 2
            for s in stages:
                eps = min(eps, s.delta * 2.0 ** (-(j - s.j)) / (2 * C))
        if not eps > 0:
            raise ScheduleInfeasibleError(f"stage {j}: no positive tolerance fits the margins", j, delta_word)

        auto = _is_identity_target(target) and j == 1
        print(f"  [Info] stage {j}: k={k}, m={m}, δ={delta:.3g}, ε={eps:.3g}")
        stages.append(StageRecord(j, label, eps, k, m, delta, delta_word, C, L, 0.0 if auto else None, auto))

    for j, s in enumerate(stages):
        s.tail_bound = sum(t.C * t.eps for t in stages[j + 1:])
    schedule = StageSchedule(stages, compacts)
    problems = schedule.violations(tau)
    if problems:
        raise ScheduleInfeasibleError("; ".join(problems), None)
    return schedule


def realize_schedule(schedule: StageSchedule, targets: Sequence[TargetLike], tau: DiagonalTranslation,
                     max_degree: int = 160, spec: GridSpec | None = None) -> OvershearGen:
    """
    One F = F_{0,g} for the whole schedule: g takes the drift-corrected target
    of stage j on τ^{m_j}(L_{k(j)}) within ε_j, and the achieved
    sup d(τ^{-m_j} ∘ F ∘ τ^{m_j}, g_j) on L_{k(j)} is recorded per stage.
    Auto-satisfied stages keep their zero.
    """
    spec = spec or GridSpec()
    n = tau.n
    if len(targets) != len(schedule.stages):
        raise UnrepresentableTargetError("one target per schedule stage is required")
    plans, shears = [], []
    for stage, target in zip(schedule.stages, targets):
        if stage.auto_satisfied:
            continue
        word = as_target_word(target)
        if len(word.factors) != 1:
            raise UnrepresentableTargetError(f"stage {stage.j}: only single shears can be realized, got {word.name()}")
        factor = word.factors[0]
        plans.append(PiecePlan(stage.j, shear_compact(stage.compact), stage.m, drift_corrected(factor.h, n, tau.b), stage.eps))
        shears.append((stage, factor))
    try:
        g, _ = series_on_pieces(DiagonalTranslation(n - 1, tau.b), plans, max_degree, spec)
    except InfeasibleToleranceError as e:
        raise ScheduleInfeasibleError(str(e), e.stage, None) from e
    F = make_F(n, None, g)
    for stage, factor in shears:
        err = MapDistance.measure(conjugate_word(tau, F, stage.m), factor, stage.compact, spec).value
        schedule.record_achieved(stage.j, err)
    return F
