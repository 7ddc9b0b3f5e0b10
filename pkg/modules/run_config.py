"""
Run configuration: one pydantic model per subcommand, loaded from a JSON file
with command-line overrides merged on top before validation.
"""
from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Literal, Optional

import sympy
from sympy.polys.polyerrors import BasePolynomialError
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from modules.densegroup import ShearTarget, TargetWord
from modules.polycore import GaussianRational, SparsePoly
from modules.regions import Polydisc, RegionUnion
from modules.runge import SERIES_GAP_FACTOR

SUBCOMMANDS = ("identities", "runge", "birkhoff", "conjugate", "dense2gen", "danielewski", "zajac", "schedule")
DEFAULT_OUT_DIR = "reports"


class ConfigError(ValueError):
    pass


# === polynomial strings ===

def shear_variables(n: int) -> list:
    """Names of the variables (z_2, ..., z_n) a shear polynomial is written in."""
    return [f"z{i}" for i in range(2, n + 1)]


def parse_poly(text: str, names: list) -> SparsePoly:
    """Exact SparsePoly from an expression such as 'z2**2 - 1/2*I*z2'."""
    symbols = sympy.symbols(names)
    if not isinstance(symbols, (list, tuple)):
        symbols = (symbols,)
    local = {name: sym for name, sym in zip(names, symbols)}
    try:
        expr = sympy.sympify(str(text), locals=local)
        stray = expr.free_symbols - set(symbols)
        if stray:
            raise ConfigError(f"{text!r} uses unknown variables {sorted(str(s) for s in stray)}; expected {', '.join(names)}")
        poly = sympy.Poly(expr, *symbols)
    except (sympy.SympifyError, BasePolynomialError, TypeError, AttributeError) as e:
        raise ConfigError(f"cannot read {text!r} as a polynomial in {', '.join(names)}: {e}") from e
    mapping = []
    for monom, coeff in poly.terms():
        re, im = sympy.re(coeff), sympy.im(coeff)
        mapping.append((monom, GaussianRational(Fraction(str(sympy.Rational(re))), Fraction(str(sympy.Rational(im))))))
    return SparsePoly.from_terms(len(names), mapping)


def parse_scalar(text: str) -> GaussianRational:
    """Exact complex number from an expression such as '1/2 + 3*I'."""
    poly = parse_poly(text, ["z"])
    if poly.degree() > 0:
        raise ConfigError(f"{text!r} is not a constant")
    return GaussianRational.coerce(poly.coefficient((0,)))


# === shared pieces ===

class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DiscModel(StrictModel):
    center: float | list[float] = 0.0
    radius: float = Field(1.0, gt=0)

    @property
    def complex_center(self) -> complex:
        if isinstance(self.center, list):
            if len(self.center) != 2:
                raise ConfigError("a centre is a number or a [re, im] pair")
            return complex(self.center[0], self.center[1])
        return complex(self.center)


class PolydiscModel(StrictModel):
    centers: list[float | list[float]]
    radii: list[float]

    def build(self) -> Polydisc:
        centers = [complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in self.centers]
        return Polydisc(tuple(centers), tuple(self.radii))


class TargetModel(StrictModel):
    """{"kind": "I"}, {"kind": "id"}, {"kind": "shear", "h": "z2**2"} or {"kind": "word", "factors": [...]}."""

    kind: Literal["I", "id", "shear", "word"]
    h: Optional[str] = None
    factors: list["TargetModel"] = []
    label: str = ""

    def build(self, n: int):
        if self.kind == "I":
            return ShearTarget.cyclic(n)
        if self.kind == "id":
            return TargetWord(n, (), self.label or "id")
        if self.kind == "shear":
            if self.h is None:
                raise ConfigError("a shear target needs h")
            return ShearTarget(n, parse_poly(self.h, shear_variables(n)), self.label or f"F_(0,{self.h})")
        factors = []
        for f in self.factors:
            built = f.build(n)
            factors += list(built.factors) if isinstance(built, TargetWord) else [built]
        return TargetWord(n, tuple(factors), self.label)


TargetModel.model_rebuild()


class CommonConfig(StrictModel):
    seed: int = 0
    grid: int = Field(9, ge=2)


# === per-subcommand configs ===

class IdentitiesConfig(CommonConfig):
    n: int = Field(2, ge=2)
    dims: Optional[list[int]] = None
    degree: int = Field(3, ge=0)

    def dimensions(self) -> list:
        return self.dims or [self.n]


class RungeConfig(CommonConfig):
    n: int = Field(1, ge=1)
    coordinate: int = 0
    K1: list[DiscModel] = [DiscModel(center=0.0, radius=1.0)]
    K2: list[DiscModel] = [DiscModel(center=8.0, radius=1.0)]
    h1: Optional[str] = None
    h2: Optional[str] = None
    tol: float = Field(1e-6, gt=0)
    max_degree: int = Field(80, ge=0)
    degrees: list[int] = [20, 40, 80]

    def pieces(self, discs: list) -> object:
        parts = tuple(
            Polydisc(tuple(d.complex_center if k == self.coordinate else 0j for k in range(self.n)), (d.radius,) * self.n)
            for d in discs
        )
        return parts[0] if len(parts) == 1 else RegionUnion(parts)

    def variables(self) -> list:
        return ["z"] if self.n == 1 else [f"z{i}" for i in range(1, self.n + 1)]


class BirkhoffConfig(CommonConfig):
    b: float = Field(5.0, gt=0)
    J: int = Field(3, ge=1)
    base_radius: float = Field(1.0, gt=0)
    gap_factor: float = Field(6.0, gt=0)
    max_degree: int = Field(160, ge=1)
    targets: Optional[list[list[Optional[str]]]] = None
    interleaved: Optional[list[str]] = ["1", "z", "z**2"]
    curve_span: int = Field(8, ge=0)

    def stage_targets(self) -> list:
        """(odd, even) target pairs; stage j reads pair ceil(j/2), so an interleaved list t_1, t_2, ... is used in order."""
        if self.targets is not None:
            pairs = [tuple(p) for p in self.targets]
            if any(len(p) != 2 for p in pairs):
                raise ConfigError("every stage needs an (odd, even) target pair")
        else:
            seq = self.interleaved or ["0"]
            flat = [seq[i % len(seq)] for i in range(2 * self.J)]
            pairs = [(flat[2 * j], flat[2 * j + 1]) for j in range(self.J)]
        return [tuple(None if t is None else parse_poly(t, ["z"]) for t in p) for p in pairs]


class ConjugateConfig(CommonConfig):
    n: int = Field(2, ge=2)
    b: float = Field(1.0, gt=0)
    g: str = "z2**2"
    m: int = 2
    dims: list[int] = [2, 3]
    points: int = Field(50, ge=1)
    orbit_targets: list[TargetModel] = []
    orbit_eps: list[float] = []
    orbit_radii: list[float] = []
    orbit_gap_factor: float = Field(SERIES_GAP_FACTOR, gt=0)
    max_degree: int = Field(160, ge=1)

    @field_validator("orbit_eps")
    @classmethod
    def _positive(cls, v):
        if any(e <= 0 for e in v):
            raise ValueError("orbit tolerances must be positive")
        return v


class Dense2GenConfig(CommonConfig):
    n: int = Field(2, ge=2)
    b: float = Field(1.0, gt=0)
    radius: float = Field(1.0, gt=0)
    targets: list[TargetModel] = [
        TargetModel(kind="I"),
        TargetModel(kind="shear", h="z2"),
        TargetModel(kind="shear", h="z2**2"),
    ]
    tol: float = Field(1e-3, gt=0)
    max_degree: int = Field(160, ge=1)
    word_length: int = Field(4, ge=1)
    threshold: float = Field(1e-3, ge=0)
    gap_factor: float = Field(SERIES_GAP_FACTOR, gt=0)


class DanielewskiConfig(CommonConfig):
    p: str = "z**2 - 1"
    a: str = "1"
    pairs: int = Field(10, ge=0)
    samples: int = Field(50, ge=1)
    m_max: int = Field(10, ge=1)
    product_kind: Optional[str] = "C×Y"
    product_a: str = "2"
    product_r: list[float] = [0.5, 2.0]


class ZajacConfig(CommonConfig):
    n: int = Field(2, ge=1)
    b: float = Field(1.0, gt=0)
    radius: float = Field(1.0, gt=0)
    m_values: list[int] = [2, 3]
    m_max: int = Field(10, ge=1)
    samples: int = Field(24, ge=1)


class ScheduleConfig(CommonConfig):
    n: int = Field(2, ge=2)
    b: float = Field(1.0, gt=0)
    g: str = "z2**2"
    targets: list[TargetModel] = [TargetModel(kind="id"), TargetModel(kind="shear", h="z2")]
    compacts: list[PolydiscModel] = []
    eps0: float = Field(1e-2, gt=0)
    max_word_length: int = Field(4, ge=1)
    realize: bool = True
    max_degree: int = Field(160, ge=1)


CONFIG_MODELS = {
    "identities": IdentitiesConfig,
    "runge": RungeConfig,
    "birkhoff": BirkhoffConfig,
    "conjugate": ConjugateConfig,
    "dense2gen": Dense2GenConfig,
    "danielewski": DanielewskiConfig,
    "zajac": ZajacConfig,
    "schedule": ScheduleConfig,
}

# flag name -> config field, per subcommand
OVERRIDES = {
    "seed": "seed",
    "grid": "grid",
    "tol": {"runge": "tol", "dense2gen": "tol", "schedule": "eps0"},
    "max_degree": {"runge": "max_degree", "birkhoff": "max_degree", "dense2gen": "max_degree", "conjugate": "max_degree",
                   "schedule": "max_degree"},
    "n": {"identities": "n", "runge": "n", "conjugate": "n", "dense2gen": "n", "zajac": "n", "schedule": "n"},
}


class RunConfig(StrictModel):
    """Everything one CLI invocation needs: the subcommand, its validated settings and where to write."""

    subcommand: Literal["identities", "runge", "birkhoff", "conjugate", "dense2gen", "danielewski", "zajac", "schedule"]
    config_path: Optional[str] = None
    out_dir: str
    settings: CommonConfig

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, "config_path": self.config_path, "settings": self.settings.model_dump(mode="json")}


def load_run_config(subcommand: str, config_path: str | None, out_dir: str | None, overrides: dict) -> RunConfig:
    """Read the JSON file (if any), merge flag overrides and validate. Raises ConfigError on any problem."""
    if subcommand not in CONFIG_MODELS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    data: dict = {}
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {config_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {config_path} must hold a JSON object")
    for flag, value in overrides.items():
        if value is None:
            continue
        target = OVERRIDES.get(flag)
        if isinstance(target, dict):
            target = target.get(subcommand)
        if target is None:
            print(f"[Warning] --{flag.replace('_', '-')} has no meaning for {subcommand}, ignored")
            continue
        data[target] = value
    try:
        settings = CONFIG_MODELS[subcommand].model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid {subcommand} config: {e}") from e
    out = out_dir or os.getenv("SHEARLAB_OUT_DIR", DEFAULT_OUT_DIR)
    return RunConfig(subcommand=subcommand, config_path=config_path, out_dir=out, settings=settings)
