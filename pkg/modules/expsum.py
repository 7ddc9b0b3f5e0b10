"""
Exponential-polynomial expressions: finite sums  c_k(z) * exp(E_k(z))  where the
c_k are sparse polynomials and the E_k are themselves such sums.

This is the scalar ring the shear maps live in once a non-zero multiplier
function enters: it is closed under +, *, exp, substitution and
differentiation, and evaluation is a plain numeric walk.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from modules.polycore import (
    EXACT,
    FLOAT,
    DimensionMismatchError,
    PolyError,
    SparsePoly,
    eval_grid,
    poly_derivative,
    poly_eval,
)


@dataclass(frozen=True)
class ExpSum:
    nvars: int
    terms: tuple  # ((exponent ExpSum, coefficient SparsePoly), ...), canonical order

    # --- construction ---

    @classmethod
    def zero(cls, nvars: int) -> "ExpSum":
        return cls(nvars, ())

    @classmethod
    def from_poly(cls, p: SparsePoly) -> "ExpSum":
        if p.is_zero():
            return cls.zero(p.nvars)
        return cls(p.nvars, ((cls.zero(p.nvars), p),))

    @classmethod
    def constant(cls, value, nvars: int, mode: str = EXACT) -> "ExpSum":
        return cls.from_poly(SparsePoly.constant(value, nvars, mode))

    @classmethod
    def variable(cls, index: int, nvars: int, mode: str = EXACT) -> "ExpSum":
        return cls.from_poly(SparsePoly.variable(index, nvars, mode))

    @classmethod
    def _collect(cls, nvars: int, acc: dict) -> "ExpSum":
        items = [(e, c) for e, c in acc.items() if not c.is_zero()]
        items.sort(key=lambda item: item[0].sort_key)
        return cls(nvars, tuple(items))

    @cached_property
    def sort_key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    # --- inspection ---

    def is_zero(self) -> bool:
        return not self.terms

    def is_polynomial(self) -> bool:
        return all(e.is_zero() for e, _ in self.terms)

    def as_poly(self, mode: str = EXACT) -> SparsePoly:
        if not self.is_polynomial():
            raise PolyError("expression contains exponential factors")
        if not self.terms:
            return SparsePoly.zero(self.nvars, mode)
        return self.terms[0][1]

    # --- ring operations ---

    def _lift(self, other) -> "ExpSum":
        if isinstance(other, ExpSum):
            if other.nvars != self.nvars:
                raise DimensionMismatchError("expressions in different variable counts")
            return other
        if isinstance(other, SparsePoly):
            return ExpSum.from_poly(other)
        mode = EXACT if isinstance(other, int) else FLOAT
        return ExpSum.constant(other, self.nvars, mode)

    def __add__(self, other):
        other = self._lift(other)
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = acc[e] + c if e in acc else c
        return ExpSum._collect(self.nvars, acc)

    __radd__ = __add__

    def __neg__(self):
        return ExpSum(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        acc: dict = {}
        for ea, ca in self.terms:
            for eb, cb in other.terms:
                e = ea + eb
                c = ca * cb
                acc[e] = acc[e] + c if e in acc else c
        return ExpSum._collect(self.nvars, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise PolyError("negative powers are not supported")
        result = ExpSum.constant(1, self.nvars)
        for _ in range(k):
            result = result * self
        return result

    def exp(self) -> "ExpSum":
        if self.is_zero():
            return ExpSum.constant(1, self.nvars)
        return ExpSum(self.nvars, ((self, SparsePoly.one(self.nvars)),))

    # --- calculus ---

    def substitute(self, args: Sequence["ExpSum"]) -> "ExpSum":
        """Replace variable i by ``args[i]``."""
        if len(args) != self.nvars:
            raise DimensionMismatchError(f"{len(args)} arguments for {self.nvars} variables")
        m = args[0].nvars if args else self.nvars
        result = ExpSum.zero(m)
        powers = [[ExpSum.constant(1, m)] for _ in args]
        for e, c in self.terms:
            coeff = _poly_in_expsums(c, args, powers, m)
            if e.is_zero():
                result = result + coeff
            else:
                result = result + coeff * e.substitute(args).exp()
        return result

    def derivative(self, var: int) -> "ExpSum":
        result = ExpSum.zero(self.nvars)
        for e, c in self.terms:
            dc = ExpSum.from_poly(poly_derivative(c, var))
            if e.is_zero():
                result = result + dc
                continue
            factor = ExpSum(self.nvars, ((e, SparsePoly.one(self.nvars)),))
            result = result + (dc + ExpSum.from_poly(c) * e.derivative(var)) * factor
        return result

    # --- numerics ---

    def evaluate(self, point: Sequence) -> complex:
        point = [complex(v) for v in point]
        total = 0j
        for e, c in self.terms:
            val = complex(poly_eval(c, point))
            if not e.is_zero():
                val *= np.exp(e.evaluate(point))
            total += val
        return total

    def eval_grid(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, self.nvars)
        out = np.zeros(points.shape[0], dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            for e, c in self.terms:
                val = eval_grid(c, points)
                if not e.is_zero():
                    val = val * np.exp(e.eval_grid(points))
                out = out + val
        return out

    def to_json(self) -> list:
        return [[e.to_json(), c.to_json()] for e, c in self.terms]

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            parts.append(f"({c!r})" if e.is_zero() else f"({c!r})*exp({e!r})")
        return " + ".join(parts)


def _poly_in_expsums(p: SparsePoly, args: Sequence[ExpSum], powers: list, m: int) -> ExpSum:
    result = ExpSum.zero(m)
    for exp, c in p.terms:
        term = ExpSum.from_poly(SparsePoly.constant(c, m, p.mode))
        for i, k in enumerate(exp):
            if k:
                table = powers[i]
                while len(table) <= k:
                    table.append(table[-1] * args[i])
                term = term * table[k]
        result = result + term
    return result


def as_expsum(value, nvars: int) -> ExpSum:
    if isinstance(value, ExpSum):
        return value
    if isinstance(value, SparsePoly):
        return ExpSum.from_poly(value)
    if value is None:
        return ExpSum.zero(nvars)
    return ExpSum.constant(value, nvars, EXACT if isinstance(value, int) else FLOAT)


@dataclass(frozen=True)
class SemiSymbolicMap:
    """A self-map of C^n whose components are ExpSum expressions."""

    n: int
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.n:
            raise DimensionMismatchError(f"{len(self.components)} components for dimension {self.n}")

    @classmethod
    def identity(cls, n: int) -> "SemiSymbolicMap":
        return cls(n, tuple(ExpSum.variable(i, n) for i in range(n)))

    @classmethod
    def from_polymap(cls, pm) -> "SemiSymbolicMap":
        return cls(pm.n, tuple(ExpSum.from_poly(c) for c in pm.components))

    def compose(self, other: "SemiSymbolicMap") -> "SemiSymbolicMap":
        """self ∘ other."""
        if other.n != self.n:
            raise DimensionMismatchError("maps of different dimension")
        return SemiSymbolicMap(self.n, tuple(c.substitute(other.components) for c in self.components))

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for c in self.components)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, self.n)
        return np.stack([c.eval_grid(points) for c in self.components], axis=1)

    def jacobian(self) -> list:
        return [[c.derivative(j) for j in range(self.n)] for c in self.components]

    def jacobian_determinant(self) -> ExpSum:
        return determinant(self.jacobian())

    def __eq__(self, other):
        if not isinstance(other, SemiSymbolicMap):
            return NotImplemented
        return self.n == other.n and all((a - b).is_zero() for a, b in zip(self.components, other.components))

    def __hash__(self):
        return hash((self.n, self.components))

    def to_json(self) -> dict:
        return {"n": self.n, "components": [c.to_json() for c in self.components]}


def determinant(matrix: list) -> ExpSum:
    """Cofactor expansion along the first row."""
    size = len(matrix)
    if size == 1:
        return matrix[0][0]
    total = None
    for j in range(size):
        entry = matrix[0][j]
        if entry.is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = entry * determinant(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return ExpSum.zero(matrix[0][0].nvars)
    return total
