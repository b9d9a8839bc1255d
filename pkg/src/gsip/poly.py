"""Sparse multivariate polynomials over named variable blocks.

A :class:`VariableSpace` is an ordered list of blocks such as ``("x", 3)`` and
``("u", 2)``; a :class:`Polynomial` stores a map from exponent tuples (one
entry per variable of its space) to float coefficients. Values are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


class SpaceMismatch(ValueError):
    pass


@dataclass(frozen=True)
class VariableSpace:
    blocks: tuple[tuple[str, int], ...]

    def __init__(self, blocks: Iterable[tuple[str, int]]):
        blocks = tuple((str(name), int(dim)) for name, dim in blocks)
        names = [name for name, _ in blocks]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate block names in {names}")
        if any(dim < 0 for _, dim in blocks):
            raise ValueError("block dimensions must be nonnegative")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self) -> int:
        return sum(d for _, d in self.blocks)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.blocks)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def block_dim(self, name: str) -> int:
        for b, d in self.blocks:
            if b == name:
                return d
        raise KeyError(f"unknown block {name!r}; space has {self.names}")

    def offset(self, name: str) -> int:
        off = 0
        for b, d in self.blocks:
            if b == name:
                return off
            off += d
        raise KeyError(f"unknown block {name!r}; space has {self.names}")

    def slice(self, name: str) -> slice:
        off = self.offset(name)
        return slice(off, off + self.block_dim(name))

    def index(self, name: str, pos: int) -> int:
        if not 0 <= pos < self.block_dim(name):
            raise IndexError(f"{name}[{pos}] out of range")
        return self.offset(name) + pos

    def var(self, name: str, pos: int) -> "Polynomial":
        e = [0] * self.dim
        e[self.index(name, pos)] = 1
        return Polynomial(self, {tuple(e): 1.0})

    def vars(self, name: str) -> list["Polynomial"]:
        return [self.var(name, i) for i in range(self.block_dim(name))]

    def label(self, i: int) -> str:
        for b, d in self.blocks:
            if i < d:
                return f"{b}{i + 1}"
            i -= d
        raise IndexError(i)

    def split(self, point: Sequence[float]) -> dict[str, np.ndarray]:
        point = np.asarray(point, dtype=float)
        return {b: point[self.slice(b)] for b in self.names}

    def join(self, **parts: Sequence[float]) -> np.ndarray:
        out = np.zeros(self.dim)
        for b, d in self.blocks:
            vals = np.asarray(parts.get(b, np.zeros(d)), dtype=float).reshape(-1)
            if vals.size != d:
                raise SpaceMismatch(f"block {b} expects {d} values, got {vals.size}")
            out[self.slice(b)] = vals
        return out

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def const(self, c: float) -> "Polynomial":
        return Polynomial.constant(self, c)


def _normalize(terms: Mapping[Exponent, float]) -> dict[Exponent, float]:
    return {e: float(c) for e, c in sorted(terms.items(), key=lambda t: grlex_key(t[0])) if c != 0.0}


def grlex_key(e: Exponent) -> tuple:
    # ascending total degree, then lexicographically descending exponents
    return (sum(e), tuple(-k for k in e))


class Polynomial:
    """Immutable sparse polynomial. Terms iterate in graded-lex order."""

    __slots__ = ("space", "_terms", "_hash")

    def __init__(self, space: VariableSpace, terms: Mapping[Exponent, float] | None = None):
        terms = dict(terms or {})
        n = space.dim
        for e in terms:
            if len(e) != n:
                raise SpaceMismatch(f"exponent {e} has length {len(e)}, space dim is {n}")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent {e}")
        self.space = space
        self._terms = _normalize({tuple(int(k) for k in e): c for e, c in terms.items()})
        self._hash = None

    # construction -----------------------------------------------------------
    @classmethod
    def constant(cls, space: VariableSpace, c: float) -> "Polynomial":
        return cls(space, {(0,) * space.dim: c})

    @classmethod
    def from_terms(cls, space: VariableSpace, terms: Iterable[tuple[float, Sequence[int]]]) -> "Polynomial":
        acc: dict[Exponent, float] = {}
        for c, e in terms:
            e = tuple(int(k) for k in e)
            acc[e] = acc.get(e, 0.0) + float(c)
        return cls(space, acc)

    @classmethod
    def linear(cls, space: VariableSpace, coeffs: Sequence[float], const: float = 0.0,
               block: str | None = None) -> "Polynomial":
        """``const + sum coeffs[i] * z_i`` over a block (or the whole space)."""
        off = space.offset(block) if block else 0
        n = space.block_dim(block) if block else space.dim
        if len(coeffs) != n:
            raise SpaceMismatch(f"expected {n} coefficients, got {len(coeffs)}")
        terms = {(0,) * space.dim: const}
        for i, c in enumerate(coeffs):
            e = [0] * space.dim
            e[off + i] = 1
            terms[tuple(e)] = c
        return cls(space, terms)

    # basic properties -------------------------------------------------------
    @property
    def terms(self) -> dict[Exponent, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def degree_in(self, block: str) -> int:
        sl = self.space.slice(block)
        return max((sum(e[sl]) for e in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self) -> float:
        return self._terms.get((0,) * self.space.dim, 0.0)

    def uses_block(self, block: str) -> bool:
        return self.degree_in(block) > 0

    def coefficient(self, e: Sequence[int]) -> float:
        return self._terms.get(tuple(e), 0.0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.space, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.space == other.space and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.space, tuple(self._terms.items())))
        return self._hash

    def almost_equal(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= tol for _, c in diff.items())

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self._terms.items():
            mono = "*".join(
                self.space.label(i) + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(f"{c:g}")
            elif c == 1.0:
                parts.append(mono)
            elif c == -1.0:
                parts.append("-" + mono)
            else:
                parts.append(f"{c:g}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.space != self.space:
                raise SpaceMismatch(f"{self.space.blocks} vs {other.space.blocks}")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self.space, float(other))
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        acc = dict(self._terms)
        for e, c in other._terms.items():
            acc[e] = acc.get(e, 0.0) + c
        return Polynomial(self.space, acc)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.space, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, s: float) -> "Polynomial":
        return Polynomial(self.space, {e: s * c for e, c in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self.scale(float(other))
        other = self._coerce(other)
        acc: dict[Exponent, float] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0.0) + c1 * c2
        return Polynomial(self.space, acc)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "Polynomial":
        return self.scale(1.0 / float(s))

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0 or int(k) != k:
            raise ValueError("only nonnegative integer powers")
        out = Polynomial.constant(self.space, 1.0)
        base = self
        k = int(k)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def chop(self, tol: float = 1e-12) -> "Polynomial":
        """Drop coefficients with magnitude at most ``tol``."""
        return Polynomial(self.space, {e: c for e, c in self._terms.items() if abs(c) > tol})

    # evaluation -------------------------------------------------------------
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self._terms:
            return np.zeros((0, self.space.dim), dtype=int), np.zeros(0)
        exps = np.array(list(self._terms.keys()), dtype=int).reshape(len(self._terms), self.space.dim)
        coeffs = np.array(list(self._terms.values()))
        return exps, coeffs

    def __call__(self, point: Sequence[float]) -> float:
        return self.eval(point)

    def eval(self, point: Sequence[float]) -> float:
        point = np.asarray(point, dtype=float).reshape(-1)
        if point.size != self.space.dim:
            raise SpaceMismatch(f"point has {point.size} entries, space dim is {self.space.dim}")
        total = 0.0
        for e, c in self._terms.items():
            term = c
            for xi, k in zip(point, e):
                if k:
                    term *= xi**k
            total += term
        return float(total)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.space.dim:
            raise SpaceMismatch(f"points have {points.shape[1]} columns, space dim is {self.space.dim}")
        exps, coeffs = self._arrays()
        if coeffs.size == 0:
            return np.zeros(points.shape[0])
        mono = np.prod(points[:, None, :] ** exps[None, :, :], axis=2)
        return mono @ coeffs

    # calculus and substitution ---------------------------------------------
    def diff(self, i: int) -> "Polynomial":
        acc: dict[Exponent, float] = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                e2 = list(e)
                e2[i] -= 1
                acc[tuple(e2)] = acc.get(tuple(e2), 0.0) + c * k
        return Polynomial(self.space, acc)

    def gradient(self, block: str | None = None) -> "PolynomialMap":
        idx = range(self.space.dim) if block is None else range(
            self.space.offset(block), self.space.offset(block) + self.space.block_dim(block))
        comps = [self.diff(i) for i in idx]
        if not comps:
            raise ValueError(f"block {block!r} is empty")
        return PolynomialMap(comps)

    def hessian(self, block: str) -> list[list["Polynomial"]]:
        sl = self.space.slice(block)
        idx = range(sl.start, sl.stop)
        return [[self.diff(i).diff(j) for j in idx] for i in idx]

    def embed(self, target: VariableSpace) -> "Polynomial":
        """Re-express in a space containing all blocks this polynomial uses."""
        if target == self.space:
            return self
        mapping = []
        for b, d in self.space.blocks:
            if b in target:
                if target.block_dim(b) != d:
                    raise SpaceMismatch(f"block {b} has dim {d} here, {target.block_dim(b)} in target")
                mapping.append((self.space.slice(b), target.slice(b)))
            elif self.degree_in(b) > 0:
                raise SpaceMismatch(f"target space lacks used block {b!r}")
        acc: dict[Exponent, float] = {}
        for e, c in self._terms.items():
            e2 = [0] * target.dim
            for src, dst in mapping:
                e2[dst] = e[src]
            acc[tuple(e2)] = acc.get(tuple(e2), 0.0) + c
        return Polynomial(target, acc)

    def restrict(self, target: VariableSpace) -> "Polynomial":
        """Alias of :meth:`embed` for moving to a smaller space."""
        return self.embed(target)

    def substitute(self, block: str, qmap: "PolynomialMap") -> "Polynomial":
        """Replace each variable of ``block`` with the matching component of ``qmap``.

        The result lives in ``qmap.space``; every other block used here must
        also exist there.
        """
        dim = self.space.block_dim(block)
        if qmap.dim != dim:
            raise SpaceMismatch(f"map has {qmap.dim} components, block {block} has {dim}")
        target = qmap.space
        sl = self.space.slice(block)
        rest = [(b, d) for b, d in self.space.blocks if b != block]
        rest_space = VariableSpace(rest)
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(i: int, k: int) -> Polynomial:
            key = (i, k)
            if key not in powers:
                powers[key] = qmap[i] ** k
            return powers[key]

        out = target.zero()
        for e, c in self._terms.items():
            rest_e = tuple(e[: sl.start]) + tuple(e[sl.stop:])
            head = Polynomial(rest_space, {rest_e: c}).embed(target)
            for i, k in enumerate(e[sl]):
                if k:
                    head = head * power(i, k)
            out = out + head
        return out

    def substitute_values(self, values: Mapping[str, Sequence[float]]) -> "Polynomial":
        """Fix whole blocks to numeric values; the result drops those blocks."""
        keep = [(b, d) for b, d in self.space.blocks if b not in values]
        target = VariableSpace(keep)
        fixed = {self.space.index(b, i): float(v)
                 for b, vals in values.items() for i, v in enumerate(np.asarray(vals, dtype=float).reshape(-1))}
        keep_idx = [i for i in range(self.space.dim) if i not in fixed]
        acc: dict[Exponent, float] = {}
        for e, c in self._terms.items():
            coef = c
            for i, val in fixed.items():
                if e[i]:
                    coef *= val ** e[i]
            e2 = tuple(e[i] for i in keep_idx)
            acc[e2] = acc.get(e2, 0.0) + coef
        return Polynomial(target, acc)


class PolynomialMap:
    """A nonempty tuple of polynomials over a common source space."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Polynomial]):
        comps = tuple(components)
        if not comps:
            raise ValueError("PolynomialMap needs at least one component")
        space = comps[0].space
        if any(c.space != space for c in comps):
            raise SpaceMismatch("components live in different spaces")
        self.components = comps

    @classmethod
    def constant(cls, space: VariableSpace, values: Sequence[float]) -> "PolynomialMap":
        return cls([Polynomial.constant(space, float(v)) for v in values])

    @property
    def space(self) -> VariableSpace:
        return self.components[0].space

    @property
    def dim(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> Polynomial:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolynomialMap) and self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    def __repr__(self) -> str:
        return "PolynomialMap(" + ", ".join(str(c) for c in self.components) + ")"

    def __call__(self, point: Sequence[float]) -> np.ndarray:
        return np.array([c.eval(point) for c in self.components])

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def embed(self, target: VariableSpace) -> "PolynomialMap":
        return PolynomialMap([c.embed(target) for c in self.components])

    def is_constant(self) -> bool:
        return all(c.degree == 0 for c in self.components)


def grad_block(p: Polynomial, block: str) -> PolynomialMap:
    if block not in p.space:
        raise KeyError(f"unknown block {block!r}")
    return p.gradient(block)


def substitute(p: Polynomial, block: str, qmap: PolynomialMap) -> Polynomial:
    return p.substitute(block, qmap)


def monomial_exponents(nvars: int, d: int) -> list[Exponent]:
    """All exponents in ``nvars`` variables with total degree <= d, graded-lex."""
    out: list[Exponent] = []
    for deg in range(d + 1):
        out.extend(_compositions(nvars, deg))
    return out


def _compositions(n: int, deg: int) -> list[Exponent]:
    if n == 0:
        return [()] if deg == 0 else []
    out = []
    for first in range(deg, -1, -1):
        for rest in _compositions(n - 1, deg - first):
            out.append((first,) + rest)
    return out


def monomial_basis(space: VariableSpace, d: int, blocks: Sequence[str] | None = None) -> list[Exponent]:
    """Exponents (in the full space) of all monomials of degree <= d in ``blocks``."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if blocks is None:
        return monomial_exponents(space.dim, d)
    idx = [i for b in blocks for i in range(space.slice(b).start, space.slice(b).stop)]
    out = []
    for small in monomial_exponents(len(idx), d):
        e = [0] * space.dim
        for i, k in zip(idx, small):
            e[i] = k
        out.append(tuple(e))
    return out


def basis_size(nvars: int, d: int) -> int:
    return math.comb(nvars + d, d)


def dot(coeffs: Sequence[float], polys: Sequence[Polynomial]) -> Polynomial:
    if len(coeffs) != len(polys):
        raise SpaceMismatch("length mismatch")
    out = polys[0].space.zero()
    for c, p in zip(coeffs, polys):
        if c:
            out = out + p * float(c)
    return out


def sum_squares(polys: Iterable[Polynomial]) -> Polynomial:
    polys = list(polys)
    out = polys[0].space.zero()
    for p in polys:
        out = out + p * p
    return out


__all__ = [
    "VariableSpace", "Polynomial", "PolynomialMap", "SpaceMismatch",
    "grad_block", "substitute", "monomial_basis", "monomial_exponents", "basis_size",
    "grlex_key", "dot", "sum_squares",
]

