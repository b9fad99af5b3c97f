"""Quadratic duals, dimension formulas and the generating-function test."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Sequence

from . import trees as T
from .coherence import coherence_constraints
from .linalg import SparseMatrix, Subspace, kernel
from .presentation import Presentation, relabel_element
from .trees import OperadElement, Signature


class NotQuadratic(ValueError):
    pass


def _require_quadratic(p: Presentation) -> None:
    if not p.is_quadratic():
        raise NotQuadratic(f"{p.name} is not quadratic (binary generators, ternary relations)")


def _perm_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def pairing_weight(t: T.Tree, symmetric: bool) -> int:
    """Weight of a ternary monomial against its mirror in the dual.

    Left combs ``g(h(.,.),.)`` weigh ``+1``, right combs ``g(.,h(.,.))``
    weigh ``-1``; in symmetric mode the sign of the leaf permutation is
    multiplied in.
    """
    left = not T.is_leaf(t[1][0])
    w = 1 if left else -1
    if symmetric:
        w *= _perm_sign(T.leaves(t))
    return w


def dual_generators(p: Presentation) -> list[T.Generator]:
    swap = {"sign": "trivial", "trivial": "sign", "none": "none"}
    return [T.Generator(g.name, g.arity, g.degree, swap[g.symmetry]) for g in p.generators]


def orthogonal_relations(p: Presentation) -> list[OperadElement]:
    """Basis of the annihilator of ``R(3)`` in the dual free operad at arity 3."""
    _require_quadratic(p)
    basis = p.tree_basis(3)
    index = p.tree_index(3)
    rels = list(p.relation_space.values())
    entries = {}
    for j, r in enumerate(rels):
        for t, c in r.terms.items():
            entries[(index[t], j)] = c * pairing_weight(t, p.symmetric)
    m = SparseMatrix(len(basis), len(rels), entries)
    dual_sig = Signature(dual_generators(p), p.mode)
    out = []
    for vec in kernel(m).basis:
        pairs = []
        for i, c in enumerate(vec):
            if c:
                t, s = T.canonicalize(basis[i], dual_sig)
                pairs.append((t, c * s))
        out.append(OperadElement.from_pairs(3, pairs))
    return out


def quadratic_dual(p: Presentation) -> Presentation:
    _require_quadratic(p)
    gens = dual_generators(p)
    elems = orthogonal_relations(p)
    sig = Signature(gens, p.mode)
    basis = T.enumerate_basis(sig, 3)
    index = {t: i for i, t in enumerate(basis)}
    span = Subspace.zero(len(basis))
    chosen = []
    for el in elems:
        if span.contains(el.coordinates(index, len(basis))):
            continue
        chosen.append(el)
        variants = permutations(range(1, 4)) if p.symmetric else [(1, 2, 3)]
        span = span.extended(relabel_element(el, w, sig).coordinates(index, len(basis)) for w in variants)
    rels = tuple((f"s{i + 1}", el) for i, el in enumerate(chosen))
    return Presentation(f"{p.name}-dual", p.mode, tuple(gens), rels)


def dual_relation_dim(p: Presentation) -> int:
    return len(orthogonal_relations(p))


def cp_formula(p2: int, p3: int, p4: int, mode: str) -> int:
    """Predicted number of coherence constraints from ``dim P(2..4)``."""
    if mode == T.SYMMETRIC:
        return p4 + 5 * p2 * (3 * p2 ** 2 - 2 * p3)
    return p4 + 5 * p2 * (p2 ** 2 - p3)


@dataclass(frozen=True)
class DimSeries:
    dims: tuple  # dims[0] is arity 1
    mode: str = T.NONSIGMA

    def __post_init__(self):
        if not self.dims or self.dims[0] != 1:
            raise ValueError("a dimension series starts with dim P(1) = 1")
        if any(d < 0 for d in self.dims):
            raise ValueError("dimensions are nonnegative")

    @classmethod
    def of(cls, p: Presentation, N: int) -> "DimSeries":
        return cls((1,) + tuple(p.operad_dims(N)), p.mode)

    def coefficients(self, N: int) -> list[Fraction]:
        """Coefficients of the generating function up to degree ``N`` (index 0 included)."""
        out = [Fraction(0)] * (N + 1)
        for n in range(1, N + 1):
            d = self.dims[n - 1] if n - 1 < len(self.dims) else 0
            out[n] = Fraction(d, factorial(n)) if self.mode == T.SYMMETRIC else Fraction(d)
        return out


def _mul(a: list, b: list, N: int) -> list:
    out = [Fraction(0)] * (N + 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(0, N + 1 - i):
            if b[j]:
                out[i + j] += x * b[j]
    return out


def compose_series(f: list, g: list, N: int) -> list:
    """``f(g(x))`` truncated at degree ``N``; ``g`` has no constant term."""
    if g[0]:
        raise ValueError("inner series must have zero constant term")
    out = [Fraction(0)] * (N + 1)
    out[0] = f[0]
    power = [Fraction(0)] * (N + 1)
    power[0] = Fraction(1)
    for n in range(1, N + 1):
        power = _mul(power, g, N)
        if f[n]:
            for k in range(N + 1):
                out[k] += f[n] * power[k]
    return out


def koszul_gf_check(a: DimSeries, b: DimSeries, N: int) -> list[Fraction]:
    """Coefficients of ``g_a(-g_b(-x)) - x`` in degrees ``1..N``."""
    if a.mode != b.mode:
        raise ValueError("series must share a mode")
    if len(a.dims) < N or len(b.dims) < N:
        raise ValueError(f"series must be known through arity {N}")
    ga = a.coefficients(N)
    gb = b.coefficients(N)
    inner = [-c if k % 2 == 0 else c for k, c in enumerate(gb)]  # -g_b(-x)
    res = compose_series(ga, inner, N)
    res[1] -= 1
    return res[1:]


@dataclass
class MainCheck:
    holds: bool
    dim_C4: int
    dim_dual4: int
    formula: int

    def to_text(self) -> str:
        verdict = "consistent" if self.holds else "inconsistent"
        return (f"dim C(4) = {self.dim_C4}, dim dual(4) = {self.dim_dual4}, "
                f"closed formula = {self.formula}: {verdict}")


def dual_dimension_check(p: Presentation) -> MainCheck:
    _require_quadratic(p)
    c4 = coherence_constraints(p, 4).dim_C
    d4 = quadratic_dual(p).operad_dims(4)[-1]
    p2, p3, p4 = p.operad_dims(4)
    return MainCheck(c4 == d4, c4, d4, cp_formula(p2, p3, p4, p.mode))


def duality_report(p: Presentation, N: int = 4) -> str:
    _require_quadratic(p)
    d = quadratic_dual(p)
    lines = [f"dual of {p.name}"]
    for g in d.generators:
        sym = {"sign": " sym anti", "trivial": " sym comm"}.get(g.symmetry, "")
        lines.append(f"  gen {g.name} arity {g.arity}{sym}")
    lines.append(f"  dim R = {len(p.relation_space)}, dim R^perp = {dual_relation_dim(p)}, "
                 f"dim F(E)(3) = {len(p.tree_basis(3))}")
    for lab, el in d.relations:
        lines.append(f"  rel {lab} : {el}")
    a = DimSeries.of(p, N)
    b = DimSeries.of(d, N)
    lines.append("  n   dim P(n)   dim dual(n)")
    for n in range(1, N + 1):
        lines.append(f"  {n:<3} {a.dims[n - 1]:<10} {b.dims[n - 1]}")
    p2, p3, p4 = p.operad_dims(4)
    lines.append(f"closed formula for dim C: {cp_formula(p2, p3, p4, p.mode)}")
    lines.append("main check: " + dual_dimension_check(p).to_text())
    res = koszul_gf_check(a, b, N)
    zero = all(c == 0 for c in res)
    lines.append("generating-function residual: " + ", ".join(str(c) for c in res)
                 + (" (zero, consistent with Koszulness)" if zero else " (nonzero)"))
    return "\n".join(lines) + "\n"
