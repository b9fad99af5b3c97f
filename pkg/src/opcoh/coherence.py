"""Kernel of pi, obvious relations, coherence relations and constraints.

All subspaces live in the coordinate space of the module basis
``F(E)<R>(n)``.  ``O(n)`` is spanned by the two families of obvious
relations together with everything obtained from lower arities by grafting
a single generator on either side; decomposables are obtained the same way
from the lower kernels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import trees as T
from .linalg import Subspace, kernel, normalize, quotient_dim, quotient_representatives
from .presentation import Presentation
from .trees import Tree

Combo = dict  # Tree -> Fraction


class InternalInconsistency(RuntimeError):
    """A generated obvious relation is not in the kernel of pi."""


# -- linear combinations in J and F(E) ---------------------------------------

def _add(acc: dict, t: Tree, c: Fraction) -> None:
    v = acc.get(t, Fraction(0)) + c
    if v:
        acc[t] = v
    else:
        acc.pop(t, None)


def compose_combos(p: Presentation, outer: Combo, slot: int, inner: Combo, module: bool) -> Combo:
    """Bilinear partial composition; ``module`` says the result lies in J."""
    out: dict = {}
    sig = p.module_sig
    for a, ca in outer.items():
        for b, cb in inner.items():
            t, s = T.compose(a, slot, b, sig)
            if module:
                for m, cm in p.normalize_module(t).items():
                    _add(out, m, ca * cb * s * cm)
            else:
                _add(out, t, ca * cb * s)
    return out


def pi_combo(p: Presentation, x: Combo) -> Combo:
    out: dict = {}
    for m, c in x.items():
        for t, v in p.pi_image(m).items():
            _add(out, t, c * v)
    return out


def _vec(p: Presentation, n: int, x: Combo) -> list[Fraction]:
    idx = p.module_index(n)
    v = [Fraction(0)] * len(idx)
    for m, c in x.items():
        v[idx[m]] += c
    return v


def _combo(p: Presentation, n: int, vec) -> Combo:
    rows = p.module_basis(n)
    return {rows[i]: Fraction(c) for i, c in enumerate(vec) if c}


def _single_generators(p: Presentation) -> list[Tree]:
    """One canonical tree per generator vertex, all leaf orders in symmetric mode."""
    out = []
    for g in p.generators:
        base = (g.name, tuple(range(1, g.arity + 1)))
        out.append(base)
    return out


# -- subspaces ---------------------------------------------------------------

def kernel_space(p: Presentation, n: int) -> Subspace:
    key = ("ker", n)
    if key not in p._cache:
        if n < p.relation_arity:
            p._cache[key] = Subspace.zero(0)
        else:
            p._cache[key] = kernel(p.assemble_pi(n).matrix)
    return p._cache[key]


def sigma_close(p: Presentation, n: int, space: Subspace) -> Subspace:
    """Smallest Sigma_n-stable subspace containing ``space`` (symmetric mode)."""
    if not p.symmetric or space.dim == 0:
        return space
    gens = []
    for i in range(1, n):
        perm = list(range(1, n + 1))
        perm[i - 1], perm[i] = perm[i], perm[i - 1]
        gens.append(perm)
    current = space
    frontier = list(space.basis)
    while frontier:
        new = []
        for vec in frontier:
            combo = _combo(p, n, vec)
            for perm in gens:
                img: dict = {}
                for m, c in combo.items():
                    for mm, cc in p.act_module(m, perm).items():
                        _add(img, mm, c * cc)
                v = _vec(p, n, img)
                if not current.contains(v):
                    current = current.extended([v])
                    new.append(v)
        frontier = new
    return current


def _grafts_of(p: Presentation, n: int, lower: Mapping[int, Subspace]) -> list[list[Fraction]]:
    """Single-generator grafts of lower-arity subspaces landing in arity ``n``."""
    vecs = []
    for g in _single_generators(p):
        k = len(g[1])
        m = n - k + 1
        sub = lower.get(m)
        if sub is None or sub.dim == 0:
            continue
        for bvec in sub.basis:
            x = _combo(p, m, bvec)
            for j in range(1, m + 1):
                vecs.append(_vec(p, n, compose_combos(p, x, j, {g: Fraction(1)}, True)))
            for j in range(1, k + 1):
                vecs.append(_vec(p, n, compose_combos(p, {g: Fraction(1)}, j, x, True)))
    return vecs


def _check_in_kernel(p: Presentation, x: Combo, what: str) -> None:
    if pi_combo(p, x):
        raise InternalInconsistency(f"{what} is not annihilated by pi; sign conventions disagree")


def obvious_relations(p: Presentation, n: int) -> Subspace:
    key = ("O", n)
    if key in p._cache:
        return p._cache[key]
    k = p.relation_arity
    size = len(p.module_basis(n))
    if n < 2 * k - 1:
        space = Subspace.zero(size)
        p._cache[key] = space
        return space
    vecs = []
    # o': x o_s pi(y) - pi(x) o_s y
    for lx in range(k, n - k + 2):
        ly = n - lx + 1
        for x in p.module_basis(lx):
            px = p.pi_image(x)
            for y in p.module_basis(ly):
                py = p.pi_image(y)
                for s in range(1, lx + 1):
                    a = compose_combos(p, {x: Fraction(1)}, s, py, True)
                    b = compose_combos(p, px, s, {y: Fraction(1)}, True)
                    o = dict(a)
                    for m, c in b.items():
                        _add(o, m, -c)
                    _check_in_kernel(p, o, "obvious relation o'")
                    vecs.append(_vec(p, n, o))
    # o'': b(.., pi(x) at s, .., y at t, ..) - b(.., x at s, .., pi(y) at t, ..)
    for l in range(2, n - 2 * k + 3):
        for lx in range(k, n - l + 2 - k + 1):
            ly = n - l + 2 - lx
            if ly < k:
                continue
            for b in p.tree_basis(l):
                for x in p.module_basis(lx):
                    px = p.pi_image(x)
                    for y in p.module_basis(ly):
                        py = p.pi_image(y)
                        for s in range(1, l + 1):
                            for t in range(s + 1, l + 1):
                                # graft at t first so slot s keeps its index
                                first = compose_combos(p, {b: Fraction(1)}, t, {y: Fraction(1)}, True)
                                lhs = compose_combos(p, first, s, px, True)
                                first = compose_combos(p, {b: Fraction(1)}, t, py, False)
                                rhs = compose_combos(p, first, s, {x: Fraction(1)}, True)
                                o = dict(lhs)
                                for m, c in rhs.items():
                                    _add(o, m, -c)
                                _check_in_kernel(p, o, "obvious relation o''")
                                vecs.append(_vec(p, n, o))
    lower = {m: obvious_relations(p, m) for m in range(2 * k - 1, n)}
    for v in _grafts_of(p, n, lower):
        _check_in_kernel(p, _combo(p, n, v), "graft of an obvious relation")
        vecs.append(v)
    space = sigma_close(p, n, Subspace(size, vecs))
    p._cache[key] = space
    return space


def decomposables(p: Presentation, n: int) -> Subspace:
    """Decomposables of ``ker pi(n)`` together with ``O(n)``."""
    key = ("dec", n)
    if key in p._cache:
        return p._cache[key]
    k = p.relation_arity
    lower = {m: kernel_space(p, m) for m in range(k, n)}
    vecs = _grafts_of(p, n, lower)
    space = obvious_relations(p, n).extended(vecs)
    space = sigma_close(p, n, space)
    p._cache[key] = space
    return space


def decomposables_of_D(p: Presentation, n: int, lower_D: Mapping[int, Subspace] | None = None) -> Subspace:
    """Decomposables of ``D(n)`` as a subspace of ``ker pi(n)`` containing ``O(n)``.

    ``lower_D`` may supply representatives of ``D(m)`` for ``m < n``; grafts
    of lower obvious relations already lie in ``O(n)``, so the lower kernels
    are used when it is omitted.
    """
    if lower_D is None:
        return decomposables(p, n)
    vecs = _grafts_of(p, n, dict(lower_D))
    return sigma_close(p, n, obvious_relations(p, n).extended(vecs))


# -- report ------------------------------------------------------------------

@dataclass
class CoherenceReport:
    arity: int
    dim_ker: int
    dim_O: int
    dim_D: int
    dim_dec: int
    dim_C: int
    constraints: list = field(default_factory=list)  # list of [(label, Fraction)]

    def to_dict(self) -> dict:
        return {
            "arity": self.arity,
            "dim_ker": self.dim_ker,
            "dim_O": self.dim_O,
            "dim_D": self.dim_D,
            "dim_dec": self.dim_dec,
            "dim_C": self.dim_C,
            "constraints": [[[lab, _fmt(c)] for lab, c in combo] for combo in self.constraints],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [
            f"arity            {self.arity}",
            f"dim ker pi       {self.dim_ker}",
            f"dim O            {self.dim_O}",
            f"dim D            {self.dim_D}",
            f"dim decomposable {self.dim_dec}",
            f"dim C            {self.dim_C}",
        ]
        for i, combo in enumerate(self.constraints, 1):
            lines.append(f"constraint {i}: {T.format_combination(combo)}")
        return "\n".join(lines) + "\n"


def _fmt(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def coherence_constraints(p: Presentation, n: int) -> CoherenceReport:
    ker = kernel_space(p, n)
    size = len(p.module_basis(n))
    if ker.ambient_dim != size:
        ker = Subspace.zero(size)
    obv = obvious_relations(p, n)
    dec = decomposables(p, n)
    dim_D = quotient_dim(ker, obv)
    dim_dec = quotient_dim(dec, obv)
    reps = quotient_representatives(ker, dec)
    rows = p.module_basis(n)
    constraints = []
    for vec in reps.basis:
        v = normalize(vec)
        _check_in_kernel(p, _combo(p, n, v), "constraint representative")
        constraints.append([(T.encode(rows[i]), c) for i, c in enumerate(v) if c])
    return CoherenceReport(n, ker.dim, obv.dim, dim_D, dim_dec, dim_D - dim_dec, constraints)
