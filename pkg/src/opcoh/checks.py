"""Reference computations over the builtin presentations, used by ``check-all``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import graphs as G
from . import words as W
from .coherence import coherence_constraints, kernel_space, obvious_relations
from .duality import DimSeries, cp_formula, koszul_gf_check, quadratic_dual
from .linalg import rank
from .presentation import formula_module_dim, load

QUADRATIC = ("ass", "lie", "ns-poisson", "digebra")

# expected values at arity 4
MODULE_COUNTS = {"ass": (5, 5), "lie": (15, 10), "ns-poisson": (40, 40), "digebra": (40, 50)}
DIM_C4 = {"ass": 1, "lie": 1, "ns-poisson": 8, "digebra": 14}
QUOTED_MOBIUS_GENERATORS = 6


@dataclass
class Outcome:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}" + (f": {self.detail}" if self.detail else "")


def _dims() -> Outcome:
    got = {}
    for nm in QUADRATIC:
        p = load(nm)
        got[nm] = (len(p.tree_basis(4)), len(p.module_basis(4)))
        if formula_module_dim(p) != got[nm]:
            return Outcome("basis sizes", False, f"{nm}: formula {formula_module_dim(p)} vs {got[nm]}")
    return Outcome("basis sizes", got == MODULE_COUNTS, str(got))


def _constraints() -> Outcome:
    got = {}
    for nm in QUADRATIC:
        p = load(nm)
        p2, p3, p4 = p.operad_dims(4)
        c = coherence_constraints(p, 4).dim_C
        if cp_formula(p2, p3, p4, p.mode) != c:
            return Outcome("constraint counts", False, f"{nm}: formula disagrees with {c}")
        got[nm] = c
    return Outcome("constraint counts", got == DIM_C4, str(got))


def _duals() -> Outcome:
    parts = []
    ok = True
    for nm in QUADRATIC:
        p = load(nm)
        d = quadratic_dual(p)
        c4 = coherence_constraints(p, 4).dim_C
        d4 = d.operad_dims(4)[-1]
        res = koszul_gf_check(DimSeries.of(p, 4), DimSeries.of(d, 4), 4)
        ok = ok and c4 == d4 and not any(res)
        parts.append(f"{nm}: C(4)={c4} dual(4)={d4}")
    return Outcome("dual dimensions and series", ok, "; ".join(parts))


def _exactness() -> Outcome:
    for nm, n in [("ass", 4), ("ass", 5), ("lie", 4), ("ns-poisson", 4), ("digebra", 4), ("ainfty-mu3", 7)]:
        p = load(nm)
        m = p.assemble_pi(n).matrix
        if rank(m) + kernel_space(p, n).dim != m.rows:
            return Outcome("rank-nullity", False, f"{nm} arity {n}")
        if not obvious_relations(p, n).issubspace(kernel_space(p, n)):
            return Outcome("rank-nullity", False, f"O not inside ker for {nm} arity {n}")
    return Outcome("rank-nullity and O inside ker", True)


def _graphs() -> Outcome:
    parts = []
    for nm in ("ass", "ns-poisson", "digebra"):
        p = load(nm)
        g = G.orient(G.tel_a(G.bipartite(G.labeled_matrix(p, 4)), G.GRAPHLIKE))
        r = len(G.cycle_basis(g))
        d = coherence_constraints(p, 4).dim_D
        if r != d:
            return Outcome("cycle rank equals dim D", False, f"{nm}: {r} vs {d}")
        parts.append(f"{nm} {r}")
    return Outcome("cycle rank equals dim D", True, ", ".join(parts))


def _petersen() -> Outcome:
    g = G.orient(G.tel_a(G.bipartite(G.labeled_matrix(load("lie"), 4)), G.DUAL))
    ok = (len(g.vertices), len(g.edges), set(g.degrees()), G.girth(g)) == (10, 15, {3}, 5)
    flips = G.flipped(g)
    return Outcome("lie dual graph", ok and flips == ["3", "6", "7", "9"], f"flipped rows {flips}")


def _mobius() -> Outcome:
    p = load("ainfty-mu3")
    g = G.orient(G.tel_a(G.bipartite(G.labeled_matrix(p, 7)), G.DUAL))
    r = G.cycle_rank(g)
    ok = (len(g.vertices), len(g.edges), len(g.components())) == (8, 12, 1) and kernel_space(p, 7).dim == 1
    note = "matches" if r == QUOTED_MOBIUS_GENERATORS else "differs from"
    return Outcome("A-infinity dual graph", ok,
                   f"cycle rank {r} {note} the quoted {QUOTED_MOBIUS_GENERATORS} generators")


def _pentagon() -> Outcome:
    p = load("ass")
    g = G.orient(G.tel_a(G.bipartite(G.labeled_matrix(p, 4)), G.DUAL))
    dg = W.decorate(g, W.transfer_labels(g, W.load_entries("associator", "ass")))
    eqs = W.derive_equations(dg)
    ok = len(eqs) == 1 and W.word_equivalent(eqs[0], W.pentagon_word())
    return Outcome("pentagon word", ok, eqs[0].two_sided_text() if eqs else "no equation")


CHECKS: list[Callable[[], Outcome]] = [_dims, _constraints, _duals, _exactness, _graphs, _petersen, _mobius,
                                       _pentagon]


def run_all() -> list[Outcome]:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except Exception as e:  # report, keep going
            out.append(Outcome(check.__name__.strip("_"), False, f"{type(e).__name__}: {e}"))
    return out
