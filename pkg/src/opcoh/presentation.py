"""Operad presentations, the free module on the relations, and the map pi.

A presentation is read from a small line-oriented text format::

    operad ass
    mode nonsigma
    gen x arity 2
    rel r : x(1,x(2,3)) - x(x(1,2),3)

Module monomials are trees in which exactly one vertex carries a relation
label.  In symmetric mode the relation space ``R(k)`` is the span of the
Sigma_k-orbits of the stated relations; a greedy basis of it is labelled
``r`` (the stated relation) and ``r.w`` (the relation with leaf ``j``
renamed ``w[j]``).  Relation vertices keep their children sorted by
smallest leaf, and any other ordering is rewritten in that basis.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import permutations
from pathlib import Path

from . import trees as T
from .linalg import SparseMatrix, Subspace, rank
from .trees import Generator, OperadElement, Signature, Tree

BUILTIN_DIR = Path(__file__).parent / "builtins"
BUILTINS = ("ass", "lie", "ns-poisson", "digebra", "ainfty-mu3")


class PresentationError(ValueError):
    pass


class DependentRelations(PresentationError):
    pass


@dataclass(frozen=True)
class CoeffDecl:
    """A formal coefficient attached to one term of a relation.

    ``scope`` is ``leaves`` when the coefficient acts on the relation's
    inputs, or ``root`` when it acts on the inputs of the term's root vertex.
    """

    relation: str
    term: Tree
    base: str
    scope: str = "leaves"


@dataclass(frozen=True)
class Alias:
    kind: str  # tree | module
    label: str
    text: str


@dataclass(frozen=True)
class PiMatrix:
    n: int
    rows: tuple  # module monomials
    cols: tuple  # trees
    matrix: SparseMatrix


@dataclass(eq=False)
class Presentation:
    name: str
    mode: str
    generators: tuple[Generator, ...]
    relations: tuple[tuple[str, OperadElement], ...]
    aliases: tuple[Alias, ...] = ()
    coeffs: tuple[CoeffDecl, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.generators = tuple(self.generators)
        self.relations = tuple(self.relations)
        self.aliases = tuple(self.aliases)
        self.coeffs = tuple(self.coeffs)
        if not self.relations:
            raise PresentationError("a presentation needs at least one relation")
        names = {g.name for g in self.generators}
        labels = [lab for lab, _ in self.relations]
        if len(set(labels)) != len(labels):
            raise PresentationError("duplicate relation labels")
        for lab in labels:
            if lab in names or "." in lab:
                raise PresentationError(f"relation label {lab!r} clashes or contains '.'")
        ks = {el.arity for _, el in self.relations}
        if len(ks) != 1:
            raise PresentationError("all relations must have the same arity")
        for lab, el in self.relations:
            if not el:
                raise PresentationError(f"relation {lab} is zero")
            degs = {T.degree(t, self.sig) for t in el.terms}
            if len(degs) != 1:
                raise PresentationError(f"relation {lab} is not homogeneous in degree")
            for t in el.terms:
                if len(T.vertices(t)) == 1:
                    warnings.warn(f"relation {lab} contains the generator {t[0]} on its own; "
                                  "the presentation is not minimal", stacklevel=2)
        self.relation_space  # validates independence

    def __eq__(self, other):
        if not isinstance(other, Presentation):
            return NotImplemented
        return (self.name, self.mode, self.generators, self.relations, self.aliases, self.coeffs) == \
            (other.name, other.mode, other.generators, other.relations, other.aliases, other.coeffs)

    # -- structure ---------------------------------------------------------
    @cached_property
    def sig(self) -> Signature:
        return Signature(self.generators, self.mode)

    @property
    def symmetric(self) -> bool:
        return self.mode == T.SYMMETRIC

    @property
    def relation_arity(self) -> int:
        return self.relations[0][1].arity

    @property
    def relation_degree(self) -> int:
        el = self.relations[0][1]
        return T.degree(next(iter(el.terms)), self.sig)

    def is_quadratic(self) -> bool:
        return all(g.arity == 2 for g in self.generators) and self.relation_arity == 3

    @cached_property
    def relation_space(self) -> dict[str, OperadElement]:
        """Ordered basis of ``R(k)`` keyed by label."""
        k = self.relation_arity
        basis = T.enumerate_basis(self.sig, k)
        index = {t: i for i, t in enumerate(basis)}
        out: dict[str, OperadElement] = {}
        span = Subspace.zero(len(basis))
        for lab, el in self.relations:
            if span.contains(el.coordinates(index, len(basis))):
                raise DependentRelations(f"relation {lab} lies in the span of the earlier ones")
            variants = [tuple(range(1, k + 1))]
            if self.symmetric:
                variants = list(permutations(range(1, k + 1)))
            for w in variants:
                img = relabel_element(el, w, self.sig)
                vec = img.coordinates(index, len(basis))
                if not span.contains(vec):
                    span = span.extended([vec])
                    name = lab if list(w) == list(range(1, k + 1)) else f"{lab}." + "".join(map(str, w))
                    out[name] = img
        return out

    @cached_property
    def _relation_index(self):
        basis = T.enumerate_basis(self.sig, self.relation_arity)
        index = {t: i for i, t in enumerate(basis)}
        labels = list(self.relation_space)
        vecs = [self.relation_space[lab].coordinates(index, len(basis)) for lab in labels]
        return basis, index, labels, vecs

    @cached_property
    def module_sig(self) -> Signature:
        return self.sig.with_extra({lab: self.relation_degree for lab in self.relation_space})

    @cached_property
    def label_arities(self) -> dict[str, int]:
        ar = {g.name: g.arity for g in self.generators}
        for lab in self.relation_space:
            ar[lab] = self.relation_arity
        for lab, _ in self.relations:
            ar[lab] = self.relation_arity
        return ar

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    # -- bases -------------------------------------------------------------
    def tree_basis(self, n: int) -> list[Tree]:
        key = ("trees", n)
        if key not in self._cache:
            self._cache[key] = T.enumerate_basis(self.sig, n)
        return self._cache[key]

    def module_basis(self, n: int) -> list[Tree]:
        key = ("module", n)
        if key not in self._cache:
            self._cache[key] = _module_basis(self, n)
        return self._cache[key]

    def tree_index(self, n: int) -> dict[Tree, int]:
        key = ("tindex", n)
        if key not in self._cache:
            self._cache[key] = {t: i for i, t in enumerate(self.tree_basis(n))}
        return self._cache[key]

    def module_index(self, n: int) -> dict[Tree, int]:
        key = ("mindex", n)
        if key not in self._cache:
            self._cache[key] = {t: i for i, t in enumerate(self.module_basis(n))}
        return self._cache[key]

    # -- module monomials ----------------------------------------------------
    def relation_vertex(self, m: Tree) -> str:
        labs = [v for v in T.vertices(m) if v in self.label_arities and v not in self.sig.by_name]
        if len(labs) != 1:
            raise PresentationError(f"{T.encode(m)} must contain exactly one relation vertex")
        return labs[0]

    def relation_element(self, label: str) -> OperadElement:
        if label in self.relation_space:
            return self.relation_space[label]
        for lab, el in self.relations:
            if lab == label:
                return el
        raise KeyError(label)

    def normalize_module(self, m: Tree) -> dict[Tree, Fraction]:
        """Express an arbitrary module monomial in the module basis."""
        m, sign = T.canonicalize(m, self.module_sig)
        if not self.symmetric:
            label = self.relation_vertex(m)
            if label not in self.relation_space:
                raise PresentationError(f"unknown relation label {label}")
            return {m: Fraction(sign)}
        return {t: c * sign for t, c in self._sort_relation_vertex(m).items()}

    def _sort_relation_vertex(self, m: Tree) -> dict[Tree, Fraction]:
        found = []

        def walk(t, path):
            if T.is_leaf(t):
                return
            if t[0] not in self.sig.by_name:
                found.append((path, t))
            for i, c in enumerate(t[1]):
                walk(c, path + (i,))

        walk(m, ())
        if len(found) != 1:
            raise PresentationError(f"{T.encode(m)} must contain exactly one relation vertex")
        path, (label, kids) = found[0]
        order = sorted(range(len(kids)), key=lambda i: T.min_leaf(kids[i]))
        el = self.relation_element(label)
        if order != list(range(len(kids))) or label not in self.relation_space:
            inv = [0] * len(order)
            for new_pos, old in enumerate(order):
                inv[old] = new_pos + 1
            el = relabel_element(el, inv, self.sig)
        combo = self.express_relation(el)
        sorted_kids = tuple(kids[i] for i in order)
        out: dict[Tree, Fraction] = {}
        for lab, c in combo.items():
            t = _replace_at(m, path, (lab, sorted_kids))
            out[t] = out.get(t, Fraction(0)) + c
        return {t: c for t, c in out.items() if c}

    def express_relation(self, el: OperadElement) -> dict[str, Fraction]:
        """Coordinates of an element of ``R(k)`` in the relation basis."""
        basis, index, labels, vecs = self._relation_index
        target = el.coordinates(index, len(basis))
        sol = _solve_combination(vecs, target)
        if sol is None:
            raise PresentationError("element does not lie in the relation space")
        return {labels[i]: c for i, c in enumerate(sol) if c}

    def act_module(self, m: Tree, perm) -> dict[Tree, Fraction]:
        """Relabel leaf ``j`` of a module monomial as ``perm[j-1]``."""
        return self.normalize_module(T.relabel(m, perm))

    def pi_image(self, m: Tree) -> dict[Tree, Fraction]:
        """Substitute the relation into a module monomial."""
        label = self.relation_vertex(m)
        el = self.relation_element(label)
        out: dict[Tree, Fraction] = {}
        for term, c in el.terms.items():
            t, s = T.substitute_vertex(m, label, term, self.module_sig)
            out[t] = out.get(t, Fraction(0)) + c * s
        return {t: c for t, c in out.items() if c}

    def parse_module(self, text: str) -> dict[Tree, Fraction]:
        """Parse a combination of (possibly non-canonical) module monomials."""
        out: dict[Tree, Fraction] = {}
        for coef, mono in T.split_combination(text):
            t = T.parse_tree(mono)
            T.check_arities(t, self.label_arities)
            ls = T.leaves(t)
            if sorted(ls) != list(range(1, len(ls) + 1)):
                raise PresentationError(f"leaves of {mono} must be 1..{len(ls)}")
            if not self.symmetric and ls != sorted(ls):
                raise PresentationError(f"nonsigma monomial {mono} must list leaves in order")
            for b, c in self.normalize_module(t).items():
                out[b] = out.get(b, Fraction(0)) + coef * c
        return {t: c for t, c in out.items() if c}

    def parse_tree_combination(self, text: str) -> dict[Tree, Fraction]:
        el = T.parse_element(text, self.sig)
        return dict(el.terms)

    # -- pi ----------------------------------------------------------------
    def assemble_pi(self, n: int) -> PiMatrix:
        key = ("pi", n)
        if key in self._cache:
            return self._cache[key]
        rows = self.module_basis(n)
        cols = self.tree_basis(n)
        cidx = self.tree_index(n)
        entries = {}
        for i, m in enumerate(rows):
            for t, c in self.pi_image(m).items():
                entries[(i, cidx[t])] = c
        mat = SparseMatrix(len(rows), len(cols), entries,
                           tuple(T.encode(r) for r in rows), tuple(T.encode(c) for c in cols))
        pm = PiMatrix(n, tuple(rows), tuple(cols), mat)
        self._cache[key] = pm
        return pm

    def operad_dims(self, N: int) -> list[int]:
        """``dim P(n)`` for ``2 <= n <= N`` as cokernel dimensions of pi."""
        if N < 2:
            raise ValueError("N must be >= 2")
        out = []
        for n in range(2, N + 1):
            cols = len(self.tree_basis(n))
            if n < self.relation_arity:
                out.append(cols)
                continue
            out.append(cols - rank(self.assemble_pi(n).matrix))
        return out

    # -- aliases -----------------------------------------------------------
    def alias_table(self, kind: str) -> dict[str, dict[Tree, Fraction]]:
        out = {}
        for a in self.aliases:
            if a.kind != kind:
                continue
            out[a.label] = self.parse_module(a.text) if kind == "module" \
                else self.parse_tree_combination(a.text)
        return out

    def alias_frame(self, kind: str, n: int):
        """Map each alias to ``(basis element, sign)`` when it is a signed basis element.

        Returns ``None`` unless the aliases of that kind cover the basis at
        arity ``n`` exactly once up to sign.
        """
        table = {lab: combo for lab, combo in self.alias_table(kind).items()
                 if combo and T.arity(next(iter(combo))) == n}
        basis = self.module_basis(n) if kind == "module" else self.tree_basis(n)
        if len(table) != len(basis):
            return None
        frame = {}
        for lab, combo in table.items():
            if len(combo) != 1:
                return None
            (t, c), = combo.items()
            if abs(c) != 1:
                return None
            frame[lab] = (t, int(c))
        if {t for t, _ in frame.values()} != set(basis):
            return None
        return frame

    # -- text format -------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"operad {self.name}", f"mode {self.mode}"]
        for g in self.generators:
            s = f"gen {g.name} arity {g.arity}"
            if g.degree:
                s += f" degree {g.degree}"
            if g.symmetry != "none":
                s += " sym " + ("anti" if g.symmetry == "sign" else "comm")
            lines.append(s)
        for lab, el in self.relations:
            lines.append(f"rel {lab} : {el}")
        for a in self.aliases:
            lines.append(f"alias {a.kind} {a.label} = {a.text}")
        for c in self.coeffs:
            lines.append(f"coeff {c.relation} {T.encode(c.term)} {c.base} {c.scope}")
        return "\n".join(lines) + "\n"


def relabel_element(el: OperadElement, w, sig: Signature) -> OperadElement:
    pairs = []
    for t, c in el.terms.items():
        t2, s = T.act(t, w, sig)
        pairs.append((t2, c * s))
    return OperadElement.from_pairs(el.arity, pairs)


def _replace_at(t: Tree, path: tuple, new: Tree) -> Tree:
    if not path:
        return new
    kids = list(t[1])
    kids[path[0]] = _replace_at(kids[path[0]], path[1:], new)
    return (t[0], tuple(kids))


def _solve_combination(vecs, target):
    """Coefficients expressing ``target`` in the independent ``vecs``, or None."""
    from .linalg import rref
    k = len(vecs)
    if k == 0:
        return None if any(target) else []
    m = len(target)
    # columns are the vecs; augment with the target and reduce
    rows = [[vecs[j][i] for j in range(k)] + [target[i]] for i in range(m)]
    red = rref(rows)
    sol = [Fraction(0)] * k
    for r in red:
        lead = next(j for j, v in enumerate(r) if v)
        if lead == k:
            return None
        sol[lead] = r[k]
    return sol


# -- module basis enumeration -----------------------------------------------

def _module_basis(p: Presentation, n: int) -> list[Tree]:
    k = p.relation_arity
    if n < k:
        return []
    rel_labels = list(p.relation_space)
    gens = p.generators
    if p.symmetric:
        out = _sym_marked(frozenset(range(1, n + 1)), 1, gens, rel_labels, k, {})
    else:
        out = [T._number_leaves(s) for s in _planar_marked(n, 1, gens, rel_labels, k, {})]
    out = sorted(set(out), key=T.sort_key)
    return out


def _planar_marked(m, r, gens, rels, k, memo):
    if m == 1:
        return [0] if r == 0 else []
    key = (m, r)
    if key in memo:
        return memo[key]
    out = []
    for g in gens:
        for comp in T._compositions(m, g.arity):
            for pos in ([None] if r == 0 else range(g.arity)):
                subs = [_planar_marked(c, 1 if i == pos else 0, gens, rels, k, memo)
                        for i, c in enumerate(comp)]
                for kids in T._product(subs):
                    out.append((g.name, kids))
    if r == 1:
        for comp in T._compositions(m, k):
            subs = [_planar_marked(c, 0, gens, rels, k, memo) for c in comp]
            for kids in T._product(subs):
                for lab in rels:
                    out.append((lab, kids))
    memo[key] = out
    return out


def _set_partitions_sorted(items: tuple, k: int):
    """Partitions of ``items`` into ``k`` blocks listed by increasing minimum."""
    if k == 1:
        yield (items,)
        return
    if len(items) < k:
        return
    first = items[0]
    rest = items[1:]
    # choose the block containing ``first``; remaining blocks recursively
    from itertools import combinations
    for size in range(0, len(rest) - (k - 1) + 1):
        for extra in combinations(rest, size):
            block = (first,) + extra
            remaining = tuple(x for x in rest if x not in extra)
            for tail in _set_partitions_sorted(remaining, k - 1):
                yield (block,) + tail


def _sym_marked(labels, r, gens, rels, k, memo):
    if len(labels) == 1:
        return [next(iter(labels))] if r == 0 else []
    key = (labels, r)
    if key in memo:
        return memo[key]
    items = tuple(sorted(labels))
    out = []
    for g in gens:
        if g.symmetry != "none":
            blockings = [(a, tuple(x for x in items if x not in a))
                         for a in _blocks_with_min(items)]
        else:
            blockings = list(T._ordered_partitions(items, g.arity))
        for blocks in blockings:
            for pos in ([None] if r == 0 else range(len(blocks))):
                subs = [_sym_marked(frozenset(b), 1 if i == pos else 0, gens, rels, k, memo)
                        for i, b in enumerate(blocks)]
                for kids in T._product(subs):
                    out.append((g.name, kids))
    if r == 1:
        for blocks in _set_partitions_sorted(items, k):
            subs = [_sym_marked(frozenset(b), 0, gens, rels, k, memo) for b in blocks]
            for kids in T._product(subs):
                for lab in rels:
                    out.append((lab, kids))
    memo[key] = out
    return out


def _blocks_with_min(items):
    from itertools import combinations
    lo, rest = items[0], items[1:]
    for size in range(0, len(rest)):
        for extra in combinations(rest, size):
            yield (lo,) + extra


# -- parsing -----------------------------------------------------------------

def parse_presentation(text: str) -> Presentation:
    name = None
    mode = T.NONSIGMA
    gens: list[Generator] = []
    rel_lines: list[tuple[int, str, str]] = []
    aliases: list[Alias] = []
    coeff_lines: list[tuple[int, list[str]]] = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if word == "operad":
                if not rest:
                    raise PresentationError("missing operad name")
                name = rest
            elif word == "mode":
                if rest not in T.MODES:
                    raise PresentationError(f"unknown mode {rest!r}")
                mode = rest
            elif word == "gen":
                gens.append(_parse_gen(rest))
            elif word == "rel":
                lab, sep, body = rest.partition(":")
                if not sep or not lab.strip() or not body.strip():
                    raise PresentationError("expected 'rel <label> : <sum>'")
                rel_lines.append((no, lab.strip(), body.strip()))
            elif word == "alias":
                kind, _, more = rest.partition(" ")
                lab, sep, body = more.partition("=")
                if kind not in ("tree", "module") or not sep:
                    raise PresentationError("expected 'alias tree|module <label> = <sum>'")
                aliases.append(Alias(kind, lab.strip(), body.strip()))
            elif word == "coeff":
                coeff_lines.append((no, rest.split()))
            else:
                raise PresentationError(f"unknown statement {word!r}")
        except (PresentationError, ValueError) as e:
            raise PresentationError(f"line {no}: {e}") from None
    if name is None:
        raise PresentationError("missing 'operad <name>' line")
    try:
        sig = Signature(gens, mode)
    except ValueError as e:
        raise PresentationError(str(e)) from None
    arities = {g.name: g.arity for g in gens}
    rels = []
    for no, lab, body in rel_lines:
        try:
            rels.append((lab, T.parse_element(body, sig, arities)))
        except ValueError as e:
            raise PresentationError(f"line {no}: {e}") from None
    coeffs = []
    for no, parts in coeff_lines:
        if len(parts) not in (3, 4):
            raise PresentationError(f"line {no}: expected 'coeff <rel> <term> <symbol> [leaves|root]'")
        scope = parts[3] if len(parts) == 4 else "leaves"
        if scope not in ("leaves", "root"):
            raise PresentationError(f"line {no}: unknown scope {scope!r}")
        try:
            term = T.parse_tree(parts[1])
            T.check_arities(term, arities)
        except ValueError as e:
            raise PresentationError(f"line {no}: {e}") from None
        term, _ = T.canonicalize(term, sig)
        coeffs.append(CoeffDecl(parts[0], term, parts[2], scope))
    p = Presentation(name, mode, tuple(gens), tuple(rels), tuple(aliases), tuple(coeffs))
    for c in coeffs:
        el = p.relation_element(c.relation)
        if c.term not in el.terms:
            raise PresentationError(f"coefficient term {T.encode(c.term)} is not a term of {c.relation}")
    return p


def _parse_gen(rest: str) -> Generator:
    parts = rest.split()
    if len(parts) < 3 or parts[1] != "arity":
        raise PresentationError("expected 'gen <name> arity <k> [degree <d>] [sym anti|comm]'")
    name = parts[0]
    k = int(parts[2])
    deg = 0
    sym = "none"
    i = 3
    while i < len(parts):
        if parts[i] == "degree" and i + 1 < len(parts):
            deg = int(parts[i + 1])
        elif parts[i] == "sym" and i + 1 < len(parts):
            sym = {"anti": "sign", "comm": "trivial"}.get(parts[i + 1])
            if sym is None:
                raise PresentationError(f"unknown symmetry {parts[i + 1]!r}")
        else:
            raise PresentationError(f"unexpected token {parts[i]!r}")
        i += 2
    return Generator(name, k, deg, sym)


def load(name_or_path: str) -> Presentation:
    """Load a builtin presentation by name, or a presentation file by path."""
    path = Path(name_or_path)
    if name_or_path in BUILTINS:
        path = BUILTIN_DIR / f"{name_or_path}.pres"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise PresentationError(f"cannot read {name_or_path}: {e}") from None
    return parse_presentation(text)


def formula_module_dim(p: Presentation) -> tuple[int, int]:
    """Counts of trees and module monomials at arity 4 predicted by the closed formulas.

    Valid for binary generators and ternary relations: ``(5 e^3, 5 e r)`` in
    nonsigma mode and ``(15 e^3, 10 e r)`` in symmetric mode, where ``e`` and
    ``r`` are the dimensions of ``E(2)`` and ``R(3)`` as Sigma-modules.
    """
    if not p.is_quadratic():
        raise PresentationError("closed formulas need binary generators and ternary relations")
    if p.symmetric:
        e = sum(1 if g.symmetry != "none" else 2 for g in p.generators)
        r = len(p.relation_space)
        return 15 * e ** 3, 10 * e * r
    e = len(p.generators)
    r = len(p.relations)
    return 5 * e ** 3, 5 * e * r
