"""Word equations around the cycles of a decorated Tel-A-graph.

A quantized matrix replaces the entries of pi by a sign times an opaque
coefficient symbol.  On the dual graph (vertices = relation rows, edges =
tree columns) a kernel vector ``sum x_r r`` must satisfy, for each column
joining rows ``r`` and ``r'``, ``c_r x_r + c_r' x_r' = 0``; crossing the
edge from ``r`` to ``r'`` therefore multiplies by ``-c_r'^-1 c_r``.  Going
round a cycle gives a product that has to be the identity.

Symbols are never rewritten: no coassociativity, no expansion of
comultiplications.  A word is a tuple of ``(symbol, exponent)`` letters
written in composition order, so the letter applied first is the rightmost.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import trees as T
from .graphs import DUAL, Cycle, TelAGraph, WrongKind, OrientationMissing, cycle_basis
from .linalg import parse_rational
from .presentation import BUILTIN_DIR, Presentation, PresentationError

HOLE = "·"


class MissingLabel(KeyError):
    pass


@dataclass(frozen=True, order=True)
class CoeffSymbol:
    """An invertible coefficient: ``base`` placed into the ``decoration`` template.

    The template marks the base with ``·``; an empty decoration is the bare
    base.  ``inverse`` toggles with :meth:`inverted`.
    """

    base: str
    decoration: str = ""
    inverse: bool = False

    def inverted(self) -> "CoeffSymbol":
        return CoeffSymbol(self.base, self.decoration, not self.inverse)

    @property
    def positive(self) -> "CoeffSymbol":
        return CoeffSymbol(self.base, self.decoration, False)

    def expanded(self) -> str:
        """The decorated symbol written out, e.g. ``(Δ⊗1⊗1)(Phi)``."""
        body = self.decoration.replace(HOLE, self.base) if self.decoration else self.base
        return f"[{body}]^-1" if self.inverse else body

    def __str__(self) -> str:
        s = f"{self.base}[{self.decoration}]" if self.decoration else self.base
        return s + "^-1" if self.inverse else s

    @classmethod
    def parse(cls, text: str) -> "CoeffSymbol":
        names = re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text)
        if len(set(names)) != 1:
            raise ValueError(f"expected exactly one base symbol in {text!r}")
        base = names[0]
        if text.count(base) != 1:
            raise ValueError(f"base {base} occurs more than once in {text!r}")
        deco = text.replace(base, HOLE)
        return cls(base, "" if deco == HOLE else deco)


Letter = tuple  # (CoeffSymbol with inverse=False, +1 | -1)


def _letter(sym: CoeffSymbol, exp: int = 1) -> Letter:
    return (sym.positive, -exp if sym.inverse else exp)


def letter_text(letter: Letter) -> str:
    sym, exp = letter
    return str(sym) + ("^-1" if exp < 0 else "")


def invert_word(word: Sequence[Letter]) -> tuple:
    return tuple((s, -e) for s, e in reversed(word))


def free_reduce(word: Iterable[Letter]) -> tuple:
    """Cancel adjacent ``s s^-1`` pairs, scanning left to right."""
    out: list = []
    for s, e in word:
        if out and out[-1][0] == s and out[-1][1] == -e:
            out.pop()
        else:
            out.append((s, e))
    return tuple(out)


def free_reduce_right(word: Sequence[Letter]) -> tuple:
    """Same reduction, scanning right to left."""
    return tuple(reversed(free_reduce(reversed(list(word)))))


def cyclic_reduce(word: Sequence[Letter]) -> tuple:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0][0] == w[-1][0] and w[0][1] == -w[-1][1]:
        w = w[1:-1]
    return tuple(w)


@dataclass(frozen=True)
class WordEquation:
    """``sign * word = 1``."""

    word: tuple
    sign: Fraction = Fraction(1)
    cycle: Cycle | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "word", free_reduce(self.word))
        object.__setattr__(self, "sign", Fraction(self.sign))

    def inverse(self) -> "WordEquation":
        return WordEquation(invert_word(self.word), 1 / self.sign, self.cycle)

    @property
    def trivial(self) -> bool:
        return not self.word and self.sign == 1

    def product_text(self) -> str:
        body = " · ".join(letter_text(l) for l in self.word) or "1"
        if self.sign == -1:
            body = "-" + body
        elif self.sign != 1:
            body = f"{self.sign} " + body
        return f"{body} = 1"

    def two_sided_text(self) -> str:
        """``P = Q`` with positive letters on the left, when the word splits that way."""
        w = cyclic_reduce(self.word)
        if not w:
            return self.product_text()
        n = len(w)
        for k in range(n):
            rot = w[k:] + w[:k]
            signs = [e for _, e in rot]
            cut = next((i for i, e in enumerate(signs) if e < 0), n)
            if all(e < 0 for e in signs[cut:]) and cut > 0:
                lhs, rhs = rot[:cut], invert_word(rot[cut:])
                break
        else:
            cut = next(i for i, (_, e) in enumerate(w) if e != w[0][1])
            lhs, rhs = w[:cut], invert_word(w[cut:])
        left = "".join(_paren(s) for s, _ in lhs)
        right = "".join(_paren(s) for s, _ in rhs) or "1"
        if self.sign == -1:
            right = "-" + right
        return f"{left} = {right}"


def _paren(sym: CoeffSymbol) -> str:
    text = sym.expanded()
    return text if text.endswith(")") and not text.startswith("[") else f"({text})"


def _rotations(w: tuple):
    for k in range(max(len(w), 1)):
        yield w[k:] + w[:k]


def word_equivalent(a, b) -> bool:
    """Equal up to cyclic rotation and global inversion (signs must agree)."""
    sa = a.sign if isinstance(a, WordEquation) else Fraction(1)
    sb = b.sign if isinstance(b, WordEquation) else Fraction(1)
    wa = cyclic_reduce(a.word if isinstance(a, WordEquation) else a)
    wb = cyclic_reduce(b.word if isinstance(b, WordEquation) else b)
    if len(wa) != len(wb):
        return False
    if sa == sb and any(r == wb for r in _rotations(wa)):
        return True
    return sa == 1 / sb and any(r == wb for r in _rotations(invert_word(wa)))


# -- quantized entries -------------------------------------------------------

@dataclass(frozen=True)
class Entry:
    """A quantized matrix entry ``scalar * symbol`` (``symbol`` may be absent)."""

    scalar: Fraction
    symbol: CoeffSymbol | None = None

    def word(self) -> tuple:
        return (_letter(self.symbol),) if self.symbol else ()

    def __str__(self) -> str:
        if self.symbol is None:
            return str(self.scalar)
        s = self.symbol.expanded()
        return s if self.scalar == 1 else ("-" + s if self.scalar == -1 else f"{self.scalar}*{s}")

    @classmethod
    def parse(cls, text: str) -> "Entry":
        text = text.strip()
        try:
            return cls(parse_rational(text))
        except (ValueError, ZeroDivisionError):
            pass
        sign = Fraction(1)
        if text.startswith("-"):
            sign, text = Fraction(-1), text[1:].strip()
        return cls(sign, CoeffSymbol.parse(text))


def _op(sub: T.Tree) -> str:
    if T.is_leaf(sub):
        return "1"
    if all(T.is_leaf(c) for c in sub[1]):
        return "Δ"
    low = min(T.leaves(sub))
    return "Δ[" + T.encode(T.relabel(sub, {l: l - low + 1 for l in T.leaves(sub)})) + "]"


def _decoration(ops: Sequence[str], before: int, after: int) -> str:
    inner = HOLE if all(o == "1" for o in ops) else "(" + "⊗".join(ops) + ")(" + HOLE + ")"
    return "1⊗" * before + inner + "⊗1" * after


def _find_relation_vertex(p: Presentation, m: T.Tree):
    def walk(t):
        if T.is_leaf(t):
            return None
        if t[0] not in p.sig.by_name:
            return t
        for c in t[1]:
            hit = walk(c)
            if hit is not None:
                return hit
        return None
    return walk(m)


def quantized_image(p: Presentation, m: T.Tree) -> dict[T.Tree, Entry]:
    """``pi(m)`` with each term carrying the decorated coefficient of its relation term.

    Only nonsigma presentations carry coefficients.  Leaves-scope symbols are
    decorated by what is grafted into each relation input, root-scope symbols
    by the subtrees hanging from the term's root vertex; leaves outside the
    relation contribute ``1⊗`` and ``⊗1``.
    """
    if p.symmetric:
        raise PresentationError("formal coefficients are supported for nonsigma presentations only")
    label = p.relation_vertex(m)
    el = p.relation_element(label)
    rv = _find_relation_vertex(p, m)
    kids = rv[1]
    span = T.leaves(rv)
    before = min(span) - 1
    after = T.arity(m) - max(span)
    decls = {c.term: c for c in p.coeffs if c.relation == label}
    out: dict = {}
    for term, c in el.terms.items():
        t, s = T.substitute_vertex(m, label, term, p.module_sig)
        d = decls.get(term)
        sym = None
        if d is not None:
            if d.scope == "leaves":
                ops = [_op(k) for k in kids]
            else:
                grafted = T.substitute_leaves(term, {j + 1: k for j, k in enumerate(kids)})
                ops = [_op(k) for k in grafted[1]]
            sym = CoeffSymbol(d.base, _decoration(ops, before, after))
        if t in out:
            raise PresentationError(f"two terms of {T.encode(m)} land on {T.encode(t)}")
        out[t] = Entry(c * s, sym)
    return out


def derived_entries(p: Presentation, n: int) -> dict[tuple[str, str], Entry]:
    """Quantized entries keyed by (row label, column label) in the alias frame when available."""
    rf = p.alias_frame("module", n)
    cf = p.alias_frame("tree", n)
    rows = {t: (lab, s) for lab, (t, s) in rf.items()} if rf else \
        {t: (T.encode(t), 1) for t in p.module_basis(n)}
    cols = {t: (lab, s) for lab, (t, s) in cf.items()} if cf else \
        {t: (T.encode(t), 1) for t in p.tree_basis(n)}
    out = {}
    for m in p.module_basis(n):
        rl, rs = rows[m]
        for t, e in quantized_image(p, m).items():
            cl, cs = cols[t]
            out[(rl, cl)] = Entry(e.scalar * rs * cs, e.symbol)
    return out


def load_entries(name_or_path: str, presentation: str | None = None) -> dict[tuple[str, str], Entry]:
    """Read a labels file: ``row col value`` per line, ``#`` comments."""
    path = Path(name_or_path)
    if not path.exists():
        cand = BUILTIN_DIR / f"{presentation}-{name_or_path}.labels" if presentation else None
        if cand is None or not cand.exists():
            raise FileNotFoundError(f"no labels file {name_or_path!r}")
        path = cand
    out = {}
    for no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) != 3:
            raise ValueError(f"line {no}: expected 'row column value'")
        try:
            out[(parts[0], parts[1])] = Entry.parse(parts[2])
        except ValueError as e:
            raise ValueError(f"line {no}: {e}") from None
    return out


def transfer_labels(g: TelAGraph, entries: Mapping[tuple[str, str], Entry]) -> dict[str, "EdgeWord"]:
    """Per-edge transfer ``-c_head^-1 c_tail`` on an oriented dual graph.

    Every entry's scalar must equal the classical matrix entry, so the
    decoration specializes to the undecorated relation.
    """
    if g.kind != DUAL:
        raise WrongKind("transfers are read along the dual graph")
    if not g.oriented:
        raise OrientationMissing("orient the graph first")
    if g.source is not None:
        m = g.source
        for (i, j), v in m.entries.items():
            key = (m.row_labels[i], m.col_labels[j])
            if key not in entries:
                raise MissingLabel(f"no entry for row {key[0]}, column {key[1]}")
            if entries[key].scalar != v:
                raise ValueError(f"entry {key} has scalar {entries[key].scalar}, matrix has {v}")
        extra = set(entries) - {(m.row_labels[i], m.col_labels[j]) for i, j in m.entries}
        if extra:
            raise ValueError(f"entries outside the support of pi: {sorted(extra)[:3]}")
    out = {}
    for e, (tail, head) in enumerate(g.edges):
        col = g.edge_labels[e]
        try:
            ct = entries[(g.vertices[tail], col)]
            ch = entries[(g.vertices[head], col)]
        except KeyError as err:
            raise MissingLabel(f"edge {col} lacks an entry: {err}") from None
        word = invert_word(ch.word()) + ct.word()
        out[col] = EdgeWord(-ct.scalar / ch.scalar, free_reduce(word))
    return out


@dataclass(frozen=True)
class EdgeWord:
    scalar: Fraction
    word: tuple

    def inverse(self) -> "EdgeWord":
        return EdgeWord(1 / self.scalar, invert_word(self.word))


@dataclass(frozen=True)
class DecoratedGraph:
    graph: TelAGraph
    labels: tuple  # EdgeWord per edge index


def decorate(g: TelAGraph, labels: Mapping) -> DecoratedGraph:
    """Attach a word to every edge; a bare :class:`CoeffSymbol` counts as a one-letter word."""
    if not g.oriented:
        raise OrientationMissing("orient the graph first")
    out = []
    for e, lab in enumerate(g.edge_labels):
        if lab not in labels:
            raise MissingLabel(f"edge {lab} has no label")
        v = labels[lab]
        if isinstance(v, CoeffSymbol):
            v = EdgeWord(Fraction(1), (_letter(v),))
        out.append(v)
    return DecoratedGraph(g, tuple(out))


def cycle_equation(dg: DecoratedGraph, c: Cycle) -> WordEquation:
    word: tuple = ()
    sign = Fraction(1)
    for e, s in c.steps:
        ew = dg.labels[e] if s > 0 else dg.labels[e].inverse()
        word = ew.word + word  # later crossings act after earlier ones
        sign *= ew.scalar
    return WordEquation(word, sign, c)


def derive_equations(dg: DecoratedGraph, cycles: Sequence[Cycle] | None = None) -> list[WordEquation]:
    """One equation per cycle (the breadth-first cycle basis by default)."""
    if cycles is None:
        cycles = cycle_basis(dg.graph)
    return [cycle_equation(dg, c) for c in cycles]


def pentagon_word(base: str = "Phi") -> WordEquation:
    """``(1⊗Phi)((1⊗Δ⊗1)Phi)(Phi⊗1) [(Δ⊗1⊗1)Phi]^-1 [(1⊗1⊗Δ)Phi]^-1 = 1``."""
    def s(text):
        return CoeffSymbol.parse(text.replace("Phi", base))
    return WordEquation((
        (s("1⊗Phi"), 1),
        (s("(1⊗Δ⊗1)(Phi)"), 1),
        (s("Phi⊗1"), 1),
        (s("(Δ⊗1⊗1)(Phi)"), -1),
        (s("(1⊗1⊗Δ)(Phi)"), -1),
    ))


def equations_text(eqs: Sequence[WordEquation], g: TelAGraph | None = None) -> str:
    lines = []
    for i, eq in enumerate(eqs, 1):
        where = ""
        if g is not None and eq.cycle is not None:
            where = " around " + " ".join(g.vertices[v] for v in eq.cycle.vertices)
        lines.append(f"equation {i}{where}")
        lines.append(f"  {eq.product_text()}")
        lines.append(f"  {eq.two_sided_text()}")
    return "\n".join(lines) + ("\n" if lines else "")
