"""Basis monomials of free operads.

A tree is either a leaf (a positive ``int``) or a node ``(label, children)``
where ``children`` is a tuple of trees.  Labels are generator names, or
relation labels when the tree is a module monomial (see ``presentation``).

Two modes are supported.  In ``nonsigma`` mode leaves are always ``1..n``
from left to right and trees are planar.  In ``symmetric`` mode leaves carry
an arbitrary labelling and binary generators may be declared symmetric
(``trivial``) or antisymmetric (``sign``); canonical forms put the child with
the smaller minimal leaf first.

Generators may carry a degree in ``nonsigma`` mode.  A monomial is then read
as the tensor product of its vertices in preorder, so any grafting that
reorders odd vertices picks up the corresponding Koszul sign.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence, Union

NONSIGMA = "nonsigma"
SYMMETRIC = "symmetric"
MODES = (NONSIGMA, SYMMETRIC)

Tree = Union[int, tuple]


class UnsupportedArity(ValueError):
    """A generator of arity other than 2 declares a Sigma_2 symmetry."""


class SlotOutOfRange(IndexError):
    pass


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    name: str
    arity: int
    degree: int = 0
    symmetry: str = "none"  # none | trivial | sign

    def __post_init__(self):
        if self.arity < 2:
            raise ValueError(f"generator {self.name} must have arity >= 2")
        if self.symmetry not in ("none", "trivial", "sign"):
            raise ValueError(f"unknown symmetry {self.symmetry!r}")
        if self.symmetry != "none" and self.arity != 2:
            raise UnsupportedArity(
                f"generator {self.name} of arity {self.arity} declares symmetry {self.symmetry}")


class Signature:
    """Generators plus the mode; knows how to canonicalize and grade trees."""

    def __init__(self, generators: Iterable[Generator], mode: str = NONSIGMA,
                 extra_degrees: Mapping[str, int] | None = None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.generators = tuple(generators)
        self.by_name = {g.name: g for g in self.generators}
        if len(self.by_name) != len(self.generators):
            raise ValueError("duplicate generator names")
        # degrees of opaque labels such as relation vertices
        self.extra_degrees = dict(extra_degrees or {})
        if mode == NONSIGMA and any(g.symmetry != "none" for g in self.generators):
            raise ValueError("symmetries can only be declared in symmetric mode")
        if mode == SYMMETRIC and any(g.degree for g in self.generators):
            raise ValueError("graded generators are only supported in nonsigma mode")

    @property
    def symmetric(self) -> bool:
        return self.mode == SYMMETRIC

    def degree_of(self, label: str) -> int:
        g = self.by_name.get(label)
        if g is not None:
            return g.degree
        return self.extra_degrees.get(label, 0)

    def symmetry_of(self, label: str) -> str:
        g = self.by_name.get(label)
        return g.symmetry if g is not None else "none"

    def graded(self) -> bool:
        return any(g.degree for g in self.generators) or any(self.extra_degrees.values())

    def with_extra(self, degrees: Mapping[str, int]) -> "Signature":
        merged = dict(self.extra_degrees)
        merged.update(degrees)
        return Signature(self.generators, self.mode, merged)


# -- basic tree helpers ------------------------------------------------------

def is_leaf(t: Tree) -> bool:
    return isinstance(t, int)


def node(label: str, *children: Tree) -> tuple:
    return (label, tuple(children))


def leaves(t: Tree) -> list[int]:
    if is_leaf(t):
        return [t]
    out = []
    for c in t[1]:
        out.extend(leaves(c))
    return out


def arity(t: Tree) -> int:
    return len(leaves(t))


def min_leaf(t: Tree) -> int:
    return t if is_leaf(t) else min(min_leaf(c) for c in t[1])


def vertices(t: Tree) -> list[str]:
    """Vertex labels in preorder."""
    if is_leaf(t):
        return []
    out = [t[0]]
    for c in t[1]:
        out.extend(vertices(c))
    return out


def degree(t: Tree, sig: Signature) -> int:
    return sum(sig.degree_of(v) for v in vertices(t))


def encode(t: Tree) -> str:
    if is_leaf(t):
        return str(t)
    return f"{t[0]}({','.join(encode(c) for c in t[1])})"


def sort_key(t: Tree) -> str:
    return encode(t)


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_.']*)|(?P<sym>[(),]))")


def parse_tree(text: str) -> Tree:
    """Parse the prefix encoding ``x(x(1,2),3)`` back into a tree."""
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos} in {text!r}")
        pos = m.end()
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
    out, i = _parse_tokens(tokens, 0, text)
    if i != len(tokens):
        raise ParseError(f"trailing input in {text!r}")
    return out


def _parse_tokens(tokens, i, text):
    if i >= len(tokens):
        raise ParseError(f"unexpected end of {text!r}")
    kind, val = tokens[i]
    if kind == "int":
        v = int(val)
        if v < 1:
            raise ParseError("leaf labels start at 1")
        return v, i + 1
    if kind != "name":
        raise ParseError(f"expected leaf or label in {text!r}")
    if i + 1 >= len(tokens) or tokens[i + 1] != ("sym", "("):
        raise ParseError(f"label {val} needs an argument list in {text!r}")
    i += 2
    children = []
    while True:
        c, i = _parse_tokens(tokens, i, text)
        children.append(c)
        if i >= len(tokens):
            raise ParseError(f"unclosed parenthesis in {text!r}")
        if tokens[i] == ("sym", ","):
            i += 1
            continue
        if tokens[i] == ("sym", ")"):
            return (val, tuple(children)), i + 1
        raise ParseError(f"expected ',' or ')' in {text!r}")


def relabel(t: Tree, mapping: Mapping[int, int] | Sequence[int]) -> Tree:
    """Replace leaf ``j`` by ``mapping[j]`` (a dict, or a 1-indexed sequence)."""
    if isinstance(mapping, Mapping):
        get = mapping.__getitem__
    else:
        get = lambda j: mapping[j - 1]
    return _relabel(t, get)


def _relabel(t, get):
    if is_leaf(t):
        return get(t)
    return (t[0], tuple(_relabel(c, get) for c in t[1]))


def substitute_leaves(t: Tree, subs: Mapping[int, Tree]) -> Tree:
    """Replace leaf ``j`` by the tree ``subs[j]`` (leaves not in ``subs`` stay)."""
    if is_leaf(t):
        return subs.get(t, t)
    return (t[0], tuple(substitute_leaves(c, subs) for c in t[1]))


def check_arities(t: Tree, arities: Mapping[str, int]) -> None:
    if is_leaf(t):
        return
    want = arities.get(t[0])
    if want is None:
        raise ParseError(f"unknown label {t[0]!r}")
    if want != len(t[1]):
        raise ParseError(f"{t[0]} expects {want} children, got {len(t[1])}")
    for c in t[1]:
        check_arities(c, arities)


# -- canonical forms ---------------------------------------------------------

def canonicalize(t: Tree, sig: Signature) -> tuple[Tree, int]:
    """Canonical representative and the sign picked up on the way.

    Non-Sigma trees are already canonical.  In symmetric mode every binary
    vertex with a declared symmetry is ordered so that the child holding the
    smallest leaf comes first; antisymmetric vertices contribute ``-1`` per
    swap.
    """
    if not sig.symmetric or is_leaf(t):
        return t, 1
    label, children = t
    sign = 1
    new = []
    for c in children:
        cc, s = canonicalize(c, sig)
        new.append(cc)
        sign *= s
    sym = sig.symmetry_of(label)
    if sym != "none" and min_leaf(new[0]) > min_leaf(new[1]):
        new.reverse()
        if sym == "sign":
            sign = -sign
    return (label, tuple(new)), sign


def is_canonical(t: Tree, sig: Signature) -> bool:
    c, s = canonicalize(t, sig)
    return c == t and s == 1


# -- enumeration -------------------------------------------------------------

def enumerate_basis(sig: Signature, n: int) -> list[Tree]:
    """Canonical basis of ``F(E)(n)`` sorted by encoding."""
    if n < 1:
        raise ValueError("arity must be >= 1")
    if n == 1:
        return [1]
    if sig.symmetric:
        out = list(_sym_trees(frozenset(range(1, n + 1)), sig.generators, {}))
    else:
        out = [_number_leaves(s) for s in _planar_shapes(n, sig.generators, {})]
    out.sort(key=sort_key)
    return out


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _planar_shapes(m: int, gens, memo) -> list:
    """Planar shapes with ``m`` leaves; leaves are the placeholder 0."""
    if m == 1:
        return [0]
    if m in memo:
        return memo[m]
    out = []
    for g in gens:
        for comp in _compositions(m, g.arity):
            if len(comp) != g.arity:
                continue
            for kids in _product([_planar_shapes(c, gens, memo) for c in comp]):
                out.append((g.name, tuple(kids)))
    memo[m] = out
    return out


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for tail in _product(lists[1:]):
            yield (head,) + tail


def _number_leaves(shape) -> Tree:
    counter = iter(range(1, 10**9))

    def walk(s):
        if s == 0:
            return next(counter)
        return (s[0], tuple(walk(c) for c in s[1]))

    return walk(shape)


def _ordered_partitions(items: tuple, k: int) -> Iterator[tuple[tuple, ...]]:
    """Ordered partitions of ``items`` into ``k`` nonempty blocks."""
    if k == 1:
        if items:
            yield (items,)
        return
    n = len(items)
    for size in range(1, n - k + 2):
        for block in combinations(items, size):
            rest = tuple(x for x in items if x not in block)
            for tail in _ordered_partitions(rest, k - 1):
                yield (block,) + tail


def _sym_trees(labels: frozenset, gens, memo) -> list:
    if len(labels) == 1:
        return [next(iter(labels))]
    if labels in memo:
        return memo[labels]
    items = tuple(sorted(labels))
    out = []
    for g in gens:
        if g.symmetry != "none":
            lo = items[0]
            rest = items[1:]
            for size in range(0, len(rest)):
                for extra in combinations(rest, size):
                    a = frozenset((lo,) + extra)
                    b = labels - a
                    for ta in _sym_trees(a, gens, memo):
                        for tb in _sym_trees(b, gens, memo):
                            out.append((g.name, (ta, tb)))
        else:
            for blocks in _ordered_partitions(items, g.arity):
                subs = [_sym_trees(frozenset(bl), gens, memo) for bl in blocks]
                for kids in _product(subs):
                    out.append((g.name, tuple(kids)))
    memo[labels] = out
    return out


# -- composition -------------------------------------------------------------

def _tag(t: Tree, counter: list) -> Tree:
    if is_leaf(t):
        return t
    tag = counter[0]
    counter[0] += 1
    return ((t[0], tag), tuple(_tag(c, counter) for c in t[1]))


def _strip(t: Tree) -> Tree:
    if is_leaf(t):
        return t
    return (t[0][0], tuple(_strip(c) for c in t[1]))


def _tag_order(t: Tree) -> list:
    if is_leaf(t):
        return []
    out = [t[0][1]]
    for c in t[1]:
        out.extend(_tag_order(c))
    return out


def koszul_sign(source_degrees: Sequence[int], target_order: Sequence[int]) -> int:
    """Sign of moving odd elements from source order into ``target_order``.

    ``source_degrees[k]`` is the degree of the element tagged ``k``;
    ``target_order`` lists tags in their final order.
    """
    odd = [k for k in target_order if source_degrees[k] % 2]
    inv = 0
    for i in range(len(odd)):
        for j in range(i + 1, len(odd)):
            if odd[i] > odd[j]:
                inv += 1
    return -1 if inv % 2 else 1


def _untag(path_tag_tree: Tree, sig: Signature) -> tuple[Tree, int]:
    """Strip tags from a tagged tree and return it with its Koszul sign."""
    order = _tag_order(path_tag_tree)
    degrees = {}

    def collect(t):
        if is_leaf(t):
            return
        degrees[t[0][1]] = sig.degree_of(t[0][0])
        for c in t[1]:
            collect(c)

    collect(path_tag_tree)
    deg_list = [degrees[k] for k in range(len(order))]
    return _strip(path_tag_tree), koszul_sign(deg_list, order)


def compose(outer: Tree, slot: int, inner: Tree, sig: Signature) -> tuple[Tree, int]:
    """Partial composition ``outer o_slot inner``.

    Leaves of ``outer`` below ``slot`` stay, those above shift by
    ``arity(inner) - 1``, and leaf ``j`` of ``inner`` becomes
    ``slot + j - 1``.  Returns the canonical result and its sign.
    """
    n = arity(outer)
    m = arity(inner)
    if not 1 <= slot <= n:
        raise SlotOutOfRange(f"slot {slot} outside 1..{n}")
    counter = [0]
    t_outer = _tag(outer, counter)
    t_inner = _tag(inner, counter)
    t_inner = _relabel(t_inner, lambda j: slot + j - 1)
    shifted = _relabel(t_outer, lambda i: i if i < slot else (i + m - 1 if i > slot else -1))
    grafted = substitute_leaves(shifted, {-1: t_inner})
    tree, ksign = _untag(grafted, sig)
    tree, csign = canonicalize(tree, sig)
    return tree, ksign * csign


def substitute_vertex(host: Tree, label: str, replacement: Tree, sig: Signature) -> tuple[Tree, int]:
    """Replace the unique vertex labelled ``label`` by ``replacement``.

    Leaf ``j`` of ``replacement`` is glued to the ``j``-th child of that
    vertex.  The vertex is read at its preorder position, and the Koszul sign
    of bringing ``replacement``'s vertices into the result's preorder is
    returned along with the canonical tree.
    """
    counter = [0]
    tagged_host = _tag(host, counter)
    tagged_rep = _tag(replacement, counter)
    # the tensor order: host vertices in preorder, with the replaced vertex
    # expanded in place by the replacement's preorder
    seq = []
    target = None

    def walk(t):
        nonlocal target
        if is_leaf(t):
            return t
        lab, tag = t[0]
        if lab == label:
            if target is not None:
                raise ValueError(f"label {label} occurs twice")
            target = tag
            seq.extend(_tag_order(tagged_rep))
            kids = tuple(walk(c) for c in t[1])
            return substitute_leaves(tagged_rep, {j + 1: k for j, k in enumerate(kids)})
        seq.append(tag)
        return (t[0], tuple(walk(c) for c in t[1]))

    new = walk(tagged_host)
    if target is None:
        raise ValueError(f"label {label} not found")
    # renumber tags so that ``seq`` is the source order
    rank_of = {tag: i for i, tag in enumerate(seq)}
    degrees = [0] * len(seq)

    def collect(t):
        if is_leaf(t):
            return
        degrees[rank_of[t[0][1]]] = sig.degree_of(t[0][0])
        for c in t[1]:
            collect(c)

    collect(new)
    order = [rank_of[k] for k in _tag_order(new)]
    ksign = koszul_sign(degrees, order)
    tree, csign = canonicalize(_strip(new), sig)
    return tree, ksign * csign


def act(t: Tree, perm: Sequence[int], sig: Signature) -> tuple[Tree, int]:
    """Relabel leaf ``j`` as ``perm[j-1]`` and canonicalize."""
    return canonicalize(relabel(t, perm), sig)


# -- linear combinations -----------------------------------------------------

class OperadElement:
    """Finite rational combination of canonical monomials of one arity."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[Tree, Fraction] | None = None):
        self.arity = arity
        clean = {}
        for t, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[t] = clean.get(t, Fraction(0)) + c
                if not clean[t]:
                    del clean[t]
        self.terms = clean

    @classmethod
    def from_pairs(cls, arity: int, pairs: Iterable[tuple[Tree, Fraction]]) -> "OperadElement":
        terms: dict = {}
        for t, c in pairs:
            terms[t] = terms.get(t, Fraction(0)) + Fraction(c)
        return cls(arity, terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, OperadElement) and self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __add__(self, other: "OperadElement") -> "OperadElement":
        terms = dict(self.terms)
        for t, c in other.terms.items():
            terms[t] = terms.get(t, Fraction(0)) + c
        return OperadElement(self.arity, terms)

    def __neg__(self):
        return OperadElement(self.arity, {t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "OperadElement":
        return OperadElement(self.arity, {t: c * k for t, c in self.terms.items()})

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: sort_key(kv[0]))

    def coordinates(self, basis_index: Mapping[Tree, int], size: int) -> list[Fraction]:
        v = [Fraction(0)] * size
        for t, c in self.terms.items():
            v[basis_index[t]] += c
        return v

    def __str__(self):
        return format_combination(self.items())

    def __repr__(self):
        return f"OperadElement({self.arity}, {self})"


def format_combination(pairs: Iterable[tuple[Tree | str, Fraction]]) -> str:
    parts = []
    for t, c in pairs:
        label = t if isinstance(t, str) else encode(t)
        c = Fraction(c)
        mag = abs(c)
        coef = "" if mag == 1 else (f"{mag.numerator}" if mag.denominator == 1
                                    else f"{mag.numerator}/{mag.denominator}") + "*"
        sign = "-" if c < 0 else "+"
        parts.append((sign, coef + label))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for s, p in parts[1:]:
        out += f" {s} {p}"
    return out


_COEFF_STAR = re.compile(r"^(\d+(?:/\d+)?)\s*\*\s*(.+)$")
_COEFF_SPACE = re.compile(r"^(\d+(?:/\d+)?)\s+([A-Za-z_].*)$")


def split_combination(text: str) -> list[tuple[Fraction, str]]:
    """Split ``"2*x(1,2) - 1/2 y(1,2)"`` into (coefficient, monomial text)."""
    text = text.strip()
    if not text:
        raise ParseError("empty combination")
    depth = 0
    start = 0
    pieces = []
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and text[start:i].strip():
            pieces.append(text[start:i])
            start = i
    pieces.append(text[start:])
    out = []
    for piece in pieces:
        piece = piece.strip()
        sign = 1
        while piece and piece[0] in "+-":
            if piece[0] == "-":
                sign = -sign
            piece = piece[1:].strip()
        coef = Fraction(1)
        m = _COEFF_STAR.match(piece) or _COEFF_SPACE.match(piece)
        if m:
            coef = Fraction(m.group(1))
            piece = m.group(2).strip()
        if not piece:
            raise ParseError(f"missing monomial in {text!r}")
        out.append((sign * coef, piece))
    return out


def parse_element(text: str, sig: Signature, arities: Mapping[str, int] | None = None,
                  canonical: bool = True) -> OperadElement:
    """Parse a signed sum of monomials; monomials are canonicalized."""
    pairs = []
    n = None
    ar = arities if arities is not None else {g.name: g.arity for g in sig.generators}
    for coef, mono in split_combination(text):
        t = parse_tree(mono)
        check_arities(t, ar)
        ls = leaves(t)
        if sorted(ls) != list(range(1, len(ls) + 1)):
            raise ParseError(f"leaves of {mono} must be 1..{len(ls)}")
        if not sig.symmetric and ls != sorted(ls):
            raise ParseError(f"nonsigma monomial {mono} must list leaves in order")
        if n is None:
            n = len(ls)
        elif n != len(ls):
            raise ParseError(f"mixed arities in {text!r}")
        s = 1
        if canonical:
            t, s = canonicalize(t, sig)
        pairs.append((t, coef * s))
    return OperadElement.from_pairs(n, pairs)
