"""Exact rational linear algebra.

Scalars are :class:`fractions.Fraction`.  Matrices act on row vectors from
the right, so the kernel of a matrix is its *left* null space: a kernel
vector is a combination of row labels whose image vanishes.

Subspaces are stored in reduced row echelon form, which makes equality and
membership plain comparisons.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

Rational = Fraction
Vector = tuple  # tuple of Fraction


class NotASubspace(ValueError):
    """A claimed subspace is not contained in the ambient space."""


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        return Fraction(0)
    return Fraction(text)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class SparseMatrix:
    rows: int
    cols: int
    entries: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.entries.items():
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise IndexError(f"entry ({i}, {j}) outside {self.rows}x{self.cols}")
            v = Fraction(v)
            if v:
                clean[(i, j)] = v
        object.__setattr__(self, "entries", clean)
        if not self.row_labels:
            object.__setattr__(self, "row_labels", tuple(str(i + 1) for i in range(self.rows)))
        if not self.col_labels:
            object.__setattr__(self, "col_labels", tuple(str(j + 1) for j in range(self.cols)))
        if len(self.row_labels) != self.rows or len(self.col_labels) != self.cols:
            raise ValueError("label count does not match matrix shape")

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence], row_labels=(), col_labels=()) -> "SparseMatrix":
        n = len(rows)
        m = len(rows[0]) if n else len(col_labels)
        entries = {(i, j): Fraction(v) for i, r in enumerate(rows) for j, v in enumerate(r) if v}
        return cls(n, m, entries, tuple(row_labels), tuple(col_labels))

    def dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def get(self, i: int, j: int) -> Fraction:
        return self.entries.get((i, j), Fraction(0))

    def row(self, i: int) -> dict[int, Fraction]:
        return {j: v for (r, j), v in self.entries.items() if r == i}

    def column(self, j: int) -> dict[int, Fraction]:
        return {i: v for (i, c), v in self.entries.items() if c == j}

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()},
                            self.col_labels, self.row_labels)

    def apply(self, vec: Sequence) -> list[Fraction]:
        """Row vector times matrix."""
        out = [Fraction(0)] * self.cols
        for (i, j), v in self.entries.items():
            if vec[i]:
                out[j] += vec[i] * v
        return out

    def permuted(self, row_order: Sequence[int], col_order: Sequence[int],
                 row_signs: Sequence[int] | None = None, col_signs: Sequence[int] | None = None,
                 row_labels=None, col_labels=None) -> "SparseMatrix":
        """Reorder (and optionally re-sign) rows and columns.

        New row ``k`` is old row ``row_order[k]`` multiplied by ``row_signs[k]``.
        """
        rinv = {old: new for new, old in enumerate(row_order)}
        cinv = {old: new for new, old in enumerate(col_order)}
        rs = row_signs or [1] * len(row_order)
        cs = col_signs or [1] * len(col_order)
        entries = {}
        for (i, j), v in self.entries.items():
            if i in rinv and j in cinv:
                a, b = rinv[i], cinv[j]
                entries[(a, b)] = v * rs[a] * cs[b]
        return SparseMatrix(len(row_order), len(col_order), entries,
                            tuple(row_labels or (self.row_labels[i] for i in row_order)),
                            tuple(col_labels or (self.col_labels[j] for j in col_order)))

    # -- CSV ---------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + list(self.col_labels))
        dense = self.dense()
        for label, r in zip(self.row_labels, dense):
            w.writerow([label] + [format_rational(v) if v else "" for v in r])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SparseMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty CSV")
        col_labels = tuple(rows[0][1:])
        row_labels, entries = [], {}
        for i, r in enumerate(rows[1:]):
            row_labels.append(r[0])
            for j, cell in enumerate(r[1:]):
                v = parse_rational(cell)
                if v:
                    entries[(i, j)] = v
        return cls(len(row_labels), len(col_labels), entries, tuple(row_labels), col_labels)


# -- elimination -----------------------------------------------------------

def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for r in rows:
        r = [Fraction(v) for v in r]
        d = lcm(*(v.denominator for v in r)) if r else 1
        out.append([int(v * d) for v in r])
    return out


def bareiss_echelon(rows: Sequence[Sequence]) -> tuple[int, list[list[int]]]:
    """Fraction-free Gaussian elimination.

    Returns ``(rank, echelon)`` where ``echelon`` holds integer rows.  Every
    division performed is exact; a nonzero remainder raises ``ArithmeticError``
    (it would mean the fraction-free invariant was broken).
    """
    a = _integer_rows(rows)
    n = len(a)
    m = len(a[0]) if n else 0
    prev = 1
    r = 0
    for c in range(m):
        if r == n:
            break
        piv = next((i for i in range(r, n) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, n):
            f = a[i][c]
            row_i = a[i]
            row_r = a[r]
            for j in range(c, m):
                num = p * row_i[j] - f * row_r[j]
                q, rem = divmod(num, prev)
                if rem:
                    raise ArithmeticError("Bareiss division was not exact")
                row_i[j] = q
            for j in range(c):
                # entries left of the pivot column are already zero
                row_i[j] = 0
        prev = p
        r += 1
    return r, a


def rank(m: SparseMatrix | Sequence[Sequence]) -> int:
    rows = m.dense() if isinstance(m, SparseMatrix) else m
    if not rows:
        return 0
    return bareiss_echelon(rows)[0]


def rref(rows: Iterable[Sequence]) -> list[tuple[Fraction, ...]]:
    """Reduced row echelon form of the span of ``rows``; zero rows dropped."""
    a = [[Fraction(v) for v in r] for r in rows]
    if not a:
        return []
    m = len(a[0])
    out: list[list[Fraction]] = []
    pivots: list[int] = []
    for vec in a:
        for piv, row in zip(pivots, out):
            f = vec[piv]
            if f:
                for j in range(piv, m):
                    if row[j]:
                        vec[j] -= f * row[j]
        lead = next((j for j in range(m) if vec[j]), None)
        if lead is None:
            continue
        inv = 1 / vec[lead]
        vec = [v * inv for v in vec]
        for row in out:
            f = row[lead]
            if f:
                for j in range(lead, m):
                    if vec[j]:
                        row[j] -= f * vec[j]
        out.append(vec)
        pivots.append(lead)
    order = sorted(range(len(out)), key=lambda k: pivots[k])
    return [tuple(out[k]) for k in order]


@dataclass(frozen=True)
class Subspace:
    """A subspace of ``Q^ambient_dim`` held as a reduced echelon basis."""

    ambient_dim: int
    basis: tuple[Vector, ...]

    def __init__(self, ambient_dim: int, spanning: Iterable[Sequence] = ()):
        vecs = [tuple(Fraction(v) for v in s) for s in spanning]
        for v in vecs:
            if len(v) != ambient_dim:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "basis", tuple(rref(vecs)))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, _identity(ambient_dim))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return self.dim

    def pivots(self) -> list[int]:
        return [next(j for j, v in enumerate(b) if v) for b in self.basis]

    def reduce(self, vec: Sequence) -> list[Fraction]:
        """Remainder of ``vec`` after eliminating the pivot coordinates."""
        v = [Fraction(x) for x in vec]
        for piv, b in zip(self.pivots(), self.basis):
            f = v[piv]
            if f:
                for j in range(piv, self.ambient_dim):
                    if b[j]:
                        v[j] -= f * b[j]
        return v

    def contains(self, vec: Sequence) -> bool:
        return not any(self.reduce(vec))

    def __contains__(self, vec) -> bool:
        return self.contains(vec)

    def issubspace(self, other: "Subspace") -> bool:
        return all(other.contains(b) for b in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.ambient_dim, self.basis + other.basis)

    def extended(self, vecs: Iterable[Sequence]) -> "Subspace":
        return Subspace(self.ambient_dim, list(self.basis) + [tuple(v) for v in vecs])

    def coordinates(self, vec: Sequence) -> list[Fraction]:
        """Coefficients of ``vec`` in the echelon basis (``vec`` must lie in the span)."""
        coeffs = [Fraction(vec[p]) for p in self.pivots()]
        if any(self.reduce(vec)):
            raise NotASubspace("vector is not in the subspace")
        return coeffs


def _identity(n: int) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]


def kernel(m: SparseMatrix) -> Subspace:
    """Left kernel ``{x : x . m = 0}`` as an echelon subspace of ``Q^rows``."""
    n, k = m.rows, m.cols
    if n == 0:
        return Subspace.zero(0)
    dense = m.dense()
    # eliminate on [m | I]; rows whose m-part vanishes carry kernel vectors
    aug = [list(dense[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, n) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        p = aug[r][c]
        for i in range(n):
            if i != r and aug[i][c]:
                f = aug[i][c] / p
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        r += 1
    return Subspace(n, [row[k:] for row in aug[r:]])


def quotient_dim(space: Subspace, sub: Subspace) -> int:
    if not sub.issubspace(space):
        raise NotASubspace("sub is not contained in space")
    return space.dim - sub.dim


def quotient_representatives(space: Subspace, sub: Subspace) -> Subspace:
    """Deterministic complement of ``sub`` inside ``space``.

    Walks the echelon basis of ``space`` in order and keeps each vector that
    is independent of ``sub`` plus the vectors already kept.
    """
    if not sub.issubspace(space):
        raise NotASubspace("sub is not contained in space")
    acc = sub
    chosen = []
    for b in space.basis:
        if not acc.contains(b):
            chosen.append(b)
            acc = acc.extended([b])
    return Subspace(space.ambient_dim, chosen)


def normalize(vec: Sequence) -> tuple[Fraction, ...]:
    """Scale so the first nonzero coordinate is 1."""
    v = [Fraction(x) for x in vec]
    lead = next((x for x in v if x), None)
    if lead is None:
        return tuple(v)
    return tuple(x / lead for x in v)
