"""Exact linear algebra over the rationals.

All scalars are `fractions.Fraction` (always in lowest terms, positive
denominator).  No floating point is used anywhere in this package; every
rank, kernel and solution below is exact.  Matrices are sparse dicts
``(row, col) -> Fraction`` with deterministic iteration order, so every
derived object (echelon forms, kernel bases, solutions) is reproducible
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    """Coerce ints / 'p/q' strings to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def koszul_sign(perm: Sequence[int], degrees: Sequence[int]) -> Fraction:
    """Sign accumulated when reordering homogeneous factors by ``perm``.

    ``perm[i]`` is the (1-based) position the factor currently at position
    ``i+1`` is sent to.  A transposition of two odd factors gives -1; even
    factors move freely.  Raises ValueError on malformed input.
    """
    m = len(perm)
    if len(degrees) != m:
        raise ValueError("permutation and degree list have different lengths")
    if sorted(perm) != list(range(1, m + 1)):
        raise ValueError(f"not a permutation of 1..{m}: {perm!r}")
    sign = 1
    for i in range(m):
        for j in range(i + 1, m):
            if perm[i] > perm[j] and (degrees[i] % 2) and (degrees[j] % 2):
                sign = -sign
    return Fraction(sign)


def perm_parity(perm: Sequence[int]) -> int:
    """Ordinary sign of a permutation given as 1-based images."""
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class GradedBasis:
    """Ordered list of (label, degree) pairs; the order fixes column order."""

    entries: tuple

    def __post_init__(self):
        labels = [lab for lab, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels in graded basis")

    @staticmethod
    def make(pairs: Iterable[tuple[Hashable, int]]) -> "GradedBasis":
        return GradedBasis(tuple((lab, int(d)) for lab, d in pairs))

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self):
        return [lab for lab, _ in self.entries]

    def degree(self, idx: int) -> int:
        return self.entries[idx][1]

    def index(self, label) -> int:
        for i, (lab, _) in enumerate(self.entries):
            if lab == label:
                return i
        raise KeyError(label)


class SparseMatrix:
    """Sparse exact matrix; rows/cols are 0-based."""

    def __init__(self, nrows: int, ncols: int, entries: Optional[dict] = None):
        self.nrows = nrows
        self.ncols = ncols
        self.entries: dict[tuple[int, int], Fraction] = {}
        if entries:
            for (r, c), v in entries.items():
                self[r, c] = frac(v)

    def __getitem__(self, rc) -> Fraction:
        return self.entries.get(rc, ZERO)

    def __setitem__(self, rc, v):
        r, c = rc
        if not (0 <= r < self.nrows and 0 <= c < self.ncols):
            raise IndexError(rc)
        v = frac(v)
        if v == 0:
            self.entries.pop(rc, None)
        else:
            self.entries[rc] = v

    def add_to(self, r: int, c: int, v: Fraction):
        self[r, c] = self[r, c] + v

    def copy(self) -> "SparseMatrix":
        m = SparseMatrix(self.nrows, self.ncols)
        m.entries = dict(self.entries)
        return m

    def rows(self) -> list[dict[int, Fraction]]:
        out = [dict() for _ in range(self.nrows)]
        for (r, c), v in sorted(self.entries.items()):
            out[r][c] = v
        return out

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("matrix dimensions do not compose")
        out = SparseMatrix(self.nrows, other.ncols)
        by_row: dict[int, list[tuple[int, Fraction]]] = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                out.add_to(r, c, v * w)
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def apply(self, vec: Sequence[Fraction]) -> list[Fraction]:
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        out = [ZERO] * self.nrows
        for (r, c), v in self.entries.items():
            if vec[c]:
                out[r] += v * vec[c]
        return out

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.entries == other.entries
        )


def _echelon(mat: SparseMatrix, rhs: Optional[list[Fraction]] = None):
    """Row-reduce a dense copy; returns (rows, pivots, rhs').

    Deterministic: pivots are chosen top-down / left-right, no pivoting
    heuristics, so identical inputs yield identical reduced forms.
    """
    rows = [[mat[r, c] for c in range(mat.ncols)] for r in range(mat.nrows)]
    b = list(rhs) if rhs is not None else None
    pivots: list[tuple[int, int]] = []
    pr = 0
    for pc in range(mat.ncols):
        src = None
        for r in range(pr, mat.nrows):
            if rows[r][pc] != 0:
                src = r
                break
        if src is None:
            continue
        rows[pr], rows[src] = rows[src], rows[pr]
        if b is not None:
            b[pr], b[src] = b[src], b[pr]
        inv = ONE / rows[pr][pc]
        rows[pr] = [x * inv for x in rows[pr]]
        if b is not None:
            b[pr] = b[pr] * inv
        for r in range(mat.nrows):
            if r != pr and rows[r][pc] != 0:
                f = rows[r][pc]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[pr])]
                if b is not None:
                    b[r] = b[r] - f * b[pr]
        pivots.append((pr, pc))
        pr += 1
        if pr == mat.nrows:
            break
    return rows, pivots, b


def rank(mat: SparseMatrix) -> int:
    _, pivots, _ = _echelon(mat)
    return len(pivots)


def kernel_basis(mat: SparseMatrix) -> list[list[Fraction]]:
    """Exact basis of the kernel; len == ncols - rank."""
    rows, pivots, _ = _echelon(mat)
    pivot_cols = {pc: pr for pr, pc in pivots}
    free_cols = [c for c in range(mat.ncols) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        vec = [ZERO] * mat.ncols
        vec[fc] = ONE
        for pc, pr in pivot_cols.items():
            vec[pc] = -rows[pr][fc]
        basis.append(vec)
    return basis


def solve(mat: SparseMatrix, rhs: Sequence[Fraction]) -> Optional[list[Fraction]]:
    """Some exact solution of mat.x = rhs, or None if inconsistent."""
    if len(rhs) != mat.nrows:
        raise ValueError("rhs length does not match row count")
    rows, pivots, b = _echelon(mat, [frac(x) for x in rhs])
    npiv = len(pivots)
    for r in range(npiv, mat.nrows):
        if b[r] != 0:
            return None
    sol = [ZERO] * mat.ncols
    for pr, pc in pivots:
        sol[pc] = b[pr]
    return sol


def image_contains(mat: SparseMatrix, rhs: Sequence[Fraction]) -> bool:
    return solve(mat, rhs) is not None


@dataclass(frozen=True)
class LinearMapRep:
    """Degree-homogeneous linear map between graded bases.

    Entry (r, c) may be nonzero only when deg(target_r) = deg(source_c) + shift.
    """

    source: GradedBasis
    target: GradedBasis
    shift: int
    matrix: SparseMatrix = field(compare=False)

    def __post_init__(self):
        if self.matrix.nrows != len(self.target) or self.matrix.ncols != len(self.source):
            raise ValueError("matrix shape does not match bases")
        for (r, c) in self.matrix.entries:
            if self.target.degree(r) != self.source.degree(c) + self.shift:
                raise ValueError(
                    f"entry ({r},{c}) violates degree homogeneity "
                    f"({self.target.degree(r)} != {self.source.degree(c)}+{self.shift})"
                )

    @staticmethod
    def from_entries(source, target, shift, entries) -> "LinearMapRep":
        m = SparseMatrix(len(target), len(source), entries)
        return LinearMapRep(source, target, shift, m)


def map_rank(f: LinearMapRep) -> int:
    return rank(f.matrix)


def map_kernel_basis(f: LinearMapRep) -> list[list[Fraction]]:
    return kernel_basis(f.matrix)


def solve_affine(f: LinearMapRep, rhs: Sequence[Fraction]) -> Optional[list[Fraction]]:
    return solve(f.matrix, rhs)


def cohomology_rank(d_in: LinearMapRep, d_out: LinearMapRep) -> int:
    """dim ker(d_out) - rank(d_in) for a composable pair with d_out.d_in = 0."""
    if d_in.target is not d_out.source and d_in.target != d_out.source:
        raise ValueError("maps are not composable")
    comp = d_out.matrix.matmul(d_in.matrix)
    if not comp.is_zero():
        raise ValueError("d_out . d_in != 0: not a complex")
    ker = len(d_out.source) - rank(d_out.matrix)
    return ker - rank(d_in.matrix)
