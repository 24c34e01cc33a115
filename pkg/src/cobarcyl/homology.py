"""Finite cochain complexes from operad components and exact cohomology.

An arity-fixed component of Cobar(C) or of the mixed cylinder component
is finite dimensional; slicing by internal degree gives a bounded complex
of exact matrices.  Ranks, induced maps on cohomology and
quasi-isomorphism verification all reduce to the kernels/ranks of
`linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cobar import COBAR, CYL, CobarContext, Element, from_tree, zero
from .cylinder import CylContext
from .linalg import (
    GradedBasis,
    LinearMapRep,
    SparseMatrix,
    ZERO,
    cohomology_rank,
    kernel_basis,
    rank,
    solve,
)
from .trees import Tree, degree, tree_key


@dataclass
class ComplexSlice:
    """One arity's worth of a complex, sliced by internal degree."""

    provenance: str
    bases: dict[int, list[Tree]]  # degree -> ordered canonical trees
    maps: dict[int, SparseMatrix]  # degree d -> matrix of d: C^d -> C^{d+1}

    def degrees(self) -> list[int]:
        return sorted(self.bases)

    def dim(self, d: int) -> int:
        return len(self.bases.get(d, []))

    def index(self, d: int) -> dict[Tree, int]:
        return {t: i for i, t in enumerate(self.bases.get(d, []))}

    def coords(self, e: Element, d: int) -> list[Fraction]:
        idx = self.index(d)
        vec = [ZERO] * len(idx)
        for t, c in e.terms.items():
            if degree(t) != d:
                raise ValueError("element has a component outside the slice degree")
            vec[idx[t]] = c
        return vec

    def matrix(self, d: int) -> SparseMatrix:
        if d in self.maps:
            return self.maps[d]
        return SparseMatrix(self.dim(d + 1), self.dim(d))


def _slice_basis(trees: list[Tree]) -> dict[int, list[Tree]]:
    out: dict[int, list[Tree]] = {}
    for t in sorted(trees, key=tree_key):
        out.setdefault(degree(t), []).append(t)
    return out


def assemble(ctx: CylContext, n: int, which: str, differential: str) -> ComplexSlice:
    """Build the arity-n complex for {cobar, cyl_beta} x {full, weight0}.

    Asserts d^2 = 0 at assembly.
    """
    if which == "cobar":
        trees = ctx.cobar.basis(n)
        flavor = COBAR
        op = ctx.cobar.diff if differential == "full" else ctx.cobar.diff0
    elif which == "cyl_beta":
        trees = ctx.beta_basis(n)
        flavor = CYL
        op = ctx.diff if differential == "full" else ctx.diff0
    else:
        raise ValueError(f"unknown component {which!r}")
    if differential not in ("full", "weight0"):
        raise ValueError(f"unknown differential flavor {differential!r}")

    bases = _slice_basis(trees)
    maps: dict[int, SparseMatrix] = {}
    for d, basis in bases.items():
        tgt = bases.get(d + 1, [])
        tgt_idx = {t: i for i, t in enumerate(tgt)}
        m = SparseMatrix(len(tgt), len(basis))
        for c_idx, t in enumerate(basis):
            img = op(from_tree(flavor, t))
            for t2, coeff in img.terms.items():
                if t2 not in tgt_idx:
                    raise AssertionError(
                        f"differential leaves the enumerated basis at arity {n}: {t2}"
                    )
                m[tgt_idx[t2], c_idx] = coeff
        maps[d] = m
    sl = ComplexSlice(f"{which}/{differential}/arity{n}", bases, maps)
    for d in sl.degrees():
        comp = sl.matrix(d + 1).matmul(sl.matrix(d))
        if not comp.is_zero():
            raise AssertionError(f"d^2 != 0 at degree {d} in {sl.provenance}")
    return sl


def ranks(sl: ComplexSlice) -> dict[int, int]:
    """Cohomology rank per degree."""
    out = {}
    degs = sl.degrees()
    if not degs:
        return out
    lo, hi = min(degs), max(degs)
    for d in range(lo, hi + 1):
        dim = sl.dim(d)
        if dim == 0:
            continue
        d_out = sl.matrix(d)
        d_in = sl.matrix(d - 1)
        out[d] = (dim - rank(d_out)) - rank(d_in)
    return out


@dataclass
class ChainMap:
    """Degree-0 chain map between two slices, stored as one matrix per degree."""

    source: ComplexSlice
    target: ComplexSlice
    mats: dict[int, SparseMatrix]

    def matrix(self, d: int) -> SparseMatrix:
        if d in self.mats:
            return self.mats[d]
        return SparseMatrix(self.target.dim(d), self.source.dim(d))


def chain_map_from_operator(src: ComplexSlice, tgt: ComplexSlice, op, flavor: str) -> ChainMap:
    """Matrix form of an element-level operator basis-by-basis."""
    mats = {}
    for d in src.degrees():
        tgt_idx = tgt.index(d)
        m = SparseMatrix(tgt.dim(d), src.dim(d))
        for c_idx, t in enumerate(src.bases[d]):
            img = op(from_tree(flavor, t))
            for t2, coeff in img.terms.items():
                m[tgt_idx[t2], c_idx] = coeff
        mats[d] = m
    return ChainMap(src, tgt, mats)


def is_chain_map(f: ChainMap) -> bool:
    degs = sorted(set(f.source.degrees()) | set(f.target.degrees()))
    for d in degs:
        lhs = f.target.matrix(d).matmul(f.matrix(d))
        rhs = f.matrix(d + 1).matmul(f.source.matrix(d))
        if lhs != rhs:
            return False
    return True


def _augment_columns(cols: list[list[Fraction]], nrows: int) -> SparseMatrix:
    m = SparseMatrix(nrows, len(cols))
    for j, col in enumerate(cols):
        for i, v in enumerate(col):
            if v:
                m[i, j] = v
    return m


@dataclass
class QuasiIsoReport:
    per_degree: dict[int, dict] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(row["isomorphism"] for row in self.per_degree.values())


def verify_quasi_iso(f: ChainMap) -> QuasiIsoReport:
    """Check the induced map on cohomology is an isomorphism in every degree."""
    if not is_chain_map(f):
        raise ValueError("not a chain map")
    rep = QuasiIsoReport()
    degs = sorted(set(f.source.degrees()) | set(f.target.degrees()))
    if not degs:
        return rep
    for d in range(min(degs), max(degs) + 1):
        h_src = _cohomology_data(f.source, d)
        h_tgt = _cohomology_data(f.target, d)
        dim_src, dim_tgt = h_src["rank"], h_tgt["rank"]
        # induced map rank: f(ker) together with im(d_tgt) modulo im(d_tgt)
        fk = [f.matrix(d).apply(v) for v in h_src["kernel"]]
        im_cols = h_tgt["image_cols"]
        big = _augment_columns(im_cols + fk, f.target.dim(d))
        induced_rank = rank(big) - h_tgt["image_rank"]
        iso = dim_src == dim_tgt == induced_rank if (dim_src or dim_tgt) else True
        rep.per_degree[d] = {
            "source_rank": dim_src,
            "target_rank": dim_tgt,
            "induced_rank": induced_rank,
            "isomorphism": iso,
        }
    return rep


def induces_zero(f: ChainMap) -> bool:
    """True when f maps every cocycle into a coboundary."""
    if not is_chain_map(f):
        raise ValueError("not a chain map")
    degs = sorted(set(f.source.degrees()) | set(f.target.degrees()))
    if not degs:
        return True
    for d in range(min(degs), max(degs) + 1):
        h_src = _cohomology_data(f.source, d)
        im = _augment_columns(_cohomology_data(f.target, d)["image_cols"], f.target.dim(d))
        for v in h_src["kernel"]:
            if solve(im, f.matrix(d).apply(v)) is None:
                return False
    return True


def _cohomology_data(sl: ComplexSlice, d: int) -> dict:
    d_out = sl.matrix(d)
    d_in = sl.matrix(d - 1)
    ker = kernel_basis(d_out)
    im_cols = []
    for j in range(d_in.ncols):
        col = [d_in[i, j] for i in range(d_in.nrows)]
        if any(col):
            im_cols.append(col)
    return {
        "kernel": ker,
        "image_cols": im_cols,
        "image_rank": rank(d_in),
        "rank": len(ker) - rank(d_in),
    }
