"""Endomorphism operads of finite graded spaces, in one or two colors.

An element of End(n) is a multilinear map out of an n-fold tensor power,
stored sparsely on basis tuples.  The symmetric action permutes tensor
factors with Koszul signs; insertion composes maps with the sign of the
inserted map jumping over the fixed left inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import GradedBasis, ONE, ZERO, frac
from .trees import ALPHA, BETA


@dataclass(frozen=True)
class GradedSpace:
    name: str
    basis: GradedBasis
    differential: tuple = ()  # ((target_label, source_label, coeff), ...), degree +1

    def __post_init__(self):
        for tgt, src, _c in self.differential:
            if self.degree(tgt) != self.degree(src) + 1:
                raise ValueError("space differential is not degree +1")
        # d^2 = 0
        for lab in self.labels():
            once = self.d_of(lab)
            twice: dict[str, Fraction] = {}
            for l2, c2 in once.items():
                for l3, c3 in self.d_of(l2).items():
                    twice[l3] = twice.get(l3, ZERO) + c2 * c3
            if any(v != 0 for v in twice.values()):
                raise ValueError(f"space differential does not square to zero at {lab}")

    def labels(self):
        return self.basis.labels()

    def degree(self, label: str) -> int:
        return self.basis.degree(self.basis.index(label))

    def d_of(self, label: str) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        for tgt, src, c in self.differential:
            if src == label:
                out[tgt] = out.get(tgt, ZERO) + frac(c)
        return out


@dataclass
class EndElement:
    """Multilinear map (x) V_{c_1} ... V_{c_n} -> V_{c_out}."""

    spaces: dict  # color -> GradedSpace (key None for the single-colored case)
    in_colors: tuple
    out_color: object
    degree: int
    entries: dict = field(default_factory=dict)  # (out_label, in_label_tuple) -> Fraction

    @property
    def arity(self) -> int:
        return len(self.in_colors)

    def space(self, color) -> GradedSpace:
        return self.spaces[color]

    def is_zero(self) -> bool:
        return not self.entries

    def check_degree(self):
        for (o, ins), c in self.entries.items():
            d = self.space(self.out_color).degree(o) - sum(
                self.space(col).degree(l) for col, l in zip(self.in_colors, ins)
            )
            if d != self.degree:
                raise ValueError("entry violates degree homogeneity")

    def copy(self) -> "EndElement":
        return EndElement(self.spaces, self.in_colors, self.out_color, self.degree, dict(self.entries))

    def __eq__(self, other):
        return (
            isinstance(other, EndElement)
            and self.in_colors == other.in_colors
            and self.out_color == other.out_color
            and self.entries == other.entries
        )


def end_zero(spaces, in_colors, out_color, degree) -> EndElement:
    return EndElement(spaces, tuple(in_colors), out_color, degree)


def end_add_term(e: EndElement, out_label, ins: tuple, coeff):
    key = (out_label, tuple(ins))
    v = e.entries.get(key, ZERO) + frac(coeff)
    if v == 0:
        e.entries.pop(key, None)
    else:
        e.entries[key] = v


def end_add(a: EndElement, b: EndElement) -> EndElement:
    if a.in_colors != b.in_colors or a.out_color != b.out_color:
        raise ValueError("incompatible end elements")
    if a.degree != b.degree:
        # zero elements carry no degree information worth fighting over
        if a.is_zero():
            return b.copy()
        if b.is_zero():
            return a.copy()
        raise ValueError("incompatible end elements")
    out = a.copy()
    for (o, ins), c in b.entries.items():
        end_add_term(out, o, ins, c)
    return out


def end_scale(a: EndElement, c) -> EndElement:
    c = frac(c)
    out = end_zero(a.spaces, a.in_colors, a.out_color, a.degree)
    if c != 0:
        out.entries = {k: v * c for k, v in a.entries.items()}
    return out


def end_sub(a: EndElement, b: EndElement) -> EndElement:
    return end_add(a, end_scale(b, -1))


def _in_degrees(e: EndElement, ins: tuple) -> list[int]:
    return [e.space(col).degree(l) for col, l in zip(e.in_colors, ins)]


def end_compose(f: EndElement, i: int, g: EndElement) -> EndElement:
    """f o_i g with the Koszul sign of g jumping over the first i-1 inputs."""
    if not 1 <= i <= f.arity:
        raise IndexError(f"slot {i} out of range")
    if f.in_colors[i - 1] != g.out_color:
        raise ValueError("color mismatch in insertion")
    in_colors = f.in_colors[: i - 1] + g.in_colors + f.in_colors[i:]
    out = end_zero(f.spaces, in_colors, f.out_color, f.degree + g.degree)
    if f.is_zero() or g.is_zero():
        return out
    gdeg_odd = g.degree % 2
    by_out: dict = {}
    for (o, ins), c in g.entries.items():
        by_out.setdefault(o, []).append((ins, c))
    for (o, ins), c in f.entries.items():
        mid = ins[i - 1]
        if mid not in by_out:
            continue
        left = ins[: i - 1]
        right = ins[i:]
        sgn = 1
        if gdeg_odd:
            left_deg = sum(f.space(col).degree(l) for col, l in zip(f.in_colors[: i - 1], left))
            if left_deg % 2:
                sgn = -1
        for gins, gc in by_out[mid]:
            end_add_term(out, o, left + gins + right, c * gc * sgn)
    return out


def end_relabel(f: EndElement, labels: list[int]) -> EndElement:
    """Reindex inputs: standard slot q becomes input ``labels[q-1]``.

    The Koszul sign per entry is that of rearranging the tensor factors.
    """
    n = f.arity
    if sorted(labels) != list(range(1, n + 1)):
        raise ValueError("labels must be a permutation of 1..n")
    in_colors = [None] * n
    for q, lab in enumerate(labels, start=1):
        in_colors[lab - 1] = f.in_colors[q - 1]
    out = end_zero(f.spaces, tuple(in_colors), f.out_color, f.degree)
    for (o, ins), c in f.entries.items():
        new_ins = [None] * n
        for q, lab in enumerate(labels, start=1):
            new_ins[lab - 1] = ins[q - 1]
        degs = _in_degrees(f, ins)
        sgn = 1
        for q1 in range(n):
            for q2 in range(q1 + 1, n):
                if labels[q1] > labels[q2] and (degs[q1] % 2) and (degs[q2] % 2):
                    sgn = -sgn
        end_add_term(out, o, tuple(new_ins), c * sgn)
    return out


def end_act_perm(f: EndElement, perm: tuple[int, ...]) -> EndElement:
    """Symmetric action matching tree relabeling: input l becomes perm[l-1]."""
    return end_relabel(f, list(perm))


def end_diff(f: EndElement) -> EndElement:
    """d_target . f - (-1)^{|f|} f . d_tensor."""
    out = end_zero(f.spaces, f.in_colors, f.out_color, f.degree + 1)
    tgt_space = f.space(f.out_color)
    for (o, ins), c in f.entries.items():
        for o2, c2 in tgt_space.d_of(o).items():
            end_add_term(out, o2, ins, c * c2)
    fsgn = -1 if f.degree % 2 else 1
    for (o, ins), c in f.entries.items():
        degs = _in_degrees(f, ins)
        for j, lab in enumerate(ins):
            space_j = f.space(f.in_colors[j])
            # precompose at slot j: sum over w with d(w) having lab as a summand
            for w in space_j.labels():
                coeff = space_j.d_of(w).get(lab)
                if not coeff:
                    continue
                prefix = sum(degs[:j])
                sgn = -1 if prefix % 2 else 1
                new_ins = ins[:j] + (w,) + ins[j + 1:]
                end_add_term(out, o, new_ins, -fsgn * sgn * c * coeff)
    return out


def end_identity(spaces, color) -> EndElement:
    """The identity map of one space as an arity-1 element."""
    e = end_zero(spaces, (color,), color, 0)
    for lab in spaces[color].labels():
        end_add_term(e, lab, (lab,), ONE)
    return e


class EndOps:
    """mu-engine adapter for End targets."""

    @staticmethod
    def compose(a, slot, b):
        return end_compose(a, slot, b)

    @staticmethod
    def finish_labels(e, labels):
        return end_relabel(e, labels)

    @staticmethod
    def is_zero(e):
        return e.is_zero()


def end_basis_elements(spaces, in_colors, out_color, degree):
    """All basis entries of one degree, as (out_label, in_tuple) keys."""
    import itertools

    tgt = spaces[out_color]
    pools = [spaces[c].labels() for c in in_colors]
    out = []
    for ins in itertools.product(*pools):
        in_deg = sum(spaces[c].degree(l) for c, l in zip(in_colors, ins))
        for o in tgt.labels():
            if tgt.degree(o) - in_deg == degree:
                out.append((o, tuple(ins)))
    return out
