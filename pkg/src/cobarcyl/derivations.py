"""Derivations of the cobar and cylinder operads.

A derivation is stored by its values on generator corollas, one per
color profile ('c' for the single-colored case; 'a', 'b', 'm' for the
two-colored one), and extends by the Leibniz rule.  Trivial mixed
vertices are annihilated: any weight-raising derivation must kill them
since their component is one-dimensional in weight zero.

The module also provides the weight filtration, restriction maps to a
single color, the projection transfer, exact exponentials, the
arity-by-arity constructive lift of single-colored derivations to the
cylinder, and exact Campbell-Hausdorff composition.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .cobar import (
    COBAR,
    CYL,
    CobarContext,
    Element,
    act_perm,
    add_term,
    apply_generator_map,
    el_add,
    el_scale,
    el_sub,
    extend_derivation,
    from_tree,
    gen_corolla,
    homogeneous,
    zero,
)
from .cooperads import COUNIT, CooperadSpec
from .cylinder import CylContext, recolor, uncolor
from .linalg import ONE, ZERO, SparseMatrix, frac, kernel_basis, solve
from .trees import (
    ALPHA,
    BETA,
    Decor,
    Leaf,
    Node,
    TRIVIAL,
    Tree,
    Unit,
    degree as tree_degree,
    tree_key,
    weight as tree_weight,
)

PROFILES_COBAR = ("c",)
PROFILES_CYL = ("a", "b", "m")


def generator_slots(spec: CooperadSpec, flavor: str):
    """All (profile, arity, label) triples a derivation stores values for."""
    profiles = PROFILES_COBAR if flavor == COBAR else PROFILES_CYL
    out = []
    for n in range(2, spec.arity_cap + 1):
        for lab in spec.labels(n):
            if lab == COUNIT:
                continue
            for p in profiles:
                out.append((p, n, lab))
    return out


def gen_element(ctx, flavor: str, profile: str, n: int, label: str) -> Element:
    spec = ctx.spec
    if flavor == COBAR:
        return from_tree(COBAR, gen_corolla(spec, n, label))
    if profile == "a":
        return from_tree(CYL, gen_corolla(spec, n, label, color=ALPHA))
    if profile == "b":
        return from_tree(CYL, gen_corolla(spec, n, label, color=BETA))
    return from_tree(CYL, gen_corolla(spec, n, label, color=BETA, suspended=False))


def gen_atom_degree(spec: CooperadSpec, profile: str, n: int, label: str) -> int:
    d = spec.degree_of(n, label)
    return d if profile == "m" else d + 1


@dataclass
class Derivation:
    ctx: object  # CobarContext or CylContext
    flavor: str
    degree: int
    values: dict = field(default_factory=dict)  # (profile, n, label) -> Element

    def value(self, profile: str, n: int, label: str) -> Element:
        v = self.values.get((profile, n, label))
        if v is not None:
            return v
        return zero(self.flavor, n)

    def set_value(self, profile: str, n: int, label: str, e: Element):
        if e.is_zero():
            self.values.pop((profile, n, label), None)
        else:
            for t in e.terms:
                if tree_degree(t) != gen_atom_degree(self.ctx.spec, profile, n, label) + self.degree:
                    raise ValueError("derivation value breaks degree homogeneity")
            self.values[(profile, n, label)] = e

    def _value_of(self, decor: Decor, ar: int, col):
        if decor.trivial:
            return None
        if self.flavor == COBAR:
            return self.value("c", ar, decor.label)
        if not decor.suspended:
            return self.value("m", ar, decor.label)
        return self.value("a" if col == ALPHA else "b", ar, decor.label)

    def extend(self, e: Element) -> Element:
        """Leibniz extension; annihilates trivial vertices."""
        if e.flavor != self.flavor:
            raise ValueError("flavor mismatch in derivation extension")
        return extend_derivation(e, self._value_of, self.degree)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())

    def weight_floor(self):
        """Smallest weight increment across stored values; None when zero."""
        best = None
        for (p, n, lab), v in self.values.items():
            for t in v.terms:
                inc = tree_weight(t) - 1
                best = inc if best is None else min(best, inc)
        return best

    def in_der_prime(self) -> bool:
        wf = self.weight_floor()
        return wf is None or wf >= 1

    def scale(self, c) -> "Derivation":
        out = Derivation(self.ctx, self.flavor, self.degree)
        for k, v in self.values.items():
            out.values[k] = el_scale(v, c)
        return out

    def plus(self, other: "Derivation") -> "Derivation":
        if self.degree != other.degree or self.flavor != other.flavor:
            raise ValueError("cannot add derivations of different degree or flavor")
        out = Derivation(self.ctx, self.flavor, self.degree, dict(self.values))
        for k, v in other.values.items():
            cur = out.values.get(k)
            s = el_add(cur, v) if cur is not None else v
            if s.is_zero():
                out.values.pop(k, None)
            else:
                out.values[k] = s
        return out

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        keys = set(self.values) | set(other.values)
        return self.flavor == other.flavor and all(
            self.value(*k) == other.value(*k) for k in keys
        )


def der_bracket(d1: Derivation, d2: Derivation) -> Derivation:
    """[D1, D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1, stored on generators."""
    if d1.flavor != d2.flavor:
        raise ValueError("flavor mismatch in bracket")
    sgn = -1 if (d1.degree % 2) and (d2.degree % 2) else 1
    out = Derivation(d1.ctx, d1.flavor, d1.degree + d2.degree)
    for p, n, lab in generator_slots(d1.ctx.spec, d1.flavor):
        a = d1.extend(d2.value(p, n, lab))
        b = d2.extend(d1.value(p, n, lab))
        v = el_sub(a, el_scale(b, sgn))
        if not v.is_zero():
            out.values[(p, n, lab)] = v
    return out


def der_diff(d: Derivation) -> Derivation:
    """[d_operad, D] on generators."""
    ctx = d.ctx
    diff = ctx.diff
    out = Derivation(ctx, d.flavor, d.degree + 1)
    sgn = -1 if d.degree % 2 else 1
    for p, n, lab in generator_slots(ctx.spec, d.flavor):
        g = gen_element(ctx, d.flavor, p, n, lab)
        v = el_sub(diff(d.value(p, n, lab)), el_scale(d.extend(diff(g)), sgn))
        if not v.is_zero():
            out.values[(p, n, lab)] = v
    return out


def is_closed(d: Derivation) -> bool:
    return der_diff(d).is_zero()


# ---------------------------------------------------------------------------
# restriction and transfer
# ---------------------------------------------------------------------------


def res_alpha(d: Derivation) -> Derivation:
    return _res(d, "a")


def res_beta(d: Derivation) -> Derivation:
    return _res(d, "b")


def _res(d: Derivation, profile: str) -> Derivation:
    if d.flavor != CYL:
        raise ValueError("restriction needs a cylinder derivation")
    out = Derivation(d.ctx.cobar, COBAR, d.degree)
    for (p, n, lab), v in d.values.items():
        if p != profile:
            continue
        w = zero(COBAR, n)
        for t, c in v.terms.items():
            add_term(w, uncolor(t), c)
        if not w.is_zero():
            out.values[("c", n, lab)] = w
    return out


def pi_transfer(d: Derivation) -> Derivation:
    """T(s x) = (-1)^{|D|} (Pi . D)(x^{ab}) for a closed cylinder derivation."""
    if d.flavor != CYL:
        raise ValueError("transfer needs a cylinder derivation")
    if not is_closed(d):
        raise ValueError("transfer requires a closed derivation")
    cyl: CylContext = d.ctx
    sgn = -1 if d.degree % 2 else 1
    out = Derivation(cyl.cobar, COBAR, d.degree)
    for p, n, lab in generator_slots(cyl.spec, CYL):
        if p != "m":
            continue
        v = cyl.projection_pi(d.value("m", n, lab))
        v = el_scale(v, sgn)
        if not v.is_zero():
            out.values[("c", n, lab)] = v
    return out


# ---------------------------------------------------------------------------
# morphisms and exponentials
# ---------------------------------------------------------------------------


@dataclass
class OperadMorphism:
    """Endomorphism-style operad map stored by generator values.

    Trivial vertices map to the trivial corolla; units map to units.
    """

    ctx: object
    flavor: str
    values: dict = field(default_factory=dict)

    def value(self, profile: str, n: int, label: str) -> Element:
        v = self.values.get((profile, n, label))
        if v is not None:
            return v
        return gen_element(self.ctx, self.flavor, profile, n, label)

    def _value_of(self, decor: Decor, ar: int, col):
        if decor.trivial:
            return from_tree(CYL, Node(TRIVIAL, BETA, (Leaf(1),)))
        if self.flavor == COBAR:
            return self.value("c", ar, decor.label)
        if not decor.suspended:
            return self.value("m", ar, decor.label)
        return self.value("a" if col == ALPHA else "b", ar, decor.label)

    def apply(self, e: Element) -> Element:
        return apply_generator_map(e, self._value_of)

    def is_chain_map(self) -> bool:
        diff = self.ctx.diff
        for p, n, lab in generator_slots(self.ctx.spec, self.flavor):
            g = gen_element(self.ctx, self.flavor, p, n, lab)
            if diff(self.value(p, n, lab)) != self.apply(diff(g)):
                return False
        return True

    def weight0_is_identity(self) -> bool:
        for p, n, lab in generator_slots(self.ctx.spec, self.flavor):
            g = gen_element(self.ctx, self.flavor, p, n, lab)
            if homogeneous(self.value(p, n, lab), wt=1) != g:
                return False
        return True


def compose_morphisms(f: OperadMorphism, g: OperadMorphism) -> OperadMorphism:
    """(f . g): apply g's generator values, then push through f."""
    if f.flavor != g.flavor:
        raise ValueError("flavor mismatch")
    out = OperadMorphism(f.ctx, f.flavor)
    for p, n, lab in generator_slots(f.ctx.spec, f.flavor):
        out.values[(p, n, lab)] = f.apply(g.value(p, n, lab))
    return out


def exp_derivation(d: Derivation) -> OperadMorphism:
    """exp(D) = sum D^m / m! for a degree-0 closed weight-raising derivation.

    The series is exact: each application raises weight, and weight is
    bounded by the arity, so it terminates on every generator.
    """
    if d.degree != 0:
        raise ValueError("exponential needs a degree-0 derivation")
    if not d.in_der_prime():
        raise ValueError("exponential needs a weight-raising derivation")
    out = OperadMorphism(d.ctx, d.flavor)
    for p, n, lab in generator_slots(d.ctx.spec, d.flavor):
        g = gen_element(d.ctx, d.flavor, p, n, lab)
        total = g
        cur = g
        m = 1
        while True:
            cur = d.extend(cur)
            if cur.is_zero():
                break
            total = el_add(total, el_scale(cur, Fraction(1, _factorial(m))))
            m += 1
            if m > 2 * n + 4:
                raise AssertionError("exponential series failed to terminate")
        out.values[(p, n, lab)] = total
    return out


def _factorial(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def morphism_log(f: OperadMorphism) -> Derivation:
    """log of a morphism with identity weight-0 part (inverse of exp)."""
    out = Derivation(f.ctx, f.flavor, 0)
    for p, n, lab in generator_slots(f.ctx.spec, f.flavor):
        g = gen_element(f.ctx, f.flavor, p, n, lab)
        # log via the generator values of (F - id) iterated through apply
        # is subtle; instead evaluate log(F) = sum (-1)^{m+1}/m (F - id)^m
        # as operators on the generator corolla.
        accum = zero(f.flavor, n)
        powers = _f_minus_id_powers(f, g, 2 * n + 4)
        for m, val in enumerate(powers, start=1):
            accum = el_add(accum, el_scale(val, Fraction((-1) ** (m + 1), m)))
        if not accum.is_zero():
            out.values[(p, n, lab)] = accum
    return out


def _f_minus_id_powers(f: OperadMorphism, g: Element, cap: int):
    """[(F-1)(g), (F-1)^2(g), ...] until zero."""
    out = []
    cur = g
    for _ in range(cap):
        cur = el_sub(f.apply(cur), cur)
        if cur.is_zero():
            break
        out.append(cur)
    else:
        raise AssertionError("log series failed to terminate")
    return out


# ---------------------------------------------------------------------------
# linearized derivation spaces (for sampling and for the lift)
# ---------------------------------------------------------------------------


def _value_trees(ctx, flavor: str, profile: str, n: int, label: str, degree: int, wfloor: int):
    """Canonical trees allowed as the value on one generator slot."""
    spec = ctx.spec
    want_deg = gen_atom_degree(spec, profile, n, label) + degree
    min_wt = 1 + wfloor
    if flavor == COBAR:
        pool = ctx.basis(n) if isinstance(ctx, CobarContext) else ctx.cobar.basis(n)
    elif profile == "a":
        pool = ctx.alpha_basis(n)
    elif profile == "b":
        pool = ctx.beta_pure_basis(n)
    else:
        pool = ctx.beta_basis(n)
    out = []
    for t in pool:
        if isinstance(t, Unit):
            continue
        if tree_degree(t) == want_deg and tree_weight(t) >= min_wt:
            out.append(t)
    return out


@dataclass
class DerivationSpace:
    """Finite-dimensional space of equivariant derivations with fixed
    degree and weight floor, linearized for exact solving."""

    ctx: object
    flavor: str
    degree: int
    wfloor: int
    params: list  # [(profile, n, label, tree)]
    equivariant: list  # basis vectors over params

    def dim(self) -> int:
        return len(self.equivariant)

    def build(self, coords) -> Derivation:
        d = Derivation(self.ctx, self.flavor, self.degree)
        acc: dict = {}
        for vec_coeff, vec in zip(coords, self.equivariant):
            if vec_coeff == 0:
                continue
            for j, v in enumerate(vec):
                if v == 0:
                    continue
                p, n, lab, t = self.params[j]
                key = (p, n, lab)
                e = acc.setdefault(key, zero(self.flavor, n))
                add_term(e, t, vec_coeff * v)
        for key, e in acc.items():
            if not e.is_zero():
                d.values[key] = e
        return d

    def basis_derivations(self) -> list[Derivation]:
        out = []
        for k in range(self.dim()):
            coords = [ONE if i == k else ZERO for i in range(self.dim())]
            out.append(self.build(coords))
        return out


def derivation_space(ctx, flavor: str, degree: int, wfloor: int = 1) -> DerivationSpace:
    """Equivariant derivation tables of one degree with weight floor."""
    spec = ctx.spec
    params = []
    for p, n, lab in generator_slots(spec, flavor):
        for t in _value_trees(ctx, flavor, p, n, lab, degree, wfloor):
            params.append((p, n, lab, t))
    rows: dict = {}

    def row_key(p, n, i, lab, t):
        return (p, n, i, lab, tree_key(t))

    slot_groups: dict = {}
    for j, (p, n, lab, t) in enumerate(params):
        slot_groups.setdefault((p, n), {}).setdefault(lab, []).append((j, t))

    for (p, n), by_label in slot_groups.items():
        for i in range(1, n):
            perm = tuple(
                (i + 1 if x == i else (i if x == i + 1 else x)) for x in range(1, n + 1)
            )
            for lab in spec.labels(n):
                if lab == COUNIT:
                    continue
                # constraint: sum_y c_y D(y) - act(D(lab), tau_i) = 0
                image = spec.act_transposition(n, {lab: ONE}, i)
                for y, cy in image.items():
                    for (j, t) in by_label.get(y, []):
                        rows.setdefault(row_key(p, n, i, lab, t), {})[j] = (
                            rows.get(row_key(p, n, i, lab, t), {}).get(j, ZERO) + cy
                        )
                for (j, t) in by_label.get(lab, []):
                    moved = act_perm(from_tree(flavor, t), perm)
                    for t2, c2 in moved.terms.items():
                        rk = row_key(p, n, i, lab, t2)
                        rows.setdefault(rk, {})[j] = rows.get(rk, {}).get(j, ZERO) - c2

    mat = SparseMatrix(len(rows), len(params))
    for r, (rk, cols) in enumerate(sorted(rows.items(), key=lambda kv: repr(kv[0]))):
        for j, v in cols.items():
            if v != 0:
                mat[r, j] = v
    eq = kernel_basis(mat) if params else []
    return DerivationSpace(ctx, flavor, degree, wfloor, params, eq)


def closed_subspace(space: DerivationSpace) -> list[list[Fraction]]:
    """Coordinates (over the equivariant basis) of the closed derivations."""
    basis = space.basis_derivations()
    rows: dict = {}
    for k, d in enumerate(basis):
        dd = der_diff(d)
        for (p, n, lab), v in dd.values.items():
            for t, c in v.terms.items():
                rows.setdefault((p, n, lab, tree_key(t)), {})[k] = c
    mat = SparseMatrix(len(rows), len(basis))
    for r, (rk, cols) in enumerate(sorted(rows.items(), key=lambda kv: repr(kv[0]))):
        for k, v in cols.items():
            mat[r, k] = v
    return kernel_basis(mat)


def random_closed_derivation(space: DerivationSpace, rng: random.Random) -> Derivation:
    """Random exact rational combination of closed equivariant derivations."""
    closed = closed_subspace(space)
    if not closed:
        return Derivation(space.ctx, space.flavor, space.degree)
    coords = [ZERO] * space.dim()
    for vec in closed:
        c = Fraction(rng.randint(-3, 3), rng.choice([1, 1, 2]))
        for i, v in enumerate(vec):
            coords[i] += c * v
    return space.build(coords)


# ---------------------------------------------------------------------------
# the constructive lift
# ---------------------------------------------------------------------------


class LiftError(RuntimeError):
    """Raised when the arity-by-arity lift system is unsolvable.

    This would falsify the restriction quasi-isomorphism theorem at desk
    scale, so it is surfaced loudly rather than patched over.
    """


def lift_derivation(d: Derivation, cyl: CylContext):
    """Extend a degree-0 closed weight-raising derivation to the cylinder.

    Returns (D_tilde, T_alpha, T_beta) with
        der_diff(D_tilde) = 0,
        res_alpha(D_tilde) = D + [d, T_alpha],
        res_beta(D_tilde)  = D + [d, T_beta],
    all verified exactly before returning.
    """
    if d.flavor != COBAR:
        raise ValueError("lift starts from a single-colored derivation")
    if d.degree != 0:
        raise ValueError("lift needs a degree-0 derivation")
    if not d.in_der_prime():
        raise ValueError("lift needs a weight-raising derivation")
    if not is_closed(d):
        raise ValueError("lift needs a closed derivation")

    spec = cyl.spec
    cob = cyl.cobar
    d_tilde = Derivation(cyl, CYL, 0)
    t_alpha = Derivation(cob, COBAR, -1)
    t_beta = Derivation(cob, COBAR, -1)

    for n in range(2, spec.arity_cap + 1):
        labels = [lab for lab in spec.labels(n) if lab != COUNIT]
        if not labels:
            continue
        # unknowns at this arity: T_alpha(n), T_beta(n) and mixed values
        t_space = _slot_space(cob, COBAR, -1, n, labels)
        m_space = _slot_space(cyl, CYL, 0, n, labels, profile="m")
        nt, nm = len(t_space.equivariant), len(m_space.equivariant)
        total = 2 * nt + nm

        def assemble(coords):
            ta = t_space.build(coords[:nt])
            tb = t_space.build(coords[nt: 2 * nt])
            dm = m_space.build(coords[2 * nt:])
            return ta, tb, dm

        def residual(coords):
            ta, tb, dm = assemble(coords)
            cand = _candidate(d, d_tilde, t_alpha.plus(ta), t_beta.plus(tb), dm, cyl, n)
            rows = []
            for lab in labels:
                g = gen_element(cyl, CYL, "m", n, lab)
                r = el_sub(cyl.diff(cand.value("m", n, lab)), cand.extend(cyl.diff(g)))
                rows.append(((n, lab), r))
            return rows

        base = residual([ZERO] * total)
        row_index: dict = {}
        for key, r in base:
            for t in r.terms:
                row_index.setdefault((key, tree_key(t)), len(row_index))
        cols = []
        for k in range(total):
            coords = [ONE if i == k else ZERO for i in range(total)]
            rows_k = residual(coords)
            col: dict = {}
            for (key, r), (_, r0) in zip(rows_k, base):
                dr = el_sub(r, r0)
                for t, c in dr.terms.items():
                    rk = (key, tree_key(t))
                    if rk not in row_index:
                        row_index[rk] = len(row_index)
                    col[row_index[rk]] = c
            cols.append(col)
        mat = SparseMatrix(len(row_index), total)
        for j, col in enumerate(cols):
            for i, c in col.items():
                mat[i, j] = c
        rhs = [ZERO] * len(row_index)
        for key, r in base:
            for t, c in r.terms.items():
                rhs[row_index[(key, tree_key(t))]] = -c
        sol = solve(mat, rhs)
        if sol is None:
            raise LiftError(
                f"lift system unsolvable at arity {n} for {spec.name}: "
                "this contradicts the restriction quasi-isomorphism theorem"
            )
        ta, tb, dm = assemble(sol)
        t_alpha = t_alpha.plus(ta)
        t_beta = t_beta.plus(tb)
        _merge_candidate(d, d_tilde, t_alpha, t_beta, dm, cyl, n)

    # exact self-verification
    if not is_closed(d_tilde):
        raise LiftError("lifted derivation is not closed")
    for t_corr, res in ((t_alpha, res_alpha), (t_beta, res_beta)):
        corr = der_diff(t_corr)
        want = d.plus(corr)
        if res(d_tilde) != want:
            raise LiftError("cohomologous-witness identity failed")
    if not d_tilde.in_der_prime():
        raise LiftError("lifted derivation left the weight filtration")
    return d_tilde, t_alpha, t_beta


def _slot_space(ctx, flavor, degree, n, labels, profile=None):
    """Equivariant value space restricted to the slots of one arity."""
    spec = ctx.spec
    profiles = [profile] if profile else ["c"]
    params = []
    for lab in labels:
        for p in profiles:
            for t in _value_trees(ctx, flavor, p, n, lab, degree, 1):
                params.append((p, n, lab, t))
    space = DerivationSpace(ctx, flavor, degree, 1, params, [])
    rows: dict = {}
    by_label: dict = {}
    for j, (p, n_, lab, t) in enumerate(params):
        by_label.setdefault((p, lab), []).append((j, t))
    for i in range(1, n):
        perm = tuple((i + 1 if x == i else (i if x == i + 1 else x)) for x in range(1, n + 1))
        for (p, lab) in list(by_label):
            image = spec.act_transposition(n, {lab: ONE}, i)
            for y, cy in image.items():
                for (j, t) in by_label.get((p, y), []):
                    rk = (p, i, lab, tree_key(t))
                    rows.setdefault(rk, {})[j] = rows.get(rk, {}).get(j, ZERO) + cy
            for (j, t) in by_label.get((p, lab), []):
                moved = act_perm(from_tree(flavor, t), perm)
                for t2, c2 in moved.terms.items():
                    rk = (p, i, lab, tree_key(t2))
                    rows.setdefault(rk, {})[j] = rows.get(rk, {}).get(j, ZERO) - c2
    mat = SparseMatrix(len(rows), len(params))
    for r, (rk, colsd) in enumerate(sorted(rows.items(), key=lambda kv: repr(kv[0]))):
        for j, v in colsd.items():
            if v != 0:
                mat[r, j] = v
    space.equivariant = kernel_basis(mat) if params else []
    return space


def _candidate(d, d_tilde, t_alpha, t_beta, dm, cyl, n):
    """Assemble the partial cylinder derivation up to arity n."""
    cob = cyl.cobar
    cand = Derivation(cyl, CYL, 0, dict(d_tilde.values))
    for (p, nn, lab), v in dm.values.items():
        cand.values[(p, nn, lab)] = v
    for nn in range(2, n + 1):
        for lab in cyl.spec.labels(nn):
            if lab == COUNIT:
                continue
            for prof, t_corr in (("a", t_alpha), ("b", t_beta)):
                g = from_tree(COBAR, gen_corolla(cyl.spec, nn, lab))
                val = el_add(
                    d.value("c", nn, lab),
                    el_add(cob.diff(t_corr.value("c", nn, lab)), t_corr.extend(cob.diff(g))),
                )
                colored = zero(CYL, nn)
                for t, c in val.terms.items():
                    add_term(colored, recolor(t, ALPHA if prof == "a" else BETA), c)
                if not colored.is_zero():
                    cand.values[(prof, nn, lab)] = colored
                else:
                    cand.values.pop((prof, nn, lab), None)
    return cand


def _merge_candidate(d, d_tilde, t_alpha, t_beta, dm, cyl, n):
    cand = _candidate(d, d_tilde, t_alpha, t_beta, dm, cyl, n)
    d_tilde.values.clear()
    d_tilde.values.update(cand.values)


# ---------------------------------------------------------------------------
# Campbell-Hausdorff composition
# ---------------------------------------------------------------------------


def _log_expx_expy(depth: int) -> dict[tuple[int, ...], Fraction]:
    """Word coefficients of log(exp(x) exp(y)) up to word length ``depth``.

    Computed from scratch in the truncated free associative algebra on
    two symbols (0 = x, 1 = y); no table of coefficients is hardcoded.
    """
    # E = exp(x) exp(y) - 1 as word -> coeff
    E: dict[tuple[int, ...], Fraction] = {}
    for i in range(depth + 1):
        for j in range(depth + 1 - i):
            if i + j == 0:
                continue
            w = (0,) * i + (1,) * j
            E[w] = Fraction(1, _factorial(i) * _factorial(j))
    out: dict[tuple[int, ...], Fraction] = {}
    power: dict[tuple[int, ...], Fraction] = {(): ONE}
    for k in range(1, depth + 1):
        nxt: dict[tuple[int, ...], Fraction] = {}
        for w1, c1 in power.items():
            for w2, c2 in E.items():
                w = w1 + w2
                if len(w) > depth:
                    continue
                nxt[w] = nxt.get(w, ZERO) + c1 * c2
        power = nxt
        coeff = Fraction((-1) ** (k + 1), k)
        for w, c in power.items():
            out[w] = out.get(w, ZERO) + coeff * c
    return {w: c for w, c in out.items() if c != 0}


def ch_compose(d1: Derivation, d2: Derivation) -> Derivation:
    """Campbell-Hausdorff composition: exp(result) = exp(d1) . exp(d2).

    The series is evaluated with iterated brackets via the Dynkin
    bracketing of the associative logarithm; it truncates exactly because
    every bracket raises weight and weight is capped by the arity.
    """
    if d1.flavor != d2.flavor:
        raise ValueError("flavor mismatch")
    if d1.degree != 0 or d2.degree != 0:
        raise ValueError("CH composition needs degree-0 derivations")
    cap = d1.ctx.spec.arity_cap
    depth = max(1, cap - 1)
    coeffs = _log_expx_expy(depth)
    gens = (d1, d2)
    total = Derivation(d1.ctx, d1.flavor, 0)
    bracket_cache: dict[tuple[int, ...], Derivation] = {}

    def right_nested(word: tuple[int, ...]) -> Derivation:
        if word in bracket_cache:
            return bracket_cache[word]
        if len(word) == 1:
            out = gens[word[0]]
        else:
            out = der_bracket(gens[word[0]], right_nested(word[1:]))
        bracket_cache[word] = out
        return out

    for word in sorted(coeffs, key=lambda w: (len(w), w)):
        c = coeffs[word] / len(word)
        total = total.plus(right_nested(word).scale(c))
    return total
