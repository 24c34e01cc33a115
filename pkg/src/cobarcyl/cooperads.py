"""Finite presentations of reduced coaugmented cooperads up to an arity cap.

A spec stores, per arity 2..cap: a graded basis of the coaugmentation
cokernel, the internal differential, the binary coinsertion tables (their
nontrivial components; counit components are forced and synthesized), and
the symmetric-group action through adjacent transpositions.

Tree comultiplications over arbitrarily labeled shapes are derived by
peeling vertices; coassociativity makes the result independent of the
peel order, which `validate` checks exhaustively on small shapes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import ONE, ZERO, GradedBasis, frac
from .trees import TRIVIAL_LABEL

LinComb = dict[str, Fraction]  # label -> coefficient

COUNIT = TRIVIAL_LABEL  # the scalar generator of C(1)


def _add(acc: LinComb, label: str, coeff: Fraction):
    v = acc.get(label, ZERO) + coeff
    if v == 0:
        acc.pop(label, None)
    else:
        acc[label] = v


@dataclass
class CooperadSpec:
    name: str
    arity_cap: int
    basis: dict[int, GradedBasis]
    # arity -> label -> [(label', coeff)]; the degree +1 endomap
    diff: dict[int, dict[str, list[tuple[str, Fraction]]]]
    # (a, b, i) -> label -> [(label_outer, label_inner, coeff)]; a,b >= 2
    coins: dict[tuple[int, int, int], dict[str, list[tuple[str, str, Fraction]]]]
    # arity -> [tau_1 .. tau_{n-1}] as label -> [(label', coeff)]
    transpositions: dict[int, list[dict[str, list[tuple[str, Fraction]]]]]

    def labels(self, n: int) -> list[str]:
        if n == 1:
            return [COUNIT]
        b = self.basis.get(n)
        return list(b.labels()) if b else []

    def degree_of(self, n: int, label: str) -> int:
        if label == COUNIT:
            return 0
        return self.basis[n].degree(self.basis[n].index(label))

    def dim(self, n: int) -> int:
        return len(self.labels(n))

    def delta_i(self, a: int, b: int, i: int, label: str) -> list[tuple[str, str, Fraction]]:
        """Full elementary coinsertion component C(a+b-1) -> C(a) (x) C(b)."""
        n = a + b - 1
        if label == COUNIT:
            if a == b == 1:
                return [(COUNIT, COUNIT, ONE)]
            return []
        if b == 1:
            return [(label, COUNIT, ONE)] if a == n else []
        if a == 1:
            return [(COUNIT, label, ONE)] if (i == 1 and b == n) else []
        table = self.coins.get((a, b, i), {})
        return list(table.get(label, []))

    def apply_diff(self, n: int, x: LinComb) -> LinComb:
        out: LinComb = {}
        table = self.diff.get(n, {})
        for lab, c in x.items():
            for lab2, c2 in table.get(lab, ()):
                _add(out, lab2, c * c2)
        return out

    def act_transposition(self, n: int, x: LinComb, i: int) -> LinComb:
        """Action of the adjacent transposition (i, i+1) on C(n)."""
        if n == 1:
            return dict(x)
        out: LinComb = {}
        table = self.transpositions[n][i - 1]
        for lab, c in x.items():
            for lab2, c2 in table.get(lab, ()):
                _add(out, lab2, c * c2)
        return out

    def act(self, n: int, x: LinComb, perm: tuple[int, ...]) -> LinComb:
        """Left action: act(x, sigma . tau) = act(act(x, tau), sigma)."""
        word = _transposition_word(perm)
        cur = dict(x)
        for i in reversed(word):
            cur = self.act_transposition(n, cur, i)
        return cur


def _transposition_word(perm: tuple[int, ...]) -> list[int]:
    """Write perm as a product of adjacent transpositions t_{i1} . t_{i2} ... (left to right)."""
    p = list(perm)
    n = len(p)
    word = []
    # bubble-sort p back to identity; record moves in application order
    for pass_end in range(n - 1, 0, -1):
        for i in range(1, n):
            if p[i - 1] > p[i]:
                p[i - 1], p[i] = p[i], p[i - 1]
                word.append(i)
    # word applied right-to-left to identity rebuilds perm
    word.reverse()
    return word


# ---------------------------------------------------------------------------
# labeled shapes and tree comultiplication
# ---------------------------------------------------------------------------
#
# A shape is either an int (leaf label) or a tuple of shapes (an internal
# vertex with those children, in planar order).


def shape_leaves(shape) -> list[int]:
    if isinstance(shape, int):
        return [shape]
    out = []
    for c in shape:
        out.extend(shape_leaves(c))
    return out


def shape_vertex_arities(shape) -> list[int]:
    """Pre-order arities of internal vertices."""
    if isinstance(shape, int):
        return []
    out = [len(shape)]
    for c in shape:
        out.extend(shape_vertex_arities(c))
    return out


def standardize_shape(shape):
    """Relabel leaves by planar position; return (std_shape, labels-in-planar-order)."""
    order = shape_leaves(shape)
    counter = itertools.count(1)

    def rec(s):
        if isinstance(s, int):
            return next(counter)
        return tuple(rec(c) for c in s)

    return rec(shape), order


def _peel_last(shape):
    """Remove the last pre-order vertex (children all leaves) of a standard shape.

    Returns (collapsed shape, slot index i, arity b) where slot i is the
    standard label the vertex collapses to.
    """
    target_path = None

    def find(s, path):
        nonlocal target_path
        if isinstance(s, int):
            return
        if all(isinstance(c, int) for c in s):
            target_path = path
        for j, c in enumerate(s):
            find(c, path + (j,))

    find(shape, ())
    assert target_path is not None

    def get(s, path):
        for j in path:
            s = s[j]
        return s

    vert = get(shape, target_path)
    b = len(vert)
    i = vert[0] if b > 0 else None

    def rebuild(s, path):
        if path == target_path:
            return i
        if isinstance(s, int):
            return s if s <= i else s - (b - 1)
        return tuple(rebuild(c, path + (j,)) for j, c in enumerate(s))

    if target_path == ():
        # the whole shape is a corolla; caller handles this base case
        raise AssertionError("cannot peel a corolla")
    return rebuild(shape, ()), i, b


def _delta_std(spec: CooperadSpec, terms: list[tuple[Fraction, tuple[str, ...], str]], shape):
    """Iterated coinsertion on a standard shape.

    ``terms`` carries (coeff, factors-so-far, remaining-top-label); factors
    accumulate from the right (the last pre-order vertex is peeled first).
    """
    if isinstance(shape, int):
        raise ValueError("shape must have at least one vertex")
    if all(isinstance(c, int) for c in shape):
        return [(c, (lab,) + facs) for c, facs, lab in terms]
    collapsed, i, b = _peel_last(shape)
    n = len(shape_leaves(shape))
    a = n - b + 1
    new_terms = []
    for c, facs, lab in terms:
        for outer, inner, c2 in spec.delta_i(a, b, i, lab):
            new_terms.append((c * c2, (inner,) + facs, outer))
    return _delta_std(spec, new_terms, collapsed)


def delta_tree(spec: CooperadSpec, x: LinComb, shape, n: int | None = None):
    """Comultiplication of ``x`` over an arbitrarily labeled tree shape.

    Returns [(coeff, factors)] with factors in pre-order; factors may be
    the counit label on arity-1 vertices.  Coloring (if any) is the
    caller's concern: comultiplication always forgets it.
    """
    leaves_ = shape_leaves(shape)
    nn = len(leaves_)
    if n is not None and n != nn:
        raise ValueError("shape leaf count does not match arity")
    for a in shape_vertex_arities(shape):
        if a > spec.arity_cap and a > 1:
            raise ValueError(f"vertex arity {a} exceeds cap {spec.arity_cap}")
    std, labels = standardize_shape(shape)
    # sigma sends planar position p to the actual label labels[p-1]
    perm = tuple(labels)
    inv = [0] * nn
    for pos, lab in enumerate(perm, start=1):
        inv[lab - 1] = pos
    moved = spec.act(nn, x, tuple(inv))
    out = []
    for lab, c in moved.items():
        if c == 0:
            continue
        out.extend(_delta_std(spec, [(c, (), lab)], std))
    merged: dict[tuple[str, ...], Fraction] = {}
    for c, facs in out:
        v = merged.get(facs, ZERO) + c
        if v == 0:
            merged.pop(facs, None)
        else:
            merged[facs] = v
    return [(c, facs) for facs, c in sorted(merged.items())]


def _delta_peel_root(spec: CooperadSpec, x: LinComb, shape):
    """Alternative route: split off the root first (root must have one internal child).

    Used only to cross-check coassociativity in validate().
    """
    assert not isinstance(shape, int)
    internal = [(j, c) for j, c in enumerate(shape) if not isinstance(c, int)]
    assert len(internal) == 1
    j, sub = internal[0]
    std, labels = standardize_shape(shape)
    nn = len(labels)
    inv = [0] * nn
    for pos, lab in enumerate(labels, start=1):
        inv[lab - 1] = pos
    moved = spec.act(nn, x, tuple(inv))
    std_sub = std[j]
    sub_leaf_std = shape_leaves(std_sub)
    i = sub_leaf_std[0]
    b = len(sub_leaf_std)
    a = nn - b + 1
    out = []
    for lab, c in moved.items():
        for outer, inner, c2 in spec.delta_i(a, b, i, lab):
            sub_std, _ = standardize_shape(std_sub)
            if all(isinstance(cc, int) for cc in sub_std):
                out.append((c * c2, (outer, inner)))
            else:
                for c3, facs in _delta_std(spec, [(ONE, (), inner)], sub_std):
                    out.append((c * c2 * c3, (outer,) + facs))
    merged: dict[tuple[str, ...], Fraction] = {}
    for c, facs in out:
        v = merged.get(facs, ZERO) + c
        if v == 0:
            merged.pop(facs, None)
        else:
            merged[facs] = v
    return [(c, facs) for facs, c in sorted(merged.items())]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class Report:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def record(self, name: str, ok: bool, detail: str = ""):
        self.checks.append((name, ok, detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self) -> list[tuple[str, str]]:
        return [(name, detail) for name, ok, detail in self.checks if not ok]

    def summary(self) -> str:
        lines = []
        for name, ok, detail in self.checks:
            mark = "ok" if ok else "FAIL"
            lines.append(f"[{mark}] {name}" + (f": {detail}" if detail else ""))
        return "\n".join(lines)


def _three_vertex_shapes(n: int):
    """Standard 3-vertex shapes with n leaves, all arities >= 1."""
    out = []
    # chains: root(a) -> middle(b) -> top(c), n = a + b + c - 2
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            c = n - a - b + 2
            if c < 1:
                continue
            for rs in range(1, a + 1):
                for ms in range(1, b + 1):
                    counter = itertools.count(1)
                    root = []
                    for j in range(1, a + 1):
                        if j != rs:
                            root.append(next(counter))
                            continue
                        mid = []
                        for jj in range(1, b + 1):
                            if jj == ms:
                                mid.append(tuple(next(counter) for _ in range(c)))
                            else:
                                mid.append(next(counter))
                        root.append(tuple(mid))
                    out.append(tuple(root))
    # cherries: root(a) with internal children at two slots
    for a in range(2, n + 1):
        for s1 in range(1, a + 1):
            for s2 in range(s1 + 1, a + 1):
                for b in range(1, n + 1):
                    c = n - a - b + 2
                    if c < 1:
                        continue
                    counter = itertools.count(1)
                    root = []
                    for j in range(1, a + 1):
                        if j == s1:
                            root.append(tuple(next(counter) for _ in range(b)))
                        elif j == s2:
                            root.append(tuple(next(counter) for _ in range(c)))
                        else:
                            root.append(next(counter))
                    out.append(tuple(root))
    seen = set()
    uniq = []
    for s in out:
        if s not in seen:
            seen.add(s)
            uniq.append(s)
    return uniq


def validate(spec: CooperadSpec) -> Report:
    """Exhaustive axiom check within the arity cap."""
    rep = Report()
    # reducedness is structural: bases exist only for arity >= 2
    rep.record("reduced", all(n >= 2 for n in spec.basis), "")

    # differential squares to zero and is degree +1
    for n in sorted(spec.basis):
        gb = spec.basis[n]
        ok = True
        witness = ""
        for lab in gb.labels():
            d1 = spec.apply_diff(n, {lab: ONE})
            for lab2, c in d1.items():
                if spec.degree_of(n, lab2) != spec.degree_of(n, lab) + 1:
                    ok = False
                    witness = f"deg violation at {lab}->{lab2} (arity {n})"
            d2 = spec.apply_diff(n, d1)
            if d2:
                ok = False
                witness = f"d^2 != 0 on {lab} (arity {n})"
        rep.record(f"differential arity {n}", ok, witness)

    # stored coinsertions: only arities >= 2, degree 0, within cap
    hyg = True
    witness = ""
    for (a, b, i), table in spec.coins.items():
        if a < 2 or b < 2 or a + b - 1 > spec.arity_cap or not (1 <= i <= a):
            hyg = False
            witness = f"bad coinsertion index {(a, b, i)}"
        for lab, entries in table.items():
            for o, inn, c in entries:
                if spec.degree_of(a, o) + spec.degree_of(b, inn) != spec.degree_of(a + b - 1, lab):
                    hyg = False
                    witness = f"coinsertion {(a, b, i)} not degree 0 at {lab}"
    rep.record("coinsertion tables", hyg, witness)

    # coderivation law: (d (x) 1 + 1 (x) d) Delta_i = Delta_i d  on every generator
    for (a, b, i) in sorted(spec.coins):
        n = a + b - 1
        ok = True
        witness = ""
        for lab in spec.labels(n):
            lhs: dict[tuple[str, str], Fraction] = {}
            for o, inn, c in spec.delta_i(a, b, i, lab):
                for o2, c2 in spec.diff.get(a, {}).get(o, ()):
                    k = (o2, inn)
                    lhs[k] = lhs.get(k, ZERO) + c * c2
                sgn = -1 if spec.degree_of(a, o) % 2 else 1
                for i2, c2 in spec.diff.get(b, {}).get(inn, ()):
                    k = (o, i2)
                    lhs[k] = lhs.get(k, ZERO) + sgn * c * c2
            rhs: dict[tuple[str, str], Fraction] = {}
            for lab2, c in spec.apply_diff(n, {lab: ONE}).items():
                for o, inn, c2 in spec.delta_i(a, b, i, lab2):
                    k = (o, inn)
                    rhs[k] = rhs.get(k, ZERO) + c * c2
            lhs = {k: v for k, v in lhs.items() if v != 0}
            rhs = {k: v for k, v in rhs.items() if v != 0}
            if lhs != rhs:
                ok = False
                witness = f"coderivation fails on {lab} at {(a, b, i)}"
        rep.record(f"coderivation {(a, b, i)}", ok, witness)

    # coassociativity: peel-order independence on 3-vertex shapes within cap
    for n in range(2, spec.arity_cap + 1):
        if not spec.labels(n):
            continue
        ok = True
        witness = ""
        for shape in _three_vertex_shapes(n):
            if any(a > spec.arity_cap and a > 1 for a in shape_vertex_arities(shape)):
                continue
            internal = [c for c in shape if not isinstance(c, int)]
            for lab in spec.labels(n):
                x = {lab: ONE}
                base = delta_tree(spec, x, shape)
                if len(internal) == 1:
                    alt = _delta_peel_root(spec, x, shape)
                    if sorted(base) != sorted(alt):
                        ok = False
                        witness = f"peel-order mismatch on {lab}, shape {shape}"
        rep.record(f"coassociativity arity {n}", ok, witness)

    # symmetric action: adjacent transpositions are involutions of degree 0
    for n in sorted(spec.basis):
        ok = True
        witness = ""
        for i in range(1, n):
            for lab in spec.labels(n):
                once = spec.act_transposition(n, {lab: ONE}, i)
                for lab2, c in once.items():
                    if spec.degree_of(n, lab2) != spec.degree_of(n, lab):
                        ok = False
                        witness = f"action not degree 0 at {lab} (arity {n})"
                twice = spec.act_transposition(n, once, i)
                if twice != {lab: ONE}:
                    ok = False
                    witness = f"transposition {i} not involutive on {lab} (arity {n})"
        rep.record(f"symmetric action arity {n}", ok, witness)

    # equivariance of the differential
    for n in sorted(spec.basis):
        ok = True
        witness = ""
        for i in range(1, n):
            for lab in spec.labels(n):
                lhs = spec.apply_diff(n, spec.act_transposition(n, {lab: ONE}, i))
                rhs = spec.act_transposition(n, spec.apply_diff(n, {lab: ONE}), i)
                if lhs != rhs:
                    ok = False
                    witness = f"differential not equivariant on {lab} (arity {n})"
        rep.record(f"differential equivariance arity {n}", ok, witness)

    return rep


# ---------------------------------------------------------------------------
# builtins
# ---------------------------------------------------------------------------


def _trivial_transpositions(labels: list[str], n: int):
    return [{lab: [(lab, ONE)] for lab in labels} for _ in range(n - 1)]


def builtin_cocom(cap: int) -> CooperadSpec:
    """One-dimensional in every arity, degree 0; comultiplication dual to Com."""
    if cap < 2:
        raise ValueError("cap must be >= 2")
    basis = {n: GradedBasis.make([(f"nu{n}", 0)]) for n in range(2, cap + 1)}
    coins: dict = {}
    for a in range(2, cap + 1):
        for b in range(2, cap + 1):
            n = a + b - 1
            if n > cap:
                continue
            for i in range(1, a + 1):
                coins[(a, b, i)] = {f"nu{n}": [(f"nu{a}", f"nu{b}", ONE)]}
    transp = {n: _trivial_transpositions([f"nu{n}"], n) for n in range(2, cap + 1)}
    return CooperadSpec("cocom", cap, basis, {}, coins, transp)


def _word_label(w: tuple[int, ...]) -> str:
    return "w" + "".join(str(x) for x in w)


def builtin_coass(cap: int) -> CooperadSpec:
    """Dual of the associative operad: basis = input orderings, degree 0."""
    if cap < 2:
        raise ValueError("cap must be >= 2")
    basis = {}
    words: dict[int, list[tuple[int, ...]]] = {}
    for n in range(2, cap + 1):
        words[n] = sorted(itertools.permutations(range(1, n + 1)))
        basis[n] = GradedBasis.make([(_word_label(w), 0) for w in words[n]])
    coins: dict = {}
    for a in range(2, cap + 1):
        for b in range(2, cap + 1):
            n = a + b - 1
            if n > cap:
                continue
            for i in range(1, a + 1):
                table: dict = {}
                for w in words[n]:
                    block = [i + j for j in range(b)]
                    positions = [w.index(x) for x in block]
                    lo, hi = min(positions), max(positions)
                    if hi - lo != b - 1:
                        continue  # block letters not adjacent in w
                    inner = tuple(w[p] - (i - 1) for p in range(lo, hi + 1))
                    shift = lambda x: x if x < i else x - (b - 1)
                    outer = (
                        tuple(shift(x) for x in w[:lo])
                        + (i,)
                        + tuple(shift(x) for x in w[hi + 1:])
                    )
                    table[_word_label(w)] = [(_word_label(outer), _word_label(inner), ONE)]
                coins[(a, b, i)] = table
    transp = {}
    for n in range(2, cap + 1):
        taus = []
        for i in range(1, n):
            sigma = {x: x for x in range(1, n + 1)}
            sigma[i], sigma[i + 1] = i + 1, i
            taus.append(
                {
                    _word_label(w): [(_word_label(tuple(sigma[x] for x in w)), ONE)]
                    for w in words[n]
                }
            )
        transp[n] = taus
    return CooperadSpec("coass", cap, basis, {}, coins, transp)


def builtin_binary_trivial() -> CooperadSpec:
    """A single arity-2 generator and nothing else."""
    basis = {2: GradedBasis.make([("e", 0)])}
    return CooperadSpec("binary_trivial", 2, basis, {}, {}, {2: _trivial_transpositions(["e"], 2)})


def builtin_two_level() -> CooperadSpec:
    """Two arity-2 generators with d(y) = x.

    The differential has degree +1, so the source generator sits one
    degree below its image (degrees are only defined up to a shift).
    """
    basis = {2: GradedBasis.make([("x", 0), ("y", -1)])}
    diff = {2: {"y": [("x", ONE)]}}
    return CooperadSpec(
        "two_level", 2, basis, diff, {}, {2: _trivial_transpositions(["x", "y"], 2)}
    )


def builtin_mixed_degree() -> CooperadSpec:
    """Binary generators in degrees 0 and 1 plus a degree-1 ternary one.

    Delta_i(w) = u (x) v + v (x) u.  The degree spread makes degree-0
    weight-raising derivations of the associated free constructions
    nonzero, which exercises the lift and transport machinery
    nontrivially (over cocom every such derivation vanishes).
    """
    basis = {
        2: GradedBasis.make([("u", 0), ("v", 1)]),
        3: GradedBasis.make([("w", 1)]),
    }
    coins = {
        (2, 2, 1): {"w": [("u", "v", ONE), ("v", "u", ONE)]},
        (2, 2, 2): {"w": [("u", "v", ONE), ("v", "u", ONE)]},
    }
    transp = {
        2: _trivial_transpositions(["u", "v"], 2),
        3: _trivial_transpositions(["w"], 3),
    }
    return CooperadSpec("mixed_degree", 3, basis, {}, coins, transp)


BUILTINS = {
    "cocom": builtin_cocom,
    "coass": builtin_coass,
    "binary_trivial": lambda cap=2: builtin_binary_trivial(),
    "two_level": lambda cap=2: builtin_two_level(),
    "mixed_degree": lambda cap=3: builtin_mixed_degree(),
}


def builtin(name_cap: str) -> CooperadSpec:
    """Resolve "name" or "name:cap" strings to a builtin spec."""
    if ":" in name_cap:
        name, cap_s = name_cap.split(":", 1)
        cap = int(cap_s)
    else:
        name, cap = name_cap, None
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin cooperad {name!r}")
    fn = BUILTINS[name]
    return fn(cap) if cap is not None else fn()
