"""The 2-colored cylinder operad of a reduced cooperad.

Vertices come in four kinds: suspended vertices of either pure color,
unsuspended mixed vertices (inputs "a", output "b") decorated by cooperad
generators, and the trivial mixed vertex decorated by the counit.  The
differential acts on generators by

* the single-color cobar differential on pure-color generators,
* zero on the trivial vertex,
* internal differential + a 2-vertex-tree part + a pitchfork part on
  mixed generators, with counit factors of the comultiplication retained
  (they produce trivial vertices).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cobar import (
    COBAR,
    CYL,
    CobarContext,
    Element,
    add_term,
    el_add,
    el_scale,
    extend_derivation,
    from_tree,
    gen_corolla,
    homogeneous,
    zero,
)
from .cooperads import COUNIT, CooperadSpec, delta_tree
from .linalg import ONE, frac
from .trees import (
    ALPHA,
    BETA,
    Decor,
    Leaf,
    Node,
    TRIVIAL,
    Tree,
    Unit,
    canonical,
    enumerate_pitchforks,
    enumerate_tree2,
    input_color,
    preorder_vertices,
    tree_key,
)


def recolor(t: Tree, color: str) -> Tree:
    """Paint a single-colored tree entirely in one color."""
    if isinstance(t, Unit):
        return Unit(color)

    def rec(x):
        if isinstance(x, Leaf):
            return x
        return Node(x.decor, color, tuple(rec(c) for c in x.children))

    return rec(t)


def uncolor(t: Tree) -> Tree:
    if isinstance(t, Unit):
        return Unit(None)

    def rec(x):
        if isinstance(x, Leaf):
            return x
        return Node(x.decor, None, tuple(rec(c) for c in x.children))

    return rec(t)


def check_cyl_tree(t: Tree) -> bool:
    """Local color rules: children's output colors match the parent's input color."""
    if isinstance(t, Unit):
        return True
    if not isinstance(t, Node) or t.color not in (ALPHA, BETA):
        return False

    def rec(x: Node) -> bool:
        if x.decor.trivial and (len(x.children) != 1 or x.decor.suspended):
            return False
        ic = input_color(x)
        for c in x.children:
            if isinstance(c, Node):
                if c.color != ic or not rec(c):
                    return False
        return True

    return rec(t)


class CylContext:
    """Cyl(C): generators, differentials, inclusions, homotopy, projection."""

    def __init__(self, spec: CooperadSpec):
        self.spec = spec
        self.cobar = CobarContext(spec)
        self._diff_cache: dict = {}
        self._diff0_cache: dict = {}
        self._beta_basis_cache: dict = {}

    # -- generators -----------------------------------------------------

    def alpha_gen(self, n: int, label: str) -> Element:
        return from_tree(CYL, gen_corolla(self.spec, n, label, color=ALPHA))

    def beta_gen(self, n: int, label: str) -> Element:
        return from_tree(CYL, gen_corolla(self.spec, n, label, color=BETA))

    def mixed_gen(self, n: int, label: str) -> Element:
        return from_tree(CYL, gen_corolla(self.spec, n, label, color=BETA, suspended=False))

    def trivial_corolla(self) -> Element:
        return from_tree(CYL, Node(TRIVIAL, BETA, (Leaf(1),)))

    # -- differential on generators --------------------------------------

    def _mixed_diff_value(self, label: str, n: int, weight0_only: bool) -> Element:
        spec = self.spec
        out = zero(CYL, n)
        # internal differential: + (d_C x)^{ab}, the mixed vertex is unsuspended
        for lab2, c in spec.apply_diff(n, {label: ONE}).items():
            add_term(out, gen_corolla(spec, n, lab2, color=BETA, suspended=False), c)

        # 2-vertex part: root mixed (or trivial), upper suspended alpha
        shapes = [] if weight0_only else list(enumerate_tree2(n))
        for shape in shapes:
            a, b = shape.root_arity, shape.upper_arity
            shp = tuple(
                blk if isinstance(blk, int) else tuple(blk) for blk in shape.child_blocks()
            )
            for c, (x1, x2) in _pairs(delta_tree(spec, {label: ONE}, shp)):
                if x2 == COUNIT:
                    continue
                d1 = 0 if x1 == COUNIT else spec.degree_of(a, x1)
                if x1 == COUNIT:
                    continue  # root arity >= 2 here, no counit possible
                root_dec = Decor(x1, False, d1)
                upper_dec = Decor(x2, True, spec.degree_of(b, x2) + 1)
                children = []
                for blk in shape.child_blocks():
                    if isinstance(blk, int):
                        children.append(Leaf(blk))
                    else:
                        children.append(Node(upper_dec, ALPHA, tuple(Leaf(l) for l in blk)))
                tree = Node(root_dec, BETA, tuple(children))
                tree, s = canonical(tree)
                sgn = -1 if d1 % 2 else 1
                add_term(out, tree, c * sgn * s)
        # the counit-root class: 1^{ab} o_1 s x^a (present in both weights)
        inner = Node(
            Decor(label, True, spec.degree_of(n, label) + 1),
            ALPHA,
            tuple(Leaf(i) for i in range(1, n + 1)),
        )
        add_term(out, Node(TRIVIAL, BETA, (inner,)), ONE)

        # pitchfork part: - sum over root s x0^b with mixed tops
        ks = [n] if weight0_only else list(range(2, n + 1))
        for k in ks:
            for pf in enumerate_pitchforks(n, k):
                shp = tuple(tuple(b) for b in pf.blocks)
                for c, facs in delta_tree(spec, {label: ONE}, shp):
                    x0, tops = facs[0], facs[1:]
                    if x0 == COUNIT:
                        continue
                    if weight0_only and any(x != COUNIT for x in tops):
                        continue
                    root_dec = Decor(x0, True, spec.degree_of(k, x0) + 1)
                    children = []
                    for blk, xi in zip(pf.blocks, tops):
                        if xi == COUNIT:
                            if len(blk) != 1:
                                continue
                            dec = TRIVIAL
                        else:
                            dec = Decor(xi, False, spec.degree_of(len(blk), xi))
                        children.append(Node(dec, BETA, tuple(Leaf(l) for l in blk)))
                    if len(children) != k:
                        continue
                    tree = Node(root_dec, BETA, tuple(children))
                    tree, s = canonical(tree)
                    add_term(out, tree, -c * s)
        return out

    def diff_value(self, decor: Decor, n: int, weight0_only: bool = False) -> Element | None:
        if decor.trivial:
            return None
        cache = self._diff0_cache if weight0_only else self._diff_cache
        key = (decor.label, decor.suspended, n)
        if key in cache:
            return cache[key]
        spec = self.spec
        if decor.suspended:
            # pure-color generator: the cobar differential in that color
            if weight0_only:
                val = zero(COBAR, n)
                for lab2, c in spec.apply_diff(n, {decor.label: ONE}).items():
                    add_term(val, gen_corolla(spec, n, lab2), -c)
            else:
                val = self.cobar.diff_value(decor.label, n)
            cache[key] = val  # stored colorless; recolored at lookup
        else:
            cache[key] = self._mixed_diff_value(decor.label, n, weight0_only)
        return cache[key]

    def _lookup(self, decor: Decor, ar: int, weight0: bool, color: str | None):
        val = self.diff_value(decor, ar, weight0)
        if val is None:
            return None
        if decor.suspended:
            # recolor the stored colorless cobar value
            out = zero(CYL, ar)
            for t, c in val.terms.items():
                add_term(out, recolor(t, color), c)
            return out
        return val

    def diff(self, e: Element) -> Element:
        if e.flavor != CYL:
            raise ValueError("cyl_diff needs a 2-colored element")
        return extend_derivation(
            e, lambda d, ar, col: self._lookup(d, ar, False, col), 1
        )

    def diff0(self, e: Element) -> Element:
        if e.flavor != CYL:
            raise ValueError("cyl_diff0 needs a 2-colored element")
        return extend_derivation(
            e, lambda d, ar, col: self._lookup(d, ar, True, col), 1
        )

    def delta_only(self, e: Element) -> Element:
        """Just the internal cooperad differential, extended as a derivation."""

        def value(d: Decor, ar: int, col):
            if d.trivial:
                return None
            out = zero(CYL, ar)
            for lab2, c in self.spec.apply_diff(ar, {d.label: ONE}).items():
                if d.suspended:
                    add_term(out, gen_corolla(self.spec, ar, lab2, color=col), -c)
                else:
                    add_term(
                        out, gen_corolla(self.spec, ar, lab2, color=BETA, suspended=False), c
                    )
            return out

        return extend_derivation(e, value, 1)

    # -- inclusions, homotopy, projection --------------------------------

    def iota_alpha(self, e: Element) -> Element:
        """X -> 1^{ab} o_1 X^a."""
        out = zero(CYL, e.arity)
        for t, c in e.terms.items():
            ta = recolor(t, ALPHA)
            if isinstance(ta, Unit):
                add_term(out, Node(TRIVIAL, BETA, (Leaf(1),)), c)
            else:
                add_term(out, Node(TRIVIAL, BETA, (ta,)), c)
        return out

    def iota_beta(self, e: Element) -> Element:
        """X -> mu(X^b; 1^{ab}, ..., 1^{ab})."""
        out = zero(CYL, e.arity)
        for t, c in e.terms.items():
            if isinstance(t, Unit):
                add_term(out, Node(TRIVIAL, BETA, (Leaf(1),)), c)
                continue

            def rec(x):
                if isinstance(x, Leaf):
                    return Node(TRIVIAL, BETA, (x,))
                return Node(x.decor, BETA, tuple(rec(ch) for ch in x.children))

            add_term(out, rec(t), c)
        return out

    def homotopy_h(self, e: Element) -> Element:
        """Signed sum of the one-vertex-unsuspended recolorings of each tree."""
        if e.flavor != COBAR:
            raise ValueError("h is defined on single-colored elements")
        out = zero(CYL, e.arity)
        for t, c in e.terms.items():
            if isinstance(t, Unit):
                continue
            for i, decor, prefix, ar, _col in preorder_vertices(t):
                sgn = -1 if prefix % 2 else 1
                add_term(out, _unsuspend_at(t, i), c * sgn)
        return out

    def projection_pi(self, e: Element) -> Element:
        """Zero on nontrivial mixed vertices; else recolor and delete trivial ones."""
        if e.flavor != CYL:
            raise ValueError("projection needs a 2-colored element")
        out = zero(COBAR, e.arity)
        for t, c in e.terms.items():
            t2 = _strip_trivial(t)
            if t2 is None:
                continue
            add_term(out, t2, c)
        return out

    # -- basis enumeration ------------------------------------------------

    def alpha_basis(self, n: int) -> list[Tree]:
        return [recolor(t, ALPHA) for t in self.cobar.basis(n)]

    def beta_pure_basis(self, n: int) -> list[Tree]:
        return [recolor(t, BETA) for t in self.cobar.basis(n)]

    def beta_basis(self, n: int) -> list[Tree]:
        """Canonical basis of the mixed component with all-alpha inputs, beta output."""
        if n == 0:
            return []
        out = self._beta_trees(tuple(range(1, n + 1)))
        return sorted(out, key=tree_key)

    def _beta_trees(self, labels: tuple) -> list[Node]:
        key = labels
        if key in self._beta_basis_cache:
            return self._beta_basis_cache[key]
        spec = self.spec
        n = len(labels)
        out: list[Node] = []

        def alpha_children_options(block):
            if len(block) == 1:
                return [Leaf(block[0])]
            return [recolor(t, ALPHA) for t in self.cobar._trees_over(block)]

        # trivial root over a single alpha subtree (or bare leaf)
        for child in alpha_children_options(labels):
            out.append(Node(TRIVIAL, BETA, (child,)))

        from .cobar import _sorted_partitions, _product

        for part in _sorted_partitions(labels):
            m = len(part)
            if m < 2 or m > spec.arity_cap or not spec.labels(m):
                continue
            # mixed nontrivial root: children are alpha subtrees / leaves
            opts = [alpha_children_options(b) for b in part]
            if all(opts):
                for lab in spec.labels(m):
                    dec = Decor(lab, False, spec.degree_of(m, lab))
                    for combo in _product(opts):
                        out.append(Node(dec, BETA, tuple(combo)))
            # suspended beta root: children are beta-output subtrees
            bopts = [self._beta_trees(b) for b in part]
            if all(bopts):
                for lab in spec.labels(m):
                    dec = Decor(lab, True, spec.degree_of(m, lab) + 1)
                    for combo in _product(bopts):
                        out.append(Node(dec, BETA, tuple(combo)))
        self._beta_basis_cache[key] = out
        return out

    def d_squared_check(self, n: int, weight0: bool = False):
        """d^2 on every generator and every basis element of the beta component."""
        failures = []
        d = self.diff0 if weight0 else self.diff
        gens: list[Element] = []
        for lab in self.spec.labels(n):
            if lab == COUNIT:
                continue
            gens.extend([self.alpha_gen(n, lab), self.beta_gen(n, lab), self.mixed_gen(n, lab)])
        for t in self.beta_basis(n):
            gens.append(from_tree(CYL, t))
        for g in gens:
            v = d(d(g))
            if not v.is_zero():
                failures.append((g, v))
        return failures


def _pairs(delta_terms):
    for c, facs in delta_terms:
        if len(facs) != 2:
            raise ValueError("expected 2-factor comultiplication")
        yield c, (facs[0], facs[1])


def _unsuspend_at(t: Node, target: int) -> Node:
    """Recolor so vertex ``target`` (pre-order) is mixed: earlier vertices
    beta, later ones alpha, trivial vertices inserted where beta inputs
    meet alpha outputs or leaves."""
    counter = [0]

    def rec(x):
        if isinstance(x, Leaf):
            return x
        idx = counter[0]
        counter[0] += 1
        if idx < target:
            dec = x.decor
            color = BETA
        elif idx == target:
            dec = Decor(x.decor.label, False, x.decor.degree - 1)
            color = BETA
        else:
            dec = x.decor
            color = ALPHA
        return Node(dec, color, tuple(rec(c) for c in x.children))

    recolored = rec(t)

    def insert_trivials(x):
        if isinstance(x, Leaf):
            return x
        ic = input_color(x)
        kids = []
        for c in x.children:
            c2 = insert_trivials(c)
            if ic == BETA:
                needs = isinstance(c2, Leaf) or (isinstance(c2, Node) and c2.color == ALPHA)
                if needs:
                    c2 = Node(TRIVIAL, BETA, (c2,))
            kids.append(c2)
        return Node(x.decor, x.color, tuple(kids))

    return insert_trivials(recolored)


def _strip_trivial(t: Tree):
    """Recolor to the single-colored flavor, deleting trivial vertices.

    Returns None when the tree contains a nontrivial mixed vertex.
    """
    if isinstance(t, Unit):
        return Unit(None)

    def rec(x):
        if isinstance(x, Leaf):
            return x
        if x.decor.trivial:
            return rec(x.children[0])
        if not x.decor.suspended:
            return None
        kids = []
        for c in x.children:
            c2 = rec(c)
            if c2 is None:
                return None
            kids.append(c2)
        return Node(x.decor, None, tuple(kids))

    out = rec(t)
    if out is None:
        return None
    if isinstance(out, Leaf):
        return Unit(None)
    return out
