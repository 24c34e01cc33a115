"""Elements of free (colored) operads and the cobar differential.

An element is a finite rational linear combination of canonical decorated
trees of one arity and flavor ("cobar" = single-colored, "cyl" =
2-colored).  Composition, relabeling, Leibniz extensions of derivations
and multiplicative extensions of collection maps all live here; the
cylinder-specific differential is layered on top in `cylinder`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cooperads import COUNIT, CooperadSpec, delta_tree
from .linalg import ONE, ZERO, frac
from .trees import (
    ALPHA,
    BETA,
    Decor,
    Leaf,
    Node,
    TRIVIAL,
    Tree,
    Unit,
    arity,
    canonical,
    degree,
    enumerate_tree2,
    input_color,
    is_canonical,
    leaf_colors,
    leaves,
    preorder_vertices,
    relabel,
    substitute,
    tree_key,
    weight,
)

COBAR = "cobar"
CYL = "cyl"


@dataclass
class Element:
    flavor: str
    arity: int
    terms: dict = field(default_factory=dict)  # canonical Tree -> Fraction

    def is_zero(self) -> bool:
        return not self.terms

    def copy(self) -> "Element":
        return Element(self.flavor, self.arity, dict(self.terms))

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.flavor == other.flavor
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return f"<0 ({self.flavor},{self.arity})>"
        bits = []
        for t in sorted(self.terms, key=tree_key):
            bits.append(f"{self.terms[t]}*{_tree_str(t)}")
        return " + ".join(bits)

    def degrees(self) -> set[int]:
        return {degree(t) for t in self.terms}

    def weights(self) -> set[int]:
        return {weight(t) for t in self.terms}

    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError(f"element not degree-homogeneous: {sorted(degs)}")
        return next(iter(degs))


def _tree_str(t: Tree) -> str:
    if isinstance(t, Unit):
        return f"1[{t.color or '-'}]"

    def rec(x):
        if isinstance(x, Leaf):
            return str(x.label)
        d = x.decor
        name = ("s" if d.suspended else "") + d.label
        col = x.color or ""
        return f"{name}{col}({','.join(rec(c) for c in x.children)})"

    return rec(t)


def zero(flavor: str, n: int) -> Element:
    return Element(flavor, n, {})


def from_tree(flavor: str, t: Tree, coeff=ONE) -> Element:
    t2, s = canonical(t)
    c = frac(coeff) * s
    if c == 0:
        return Element(flavor, arity(t2), {})
    return Element(flavor, arity(t2), {t2: c})


def add_term(e: Element, t: Tree, coeff: Fraction):
    v = e.terms.get(t, ZERO) + coeff
    if v == 0:
        e.terms.pop(t, None)
    else:
        e.terms[t] = v


def el_add(a: Element, b: Element) -> Element:
    if a.flavor != b.flavor or a.arity != b.arity:
        raise ValueError("cannot add elements of different flavor or arity")
    out = a.copy()
    for t, c in b.terms.items():
        add_term(out, t, c)
    return out


def el_scale(a: Element, c) -> Element:
    c = frac(c)
    if c == 0:
        return zero(a.flavor, a.arity)
    return Element(a.flavor, a.arity, {t: v * c for t, v in a.terms.items()})


def el_sub(a: Element, b: Element) -> Element:
    return el_add(a, el_scale(b, -1))


def el_sum(items, flavor: str, n: int) -> Element:
    out = zero(flavor, n)
    for e in items:
        out = el_add(out, e)
    return out


def homogeneous(e: Element, deg: int | None = None, wt: int | None = None) -> Element:
    out = zero(e.flavor, e.arity)
    for t, c in e.terms.items():
        if deg is not None and degree(t) != deg:
            continue
        if wt is not None and weight(t) != wt:
            continue
        out.terms[t] = c
    return out


def leaf_input_color(t: Tree, label: int):
    """Color of the edge above the leaf with the given label."""
    if isinstance(t, Unit):
        return t.color

    def walk(x):
        ic = input_color(x)
        for ch in x.children:
            if isinstance(ch, Leaf):
                if ch.label == label:
                    return ic, True
            else:
                res, found = walk(ch)
                if found:
                    return res, True
        return None, False

    res, found = walk(t)
    if not found:
        raise IndexError(f"no leaf labeled {label}")
    return res


def compose(a: Element, i: int, b: Element) -> Element:
    """Elementary insertion a o_i b, bilinear with Koszul signs."""
    if a.flavor != b.flavor:
        raise ValueError("flavor mismatch in compose")
    if not 1 <= i <= a.arity:
        raise IndexError(f"slot {i} out of range for arity {a.arity}")
    out = zero(a.flavor, a.arity + b.arity - 1)
    from .trees import graft, out_color

    for ta, ca in a.terms.items():
        slot_color = leaf_input_color(ta, i)
        for tb, cb in b.terms.items():
            if a.flavor == CYL and slot_color != out_color(tb):
                raise ValueError(
                    f"color mismatch at slot {i}: {slot_color} vs {out_color(tb)}"
                )
            grafted, s = graft(ta, i, tb)
            grafted, s2 = canonical(grafted)
            add_term(out, grafted, ca * cb * s * s2)
    return out


def relabel_element(e: Element, mapping: dict[int, int]) -> Element:
    out = zero(e.flavor, e.arity)
    for t, c in e.terms.items():
        t2, s = relabel(t, mapping)
        add_term(out, t2, c * s)
    return out


def act_perm(e: Element, perm: tuple[int, ...]) -> Element:
    """Symmetric action: relabel leaf l to perm[l-1]."""
    mapping = {l: perm[l - 1] for l in range(1, e.arity + 1)}
    return relabel_element(e, mapping)


# ---------------------------------------------------------------------------
# generic mu over a labeled decorated tree
# ---------------------------------------------------------------------------


class ElementOps:
    """Target-protocol adapter: free-operad elements."""

    @staticmethod
    def compose(a, slot, b):
        return compose(a, slot, b)

    @staticmethod
    def finish_labels(e, labels):
        mapping = {q: labels[q - 1] for q in range(1, len(labels) + 1)}
        return relabel_element(e, mapping)

    @staticmethod
    def is_zero(e):
        return e.is_zero()


def mu_decorated_tree(ops, tree: Node, values: list) -> object:
    """Compose ``values`` (one per pre-order vertex) along ``tree``'s shape.

    Vertex v's value must have arity = v's child count; leaf slots stay
    open; the result's inputs are finally relabeled to the tree's leaf
    labels.  Works for any target implementing compose/finish_labels.
    """
    counter = [0]

    def eval_node(x):
        idx = counter[0]
        counter[0] += 1
        elt = values[idx]
        entries = []
        for ch in x.children:
            if isinstance(ch, Leaf):
                entries.append((None, ch.label))
            else:
                entries.append((eval_node(ch), None))
        acc = elt
        for p in range(len(entries), 0, -1):
            sub, _ = entries[p - 1]
            if sub is not None:
                acc = ops.compose(acc, p, sub[0])
        label_list = []
        for sub, lab in entries:
            if sub is None:
                label_list.append(lab)
            else:
                label_list.extend(sub[1])
        return acc, label_list

    if isinstance(tree, Unit):
        raise ValueError("mu over a bare unit")
    acc, labels = eval_node(tree)
    return ops.finish_labels(acc, labels)


def mu_tree(shape_tree: Node, decorations: list[Element]) -> Element:
    """Iterated composition of elements along a labeled tree shape."""
    return mu_decorated_tree(ElementOps, shape_tree, decorations)


# ---------------------------------------------------------------------------
# Leibniz extension of generator tables and morphism application
# ---------------------------------------------------------------------------


def extend_derivation(e: Element, value_of, operator_degree: int) -> Element:
    """Extend a generator-value table to a derivation and apply it.

    ``value_of(decor, vertex_arity, vertex_color)`` returns the Element
    value on that generator corolla or None to annihilate (trivial
    vertices).  The Leibniz sign is (-1)^(|D| * prefix) with atom-degree
    prefixes.
    """
    out = zero(e.flavor, e.arity)
    for tree, c in e.terms.items():
        if isinstance(tree, Unit):
            continue
        for idx, decor, prefix, ar, color in preorder_vertices(tree):
            val = value_of(decor, ar, color)
            if val is None or val.is_zero():
                continue
            sgn = -1 if (operator_degree % 2) and (prefix % 2) else 1
            for vt, vc in val.terms.items():
                new_tree, s = substitute(tree, idx, vt)
                new_tree, s2 = canonical(new_tree)
                add_term(out, new_tree, c * vc * sgn * s * s2)
    return out


def apply_generator_map(e: Element, value_of, out_flavor: str | None = None) -> Element:
    """Multiplicative extension of a degree-0 collection map to trees.

    ``value_of(decor, vertex_arity, vertex_color)`` gives the image of
    each generator corolla (including trivial vertices); units map to
    units.
    """
    flavor = out_flavor or e.flavor
    out = zero(flavor, e.arity)
    for tree, c in e.terms.items():
        if isinstance(tree, Unit):
            add_term(out, tree, c)
            continue
        values = [value_of(d, ar, col) for _, d, _, ar, col in preorder_vertices(tree)]
        if any(v is None or v.is_zero() for v in values):
            continue
        res = mu_decorated_tree(ElementOps, tree, values)
        for t2, c2 in res.terms.items():
            add_term(out, t2, c * c2)
    return out


# ---------------------------------------------------------------------------
# the cobar construction
# ---------------------------------------------------------------------------


def gen_corolla(spec: CooperadSpec, n: int, label: str, color=None, suspended=True) -> Node:
    d = spec.degree_of(n, label)
    decor = Decor(label, suspended, d + 1 if suspended else d)
    return Node(decor, color, tuple(Leaf(i) for i in range(1, n + 1)))


def cobar_generator(spec: CooperadSpec, n: int, label: str) -> Element:
    return from_tree(COBAR, gen_corolla(spec, n, label))


def _tree2_decorated(spec: CooperadSpec, shape, dec_root: Decor, dec_upper: Decor, color_root, color_upper) -> Node:
    """Build the canonical 2-vertex decorated tree for a Tree2Shape."""
    children = []
    for block in shape.child_blocks():
        if isinstance(block, int):
            children.append(Leaf(block))
        else:
            upper = Node(dec_upper, color_upper, tuple(Leaf(l) for l in block))
            children.append(upper)
    return Node(dec_root, color_root, tuple(children))


class CobarContext:
    """Cobar(C) for a cooperad spec: differential and basis enumeration."""

    def __init__(self, spec: CooperadSpec):
        self.spec = spec
        self._diff_cache: dict[tuple[str, int], Element] = {}
        self._basis_cache: dict[tuple, list] = {}

    # -- differential -------------------------------------------------

    def diff_value(self, label: str, n: int) -> Element:
        """d(s x) = -s d_C(x) - sum over 2-vertex classes of (bt; s x1, s x2)."""
        key = (label, n)
        if key in self._diff_cache:
            return self._diff_cache[key]
        spec = self.spec
        out = zero(COBAR, n)
        for lab2, c in spec.apply_diff(n, {label: ONE}).items():
            add_term(out, gen_corolla(spec, n, lab2), -c)
        for shape in enumerate_tree2(n):
            a, b = shape.root_arity, shape.upper_arity
            shp = tuple(
                blk if isinstance(blk, int) else tuple(blk) for blk in shape.child_blocks()
            )
            for c, facs in delta_tree(spec, {label: ONE}, shp):
                x1, x2 = facs
                if x1 == COUNIT or x2 == COUNIT:
                    continue
                d1 = spec.degree_of(a, x1)
                sgn = -1 if d1 % 2 else 1
                tree = _tree2_decorated(
                    spec,
                    shape,
                    Decor(x1, True, d1 + 1),
                    Decor(x2, True, spec.degree_of(b, x2) + 1),
                    None,
                    None,
                )
                tree, s = canonical(tree)
                add_term(out, tree, frac(-1) * sgn * c * s)
        self._diff_cache[key] = out
        return out

    def _diff_lookup(self, decor: Decor, ar: int):
        if decor.trivial or not decor.suspended:
            raise ValueError("cobar differential applied to a non-cobar vertex")
        return self.diff_value(decor.label, ar)

    def diff(self, e: Element) -> Element:
        if e.flavor != COBAR:
            raise ValueError("cobar_diff needs a single-colored element")
        return extend_derivation(e, lambda d, ar, _col: self._diff_lookup(d, ar), 1)

    def diff0_value(self, label: str, n: int) -> Element:
        """The weight-0 part -s d_C(x) of the differential."""
        out = zero(COBAR, n)
        for lab2, c in self.spec.apply_diff(n, {label: ONE}).items():
            add_term(out, gen_corolla(self.spec, n, lab2), -c)
        return out

    def diff0(self, e: Element) -> Element:
        if e.flavor != COBAR:
            raise ValueError("cobar_diff0 needs a single-colored element")
        return extend_derivation(
            e, lambda d, ar, _col: self.diff0_value(d.label, ar), 1
        )

    # -- bases ----------------------------------------------------------

    def basis(self, n: int) -> list[Tree]:
        """Canonical decorated trees spanning Cobar(C)(n); includes the unit at n=1."""
        if n == 0:
            return []
        if n == 1:
            return [Unit(None)]
        return self._trees_over(tuple(range(1, n + 1)))

    def _trees_over(self, labels: tuple) -> list[Node]:
        if labels in self._basis_cache:
            return self._basis_cache[labels]
        n = len(labels)
        out: list[Node] = []
        if n >= 2:
            for part in _sorted_partitions(labels):
                m = len(part)
                if m < 2 or m > self.spec.arity_cap:
                    continue
                if not self.spec.labels(m):
                    continue
                child_options = []
                ok = True
                for block in part:
                    if len(block) == 1:
                        child_options.append([Leaf(block[0])])
                    else:
                        subs = self._trees_over(block)
                        if not subs:
                            ok = False
                            break
                        child_options.append(subs)
                if not ok:
                    continue
                for root_label in self.spec.labels(m):
                    dec = Decor(root_label, True, self.spec.degree_of(m, root_label) + 1)
                    for combo in _product(child_options):
                        out.append(Node(dec, None, tuple(combo)))
        out.sort(key=tree_key)
        self._basis_cache[labels] = out
        return out

    def d_squared_check(self, n: int):
        """Apply the differential twice to every generator of arity n."""
        failures = []
        for lab in self.spec.labels(n):
            if lab == COUNIT:
                continue
            d2 = self.diff(self.diff(cobar_generator(self.spec, n, lab)))
            if not d2.is_zero():
                failures.append((lab, d2))
        return failures


def _product(options):
    if not options:
        yield []
        return
    for head in options[0]:
        for rest in _product(options[1:]):
            yield [head] + rest


def _sorted_partitions(labels: tuple):
    """Set partitions of ``labels`` with blocks sorted by minimum."""
    from .trees import _set_partitions

    n = len(labels)
    for k in range(1, n + 1):
        for part in _set_partitions(list(labels), k):
            yield tuple(tuple(sorted(b)) for b in sorted(part, key=min))
