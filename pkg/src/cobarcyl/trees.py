"""Planar rooted trees with decorated vertices, colors and Koszul signs.

A decorated tree is the basic monomial of a free (colored) operad: leaves
carry a bijective labeling by 1..n, internal vertices carry a decoration
atom (a cooperad generator, optionally suspended, or the trivial mixed
vertex), and edges optionally carry one of two colors.

Sign conventions, fixed once here and relied on everywhere else:

* every decoration is an atom whose degree already includes +1 for a
  suspension; Koszul reordering always uses these atom degrees;
* the linear order of decorations is depth-first pre-order on the
  canonical planar form;
* the canonical planar form sorts sibling subtrees by their minimum leaf
  label (a total order, since sibling leaf sets are disjoint), and the
  sign of sorting is the Koszul sign of the block permutation with block
  degree = total decoration degree of the subtree.

Colors: "a" and "b".  A suspended vertex has inputs of its own output
color; an unsuspended vertex (nontrivial mixed or trivial) has inputs "a"
and output "b".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

ALPHA = "a"
BETA = "b"

TRIVIAL_LABEL = "1"


@dataclass(frozen=True)
class Decor:
    """Decoration atom: generator label + suspension flag + atom degree."""

    label: str
    suspended: bool
    degree: int  # includes the +1 of the suspension when suspended

    @property
    def trivial(self) -> bool:
        return self.label == TRIVIAL_LABEL and not self.suspended


TRIVIAL = Decor(TRIVIAL_LABEL, False, 0)


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Node:
    decor: Decor
    color: Optional[str]  # color of this vertex's output edge; None = single-colored
    children: tuple

    def __post_init__(self):
        if len(self.children) == 0:
            raise ValueError("internal vertex with no children")


@dataclass(frozen=True)
class Unit:
    """The operad unit in a given color: a bare leaf labeled 1."""

    color: Optional[str] = None


Tree = Union[Node, Unit]


def input_color(node: Node) -> Optional[str]:
    """Common color of a vertex's incoming edges."""
    if node.color is None:
        return None
    return node.color if node.decor.suspended else ALPHA


def leaves(t: Tree) -> list[int]:
    if isinstance(t, Unit):
        return [1]
    out: list[int] = []

    def walk(x):
        if isinstance(x, Leaf):
            out.append(x.label)
        else:
            for ch in x.children:
                walk(ch)

    walk(t)
    return out


def arity(t: Tree) -> int:
    return len(leaves(t))


def min_leaf(x) -> int:
    if isinstance(x, Leaf):
        return x.label
    return min(leaves(x))


def decorations(t: Tree) -> list[Decor]:
    """Pre-order list of decoration atoms."""
    if isinstance(t, Unit):
        return []
    out: list[Decor] = []

    def walk(x):
        if isinstance(x, Node):
            out.append(x.decor)
            for ch in x.children:
                walk(ch)

    walk(t)
    return out


def degree(t: Tree) -> int:
    return sum(d.degree for d in decorations(t))


def weight(t: Tree) -> int:
    """Number of internal vertices not decorated by scalars."""
    return sum(1 for d in decorations(t) if not d.trivial)


def leaf_colors(t: Tree) -> tuple:
    """Input colors in leaf-label order (the color profile of the element)."""
    if isinstance(t, Unit):
        return (t.color,)
    cols: dict[int, Optional[str]] = {}

    def walk(x: Node):
        ic = input_color(x)
        for ch in x.children:
            if isinstance(ch, Leaf):
                cols[ch.label] = ic
            else:
                walk(ch)

    walk(t)
    return tuple(cols[i] for i in sorted(cols))


def out_color(t: Tree) -> Optional[str]:
    return t.color


def subtree_degree(x) -> int:
    if isinstance(x, Leaf):
        return 0
    return degree(x)


def _block_sort_sign(blocks: list[tuple[int, int]]) -> int:
    """Koszul sign of sorting blocks (key, degree) by key."""
    sign = 1
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if blocks[i][0] > blocks[j][0] and (blocks[i][1] % 2) and (blocks[j][1] % 2):
                sign = -sign
    return sign


def canonical(t: Tree) -> tuple[Tree, int]:
    """Canonical planar form and the Koszul sign of reaching it.

    Idempotent: a canonical tree comes back unchanged with sign +1.
    """
    if isinstance(t, Unit):
        return t, 1

    def rec(x):
        if isinstance(x, Leaf):
            return x, 1
        new_children = []
        sign = 1
        for ch in x.children:
            c2, s = rec(ch)
            sign *= s
            new_children.append(c2)
        keyed = [(min_leaf(c), subtree_degree(c), c) for c in new_children]
        sign *= _block_sort_sign([(k, d) for k, d, _ in keyed])
        keyed.sort(key=lambda kd: kd[0])
        return Node(x.decor, x.color, tuple(c for _, _, c in keyed)), sign

    return rec(t)


def is_canonical(t: Tree) -> bool:
    t2, s = canonical(t)
    return t2 == t and s == 1


def relabel(t: Tree, mapping: dict[int, int]) -> tuple[Tree, int]:
    """Rename leaf labels by ``mapping`` and re-canonicalize (with sign)."""
    if isinstance(t, Unit):
        return t, 1

    def rec(x):
        if isinstance(x, Leaf):
            return Leaf(mapping[x.label])
        return Node(x.decor, x.color, tuple(rec(c) for c in x.children))

    return canonical(rec(t))


def tree_key(t: Tree):
    """Deterministic total order key on trees (for reproducible output)."""
    if isinstance(t, Unit):
        return (0, t.color or "")

    def rec(x):
        if isinstance(x, Leaf):
            return ("L", x.label)
        return (
            "N",
            x.decor.label,
            x.decor.suspended,
            x.decor.degree,
            x.color or "",
            tuple(rec(c) for c in x.children),
        )

    return (1, rec(t))


# ---------------------------------------------------------------------------
# grafting and substitution
# ---------------------------------------------------------------------------


def _shift_labels(t, offset: int):
    if isinstance(t, Leaf):
        return Leaf(t.label + offset)
    return Node(t.decor, t.color, tuple(_shift_labels(c, offset) for c in t.children))


def graft(outer: Tree, position: int, inner: Tree) -> tuple[Tree, int]:
    """Insert ``inner`` at the leaf of ``outer`` labeled ``position``.

    Leaf labels are renormalized by the standard insertion convention.
    The Koszul sign moves inner's decoration block from the far right
    into the pre-order slot of the replaced leaf.  Color compatibility
    is the caller's concern (see cobar.compose).
    """
    n = arity(outer)
    k = arity(inner)
    if not 1 <= position <= n:
        raise IndexError(f"graft position {position} out of range 1..{n}")
    if isinstance(inner, Unit):
        # relabeling is the identity here: labels above position shift by 0
        return outer, 1
    if isinstance(outer, Unit):
        return inner, 1

    inner_shifted = _shift_labels(inner, position - 1)
    inner_deg = degree(inner)

    after_deg = 0  # decoration degree seen after the grafted leaf in pre-order
    seen_leaf = False

    def scan(x):
        nonlocal after_deg, seen_leaf
        if isinstance(x, Leaf):
            if x.label == position:
                seen_leaf = True
            return
        if seen_leaf:
            after_deg += x.decor.degree
        for c in x.children:
            scan(c)

    scan(outer)

    def rebuild(x):
        if isinstance(x, Leaf):
            if x.label == position:
                return inner_shifted
            return Leaf(x.label + (k - 1) if x.label > position else x.label)
        return Node(x.decor, x.color, tuple(rebuild(c) for c in x.children))

    sign = -1 if (inner_deg % 2) and (after_deg % 2) else 1
    grafted = rebuild(outer)
    # grafting preserves canonical sibling order (label shifts are monotone
    # and the inner block inherits the replaced leaf's minimum), so only the
    # block-insertion sign above is needed.
    return grafted, sign


def preorder_vertices(t: Tree) -> list[tuple[int, Decor, int, int, Optional[str]]]:
    """Pre-order vertex table: (index, decor, prefix degree sum, arity, color)."""
    out: list[tuple[int, Decor, int, int, Optional[str]]] = []
    if isinstance(t, Unit):
        return out
    prefix = 0

    def walk(x):
        nonlocal prefix
        if isinstance(x, Leaf):
            return
        out.append((len(out), x.decor, prefix, len(x.children), x.color))
        prefix += x.decor.degree
        for c in x.children:
            walk(c)

    walk(t)
    return out


def substitute(t: Node, vertex_index: int, value: Tree) -> tuple[Tree, int]:
    """Replace the ``vertex_index``-th (pre-order, 0-based) vertex by ``value``.

    ``value`` must have arity equal to the vertex's number of children and
    standard leaf labels 1..m; its leaf p receives the vertex's p-th child
    (in planar order).  The sign is the Koszul sign of re-sorting the new
    decoration sequence into pre-order; the Leibniz prefix sign for the
    operator that produced ``value`` is the caller's concern.
    """
    # index the original vertices by path so reordered grafts keep true tags
    index_of: dict[tuple, int] = {}

    def walk(x, path):
        if isinstance(x, Leaf):
            return
        index_of[path] = len(index_of)
        for i, c in enumerate(x.children):
            walk(c, path + (i,))

    walk(t, ())
    if vertex_index not in index_of.values():
        raise IndexError(f"vertex index {vertex_index} out of range")

    seq: list[tuple[tuple, int]] = []  # (tag, degree) in the NEW tree's pre-order

    def build(x, path):
        if isinstance(x, Leaf):
            return x
        idx = index_of[path]
        if idx != vertex_index:
            seq.append(((idx, 0), x.decor.degree))
            return Node(x.decor, x.color, tuple(build(c, path + (i,)) for i, c in enumerate(x.children)))
        if isinstance(value, Unit):
            if len(x.children) != 1:
                raise ValueError("unit value at a vertex of arity != 1")
            return build(x.children[0], path + (0,))
        if arity(value) != len(x.children):
            raise ValueError("value arity does not match vertex arity")
        subrank = itertools.count(1)

        def emit_value(v):
            if isinstance(v, Leaf):
                return build(x.children[v.label - 1], path + (v.label - 1,))
            seq.append(((vertex_index, next(subrank)), v.decor.degree))
            return Node(v.decor, v.color, tuple(emit_value(c) for c in v.children))

        return emit_value(value)

    new_tree = build(t, ())
    # Koszul sign of sorting the tagged sequence back into source order.
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i][0] > seq[j][0] and (seq[i][1] % 2) and (seq[j][1] % 2):
                sign = -sign
    return new_tree, sign


# ---------------------------------------------------------------------------
# shape enumeration: 2-vertex trees and pitchforks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tree2Shape:
    """Labeled 2-vertex tree class: the upper vertex carries ``upper`` leaves."""

    n: int
    upper: frozenset
    colored: bool = False

    @property
    def root_arity(self) -> int:
        return self.n - len(self.upper) + 1

    @property
    def upper_arity(self) -> int:
        return len(self.upper)

    def root_slot(self) -> int:
        """Planar slot (1-based) of the upper vertex among the root's children."""
        rest = sorted(set(range(1, self.n + 1)) - self.upper)
        key = min(self.upper)
        slot = 1
        for lab in rest:
            if lab < key:
                slot += 1
        return slot

    def child_blocks(self) -> list:
        """Root children in canonical planar order: leaf labels or the upper set."""
        blocks: list = [lab for lab in sorted(set(range(1, self.n + 1)) - self.upper)]
        blocks.insert(self.root_slot() - 1, sorted(self.upper))
        return blocks


def enumerate_tree2(n: int, colored: bool = False) -> list[Tree2Shape]:
    """Isomorphism classes of 2-vertex trees whose vertices both have >= 2 children.

    Classes are indexed by the upper vertex's leaf set S, 2 <= |S| <= n-1.
    Deterministic order: by size then lexicographic.
    """
    if n < 2:
        return []
    out = []
    labels = list(range(1, n + 1))
    for size in range(2, n):
        for comb in itertools.combinations(labels, size):
            out.append(Tree2Shape(n, frozenset(comb), colored))
    return out


@dataclass(frozen=True)
class PitchforkShape:
    """Labeled pitchfork class: root over k height-2 vertices with given leaf blocks."""

    n: int
    blocks: tuple  # tuple of tuples of leaf labels, sorted by min element
    colored: bool = False

    @property
    def k(self) -> int:
        return len(self.blocks)


def enumerate_pitchforks(n: int, k: int, colored: bool = False) -> list[PitchforkShape]:
    """Isomorphism classes of pitchforks: partitions of {1..n} into k blocks.

    Height-2 vertices may have arity 1.  Deterministic order.
    """
    if n < 1 or k < 1 or k > n:
        return []
    shapes = []
    for part in _set_partitions(list(range(1, n + 1)), k):
        blocks = tuple(tuple(sorted(b)) for b in sorted(part, key=min))
        shapes.append(PitchforkShape(n, blocks, colored))
    shapes.sort(key=lambda s: s.blocks)
    return shapes


def _set_partitions(items: list, k: int):
    """All partitions of ``items`` into exactly k nonempty blocks."""
    n = len(items)
    if k == 1:
        yield [list(items)]
        return
    if k == n:
        yield [[x] for x in items]
        return
    if k > n or k < 1:
        return
    head, rest = items[0], items[1:]
    # head in its own block
    for part in _set_partitions(rest, k - 1):
        yield [[head]] + part
    # head joins an existing block
    for part in _set_partitions(rest, k):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
