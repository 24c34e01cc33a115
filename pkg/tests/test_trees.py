import itertools
import random

from cobarcyl.trees import (
    ALPHA,
    BETA,
    Decor,
    Leaf,
    Node,
    TRIVIAL,
    Unit,
    canonical,
    degree,
    enumerate_pitchforks,
    enumerate_tree2,
    graft,
    is_canonical,
    leaves,
    relabel,
    substitute,
    weight,
)


def corolla(label, n, deg=1, suspended=True, color=None, offset=0):
    return Node(
        Decor(label, suspended, deg),
        color,
        tuple(Leaf(i + offset) for i in range(1, n + 1)),
    )


# -- brute-force enumerators (oracles) ---------------------------------------


def brute_tree2_classes(n):
    """Generate every planar 2-vertex tree with arities >= 2, bucket by canonical form."""
    seen = set()
    labels = list(range(1, n + 1))
    for upper_size in range(2, n):
        for upper_set in itertools.combinations(labels, upper_size):
            rest = [l for l in labels if l not in upper_set]
            # all planar arrangements of the upper subtree and remaining leaves
            for upper_perm in itertools.permutations(upper_set):
                upper = Node(Decor("u", True, 1), None, tuple(Leaf(l) for l in upper_perm))
                slots = [upper] + [Leaf(l) for l in rest]
                for arrangement in itertools.permutations(slots):
                    t = Node(Decor("r", True, 1), None, tuple(arrangement))
                    c, _ = canonical(t)
                    seen.add(c)
    return seen


def brute_pitchfork_classes(n, k):
    """All planar pitchforks with k height-2 vertices, bucketed by canonical form."""
    seen = set()
    labels = list(range(1, n + 1))

    def compositions(items, k):
        if k == 1:
            yield [items]
            return
        for split in itertools.combinations(range(1, len(items)), k - 1):
            prev = 0
            blocks = []
            for s in list(split) + [len(items)]:
                blocks.append(items[prev:s])
                prev = s
            yield blocks

    for perm in itertools.permutations(labels):
        for blocks in compositions(list(perm), k):
            if any(not b for b in blocks):
                continue
            tops = tuple(
                Node(Decor("t", False, 0), None, tuple(Leaf(l) for l in b)) for b in blocks
            )
            t = Node(Decor("r", True, 1), None, tops)
            c, _ = canonical(t)
            seen.add(c)
    return seen


def stirling(n, k):
    if k == 0:
        return 1 if n == 0 else 0
    if n == 0:
        return 0
    return k * stirling(n - 1, k) + stirling(n - 1, k - 1)


def test_tree2_count_formula_and_brute_force():
    for n in range(3, 7):
        classes = enumerate_tree2(n)
        assert len(classes) == 2**n - n - 2
        assert len(brute_tree2_classes(n)) == len(classes)


def test_tree2_small_cases():
    assert enumerate_tree2(2) == []
    uppers = {tuple(sorted(s.upper)) for s in enumerate_tree2(3)}
    assert uppers == {(1, 2), (1, 3), (2, 3)}


def test_pitchfork_counts_match_stirling():
    for n in range(1, 7):
        for k in range(1, n + 1):
            classes = enumerate_pitchforks(n, k)
            assert len(classes) == stirling(n, k), (n, k)
            if n <= 5:
                assert len(brute_pitchfork_classes(n, k)) == len(classes)


def test_pitchfork_small_cases():
    assert len(enumerate_pitchforks(3, 2)) == 3
    assert len(enumerate_pitchforks(2, 2)) == 1
    assert len(enumerate_pitchforks(1, 1)) == 1


# -- canonical forms ----------------------------------------------------------


def test_canonical_idempotent():
    t = Node(
        Decor("a", True, 1),
        None,
        (
            Node(Decor("b", True, 1), None, (Leaf(3), Leaf(1))),
            Leaf(2),
        ),
    )
    c1, s1 = canonical(t)
    c2, s2 = canonical(c1)
    assert c2 == c1 and s2 == 1
    assert is_canonical(c1)


def test_canonical_swaps_odd_siblings_with_sign():
    # two sibling subtrees with odd decoration degree sums
    left = Node(Decor("x", True, 1), None, (Leaf(3), Leaf(4)))
    right = Node(Decor("y", True, 1), None, (Leaf(1), Leaf(2)))
    t = Node(Decor("r", True, 0), None, (left, right))
    c, s = canonical(t)
    assert s == -1
    assert [min(leaves(ch)) for ch in c.children] == [1, 3]


def test_canonical_even_block_no_sign():
    left = Node(Decor("x", True, 2), None, (Leaf(3), Leaf(4)))  # even degree
    right = Node(Decor("y", True, 1), None, (Leaf(1), Leaf(2)))
    t = Node(Decor("r", True, 0), None, (left, right))
    _, s = canonical(t)
    assert s == 1


def test_relabel_tracks_signs():
    # swapping two odd one-vertex subtrees through a relabeling
    t = Node(
        Decor("r", True, 0),
        None,
        (
            Node(Decor("x", True, 1), None, (Leaf(1), Leaf(2))),
            Node(Decor("y", True, 1), None, (Leaf(3), Leaf(4))),
        ),
    )
    t2, s = relabel(t, {1: 3, 2: 4, 3: 1, 4: 2})
    assert s == -1
    assert [min(leaves(c)) for c in t2.children] == [1, 3]
    assert t2.children[0].decor.label == "y"


# -- grafting -----------------------------------------------------------------


def test_graft_unit_laws():
    c = corolla("x", 3)
    out, s = graft(Unit(None), 1, c)
    assert out == c and s == 1
    out, s = graft(c, 2, Unit(None))
    assert out == c and s == 1


def test_graft_two_corollas_left_comb():
    a = corolla("a", 2)
    b = corolla("b", 2)
    t, s = graft(a, 1, b)
    t, s2 = canonical(t)
    assert s == 1 and s2 == 1
    assert t == Node(
        Decor("a", True, 1),
        None,
        (Node(Decor("b", True, 1), None, (Leaf(1), Leaf(2))), Leaf(3)),
    )


def test_graft_sign_moves_inner_block():
    # grafting an odd inner element past an odd later decoration
    outer = Node(
        Decor("r", True, 1),
        None,
        (Leaf(1), Node(Decor("z", True, 1), None, (Leaf(2), Leaf(3)))),
    )
    inner = corolla("w", 2)  # odd
    _, s = graft(outer, 1, inner)
    # z's block (odd) comes after leaf 1 in pre-order, so the inner block
    # jumps over it
    assert s == -1


def test_substitute_value_and_sign():
    t = Node(
        Decor("r", True, 1),
        None,
        (Leaf(1), Node(Decor("z", True, 1), None, (Leaf(2), Leaf(3)))),
    )
    # replace the root (index 0) by a 2-vertex value
    value = Node(
        Decor("p", True, 1),
        None,
        (Node(Decor("q", True, 1), None, (Leaf(1),)), Leaf(2)),
    )
    out, s = substitute(t, 0, value)
    assert degree(out) == degree(t) + 1
    assert sorted(leaves(out)) == [1, 2, 3]


def test_graft_reassociation_shapes():
    """(a o_i b) o_j c produces the same canonical shape either way.

    The signed statement lives at the element level (test_cobar)."""
    atoms = [corolla("a", 2), corolla("b", 2), corolla("c", 2, deg=2)]
    for a, b, c in itertools.permutations(atoms, 3):
        for i in range(1, 3):
            ab, _ = graft(a, i, b)
            ab, _ = canonical(ab)
            for j in range(1, 4):
                lhs_t, _ = graft(ab, j, c)
                lhs_t, _ = canonical(lhs_t)
                if j < i:
                    ac, _ = graft(a, j, c)
                    ac, _ = canonical(ac)
                    rhs_t, _ = graft(ac, i + 1, b)
                elif j >= i + 2:
                    ac, _ = graft(a, j - 1, c)
                    ac, _ = canonical(ac)
                    rhs_t, _ = graft(ac, i, b)
                else:
                    bc, _ = graft(b, j - i + 1, c)
                    bc, _ = canonical(bc)
                    rhs_t, _ = graft(a, i, bc)
                rhs_t, _ = canonical(rhs_t)
                assert lhs_t == rhs_t, (i, j)


def test_weight_counts_nontrivial_vertices():
    t = Node(TRIVIAL, BETA, (corolla("x", 2, color=ALPHA),))
    assert weight(t) == 1
    assert degree(t) == 1
