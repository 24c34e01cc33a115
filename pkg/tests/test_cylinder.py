import random

from cobarcyl.cobar import (
    COBAR,
    CYL,
    cobar_generator,
    compose,
    el_add,
    el_scale,
    el_sub,
    from_tree,
    homogeneous,
    zero,
)
from cobarcyl.cylinder import CylContext, check_cyl_tree
from cobarcyl.trees import ALPHA, BETA, Leaf, Node, TRIVIAL, Unit, degree, weight


def test_trivial_vertex_is_closed(cocom3):
    assert cocom3.diff(cocom3.trivial_corolla()).is_zero()


def test_mixed_arity2_differential(cocom3):
    """d(nu2^{ab}) = 1^{ab} o_1 s nu2^a - mu(s nu2^b; 1,1), nothing else."""
    m2 = cocom3.mixed_gen(2, "nu2")
    d = cocom3.diff(m2)
    ia = cocom3.iota_alpha(cobar_generator(cocom3.spec, 2, "nu2"))
    ib = cocom3.iota_beta(cobar_generator(cocom3.spec, 2, "nu2"))
    assert d == el_sub(ia, ib)
    assert d == cocom3.diff0(m2)


def test_mixed_arity3_differential_term_count(cocom3):
    """3 two-vertex classes + counit term + 3 partition terms + all-trivial term."""
    d = cocom3.diff(cocom3.mixed_gen(3, "nu3"))
    assert len(d.terms) == 8
    # weight-0 part: exactly the two special terms
    d0 = cocom3.diff0(cocom3.mixed_gen(3, "nu3"))
    assert len(d0.terms) == 2
    assert d0 == homogeneous(d, wt=1)


def test_single_color_generators_use_cobar_diff(cocom3):
    g = cobar_generator(cocom3.spec, 3, "nu3")
    da = cocom3.diff(cocom3.alpha_gen(3, "nu3"))
    expected = zero(CYL, 3)
    from cobarcyl.cylinder import recolor
    from cobarcyl.cobar import add_term

    for t, c in cocom3.cobar.diff(g).terms.items():
        add_term(expected, recolor(t, ALPHA), c)
    assert da == expected


def test_cyl_d_squared_all_builtins(cocom4, coass3, two_level, mixed_degree):
    for ctx, arities in [
        (cocom4, [1, 2, 3, 4]),
        (coass3, [1, 2, 3]),
        (two_level, [1, 2]),
        (mixed_degree, [1, 2, 3]),
    ]:
        for n in arities:
            assert not ctx.d_squared_check(n), (ctx.spec.name, n, "full")
            assert not ctx.d_squared_check(n, weight0=True), (ctx.spec.name, n, "w0")


def test_iota_formulas(cocom3):
    X = cobar_generator(cocom3.spec, 2, "nu2")
    ia = cocom3.iota_alpha(X)
    ((t, c),) = ia.terms.items()
    assert c == 1 and t.decor.trivial and t.children[0].color == ALPHA
    ib = cocom3.iota_beta(X)
    ((t, c),) = ib.terms.items()
    assert c == 1 and t.color == BETA
    assert all(ch.decor.trivial for ch in t.children)


def test_iota_chain_maps_and_unit(cocom4, two_level, mixed_degree):
    for ctx in (cocom4, two_level, mixed_degree):
        cob = ctx.cobar
        for n in range(1, ctx.spec.arity_cap + 1):
            for t in cob.basis(n):
                X = from_tree(COBAR, t)
                assert ctx.diff(ctx.iota_alpha(X)) == ctx.iota_alpha(cob.diff(X))
                assert ctx.diff(ctx.iota_beta(X)) == ctx.iota_beta(cob.diff(X))
                assert ctx.diff0(ctx.iota_alpha(X)) == ctx.iota_alpha(cob.diff0(X))
                assert ctx.diff0(ctx.iota_beta(X)) == ctx.iota_beta(cob.diff0(X))


def test_homotopy_single_vertex(cocom3):
    X = cobar_generator(cocom3.spec, 2, "nu2")
    h = cocom3.homotopy_h(X)
    ((t, c),) = h.terms.items()
    assert c == 1
    assert not t.decor.suspended and t.decor.label == "nu2"


def test_homotopy_identity_everywhere(cocom4, two_level, mixed_degree):
    """iota_a - iota_b = d0 h + h delta on every basis element."""
    for ctx in (cocom4, two_level, mixed_degree):
        cob = ctx.cobar
        for n in range(1, ctx.spec.arity_cap + 1):
            for t in cob.basis(n):
                X = from_tree(COBAR, t)
                lhs = el_sub(ctx.iota_alpha(X), ctx.iota_beta(X))
                rhs = el_add(
                    ctx.diff0(ctx.homotopy_h(X)), ctx.homotopy_h(cob.diff0(X))
                )
                assert lhs == rhs, (ctx.spec.name, n, t)


def test_homotopy_anticommutes_with_internal_differential(two_level, mixed_degree):
    """delta h + h delta = 0 (the internal differential alone)."""
    for ctx in (two_level, mixed_degree):
        cob = ctx.cobar
        for n in range(1, ctx.spec.arity_cap + 1):
            for t in cob.basis(n):
                X = from_tree(COBAR, t)
                lhs = el_add(
                    ctx.delta_only(ctx.homotopy_h(X)), ctx.homotopy_h(cob.diff0(X))
                )
                assert lhs.is_zero(), (ctx.spec.name, n, t)


def test_homotopy_two_vertex_terms(cocom3):
    g2 = cobar_generator(cocom3.spec, 2, "nu2")
    X = compose(g2, 1, g2)
    h = cocom3.homotopy_h(X)
    assert len(h.terms) == 2
    signs = sorted(h.terms.values())
    assert signs == [-1, 1]


def test_projection_inverse_to_inclusions(cocom4, two_level, mixed_degree):
    for ctx in (cocom4, two_level, mixed_degree):
        cob = ctx.cobar
        for n in range(1, ctx.spec.arity_cap + 1):
            for t in cob.basis(n):
                X = from_tree(COBAR, t)
                assert ctx.projection_pi(ctx.iota_alpha(X)) == X
                assert ctx.projection_pi(ctx.iota_beta(X)) == X


def test_projection_kills_nontrivial_mixed(cocom3):
    assert cocom3.projection_pi(cocom3.mixed_gen(2, "nu2")).is_zero()


def test_projection_chain_map(cocom4, two_level, mixed_degree):
    for ctx in (cocom4, two_level, mixed_degree):
        for n in range(1, ctx.spec.arity_cap + 1):
            for bt in ctx.beta_basis(n):
                E = from_tree(CYL, bt)
                assert ctx.projection_pi(ctx.diff(E)) == ctx.cobar.diff(
                    ctx.projection_pi(E)
                ), (ctx.spec.name, n, bt)


def test_beta_basis_legality_and_stacking(cocom4):
    for n in range(1, 5):
        for t in cocom4.beta_basis(n):
            assert check_cyl_tree(t)

            # no trivial vertex has a trivial child anywhere
            def no_stack(x):
                if isinstance(x, Leaf):
                    return True
                if x.decor.trivial:
                    ch = x.children[0]
                    if not isinstance(ch, Leaf) and ch.decor.trivial:
                        return False
                return all(no_stack(c) for c in x.children if not isinstance(c, Leaf))

            assert no_stack(t)


def test_beta_basis_sizes(cocom4):
    assert [len(cocom4.beta_basis(n)) for n in range(1, 5)] == [1, 3, 18, 170]


def test_differential_stays_in_enumerated_basis(cocom3, mixed_degree):
    for ctx in (cocom3, mixed_degree):
        for n in range(1, ctx.spec.arity_cap + 1):
            idx = set(ctx.beta_basis(n))
            for bt in ctx.beta_basis(n):
                for t in ctx.diff(from_tree(CYL, bt)).terms:
                    assert t in idx, (ctx.spec.name, n, t)
