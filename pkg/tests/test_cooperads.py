from fractions import Fraction

import pytest

from cobarcyl.cooperads import (
    COUNIT,
    CooperadSpec,
    builtin,
    builtin_binary_trivial,
    builtin_coass,
    builtin_cocom,
    builtin_mixed_degree,
    builtin_two_level,
    delta_tree,
    validate,
)
from cobarcyl.linalg import GradedBasis, ONE


def test_builtins_validate():
    for spec in [
        builtin_cocom(4),
        builtin_coass(3),
        builtin_binary_trivial(),
        builtin_two_level(),
        builtin_mixed_degree(),
    ]:
        rep = validate(spec)
        assert rep.ok, (spec.name, rep.summary())


def test_builtin_dimensions():
    spec = builtin_cocom(3)
    assert spec.dim(2) == 1 and spec.dim(3) == 1
    spec = builtin_coass(3)
    assert spec.dim(2) == 2 and spec.dim(3) == 6


def test_planted_d_squared_failure_is_reported():
    basis = {2: GradedBasis.make([("x", 0), ("y", -1)])}
    # d(y) = x and d(x) = z would need a z; instead plant d(y)=x, d(x)!=0 impossible;
    # plant a degree violation instead: d(y) = y
    diff = {2: {"y": [("y", ONE)]}}
    spec = CooperadSpec(
        "broken", 2, basis, diff, {}, {2: [{"x": [("x", ONE)], "y": [("y", ONE)]}]}
    )
    rep = validate(spec)
    assert not rep.ok
    failures = dict(rep.failures())
    assert any("y" in detail for detail in failures.values())


def test_planted_coderivation_failure_names_witness():
    # cocom(3) with a corrupted coinsertion coefficient
    spec = builtin_cocom(3)
    bad = CooperadSpec(
        "bad",
        3,
        spec.basis,
        {2: {"nu2": []}, 3: {"nu3": [("nu3", ONE)]}},  # degree violation on nu3
        spec.coins,
        spec.transpositions,
    )
    rep = validate(bad)
    assert not rep.ok


def test_delta_tree_corolla_is_identity():
    spec = builtin_cocom(3)
    out = delta_tree(spec, {"nu3": ONE}, (1, 2, 3))
    assert out == [(ONE, ("nu3",))]


def test_delta_tree_cocom_two_vertex():
    spec = builtin_cocom(3)
    out = delta_tree(spec, {"nu3": ONE}, ((1, 2), 3))
    assert out == [(ONE, ("nu2", "nu2"))]
    out = delta_tree(spec, {"nu3": ONE}, ((1, 3), 2))
    assert out == [(ONE, ("nu2", "nu2"))]


def test_delta_tree_coass_shuffle_terms():
    """Brute-force oracle: coAs comultiplication is dual to word substitution."""
    spec = builtin_coass(3)
    shape = ((1, 2), 3)  # root slots: block {1,2} then leaf 3

    def compose_words(u, v, i):
        b = len(v)
        shifted = tuple(x + i - 1 for x in v)
        out = []
        for x in u:
            if x == i:
                out.extend(shifted)
            elif x > i:
                out.append(x + b - 1)
            else:
                out.append(x)
        return tuple(out)

    # oracle: coefficient of u (x) v in Delta_t(w*) is [u o_1 v == w]
    import itertools

    for w in itertools.permutations((1, 2, 3)):
        expected = set()
        for u in itertools.permutations((1, 2)):
            for v in itertools.permutations((1, 2)):
                if compose_words(u, v, 1) == w:
                    lab_u = "w" + "".join(map(str, u))
                    lab_v = "w" + "".join(map(str, v))
                    expected.add((lab_u, lab_v))
        got = {
            facs
            for c, facs in delta_tree(spec, {"w" + "".join(map(str, w)): ONE}, shape)
            if c != 0 and COUNIT not in facs
        }
        assert got == expected, (w, got, expected)


def test_delta_tree_counit_factors():
    spec = builtin_cocom(3)
    # arity-1 vertex forces a counit factor
    out = delta_tree(spec, {"nu3": ONE}, ((1,), 2, 3))
    assert out == [(ONE, ("nu3", COUNIT))]
    out = delta_tree(spec, {"nu3": ONE}, ((1, 2, 3),))
    assert out == [(ONE, (COUNIT, "nu3"))]


def test_delta_tree_respects_cap():
    spec = builtin_cocom(3)
    with pytest.raises(ValueError):
        delta_tree(spec, {"nu3": ONE}, (1, 2, 3, 4))


def test_builtin_addressing():
    assert builtin("cocom:4").arity_cap == 4
    assert builtin("two_level").name == "two_level"
    with pytest.raises(KeyError):
        builtin("nope:3")


def test_two_level_differential():
    spec = builtin_two_level()
    assert spec.apply_diff(2, {"y": ONE}) == {"x": ONE}
    assert spec.apply_diff(2, {"x": ONE}) == {}


def test_action_composition_is_group_action():
    spec = builtin_coass(3)
    x = {"w132": ONE}
    # act(x, sigma . tau) = act(act(x, tau), sigma) with tau = (1 2), sigma = (2 3)
    once = spec.act_transposition(3, x, 1)
    twice = spec.act_transposition(3, once, 2)
    composite = (3, 1, 2)  # (2 3) o (1 2) as a function on {1,2,3}
    assert spec.act(3, x, composite) == twice
