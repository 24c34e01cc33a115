"""JSON (de)serialization for every exchange format.

Rationals travel as "p/q" strings, trees as nested objects, and all
dictionaries are emitted with sorted keys so identical inputs produce
byte-identical output.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .cobar import COBAR, CYL, Element, add_term, zero
from .cooperads import COUNIT, CooperadSpec
from .derivations import Derivation
from .endo import EndElement, GradedSpace, end_zero
from .linalg import GradedBasis, frac
from .trees import Decor, Leaf, Node, TRIVIAL, Tree, Unit
from .transport import AlgebraStructure, InfinityMorphism, _slot_colors


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


# -- cooperads ---------------------------------------------------------------


def cooperad_to_json(spec: CooperadSpec) -> dict:
    components = []
    for n in sorted(spec.basis):
        gb = spec.basis[n]
        comp = {
            "arity": n,
            "basis": [{"label": lab, "degree": deg} for lab, deg in gb.entries],
            "differential": [
                {"source": lab, "target": lab2, "coeff": frac_str(c)}
                for lab, entries in sorted(spec.diff.get(n, {}).items())
                for lab2, c in entries
            ],
            "symmetric_action": [
                [
                    {"source": lab, "target": lab2, "coeff": frac_str(c)}
                    for lab, entries in sorted(tau.items())
                    for lab2, c in entries
                ]
                for tau in spec.transpositions.get(n, [])
            ],
        }
        components.append(comp)
    coins = []
    for (a, b, i) in sorted(spec.coins):
        coins.append(
            {
                "n": a,
                "k": b,
                "i": i,
                "entries": [
                    {"source": lab, "outer": o, "inner": inn, "coeff": frac_str(c)}
                    for lab, entries in sorted(spec.coins[(a, b, i)].items())
                    for o, inn, c in entries
                ],
            }
        )
    return {
        "name": spec.name,
        "arity_cap": spec.arity_cap,
        "components": components,
        "coinsertions": coins,
    }


def cooperad_from_json(data: dict) -> CooperadSpec:
    basis = {}
    diff = {}
    transp = {}
    for comp in data["components"]:
        n = comp["arity"]
        basis[n] = GradedBasis.make([(b["label"], b["degree"]) for b in comp["basis"]])
        d: dict = {}
        for e in comp.get("differential", []):
            d.setdefault(e["source"], []).append((e["target"], frac(e["coeff"])))
        if d:
            diff[n] = d
        taus = []
        for tau in comp.get("symmetric_action", []):
            t: dict = {}
            for e in tau:
                t.setdefault(e["source"], []).append((e["target"], frac(e["coeff"])))
            taus.append(t)
        if len(taus) != n - 1:
            raise ValueError(f"expected {n-1} transposition tables at arity {n}")
        transp[n] = taus
    coins = {}
    for c in data.get("coinsertions", []):
        table: dict = {}
        for e in c["entries"]:
            table.setdefault(e["source"], []).append(
                (e["outer"], e["inner"], frac(e["coeff"]))
            )
        coins[(c["n"], c["k"], c["i"])] = table
    return CooperadSpec(
        data.get("name", "user"), data["arity_cap"], basis, diff, coins, transp
    )


# -- trees and elements ------------------------------------------------------


def tree_to_json(t: Tree):
    if isinstance(t, Unit):
        return {"unit": True, "color": t.color}

    def rec(x):
        if isinstance(x, Leaf):
            return {"leaf": x.label}
        return {
            "label": x.decor.label,
            "suspended": x.decor.suspended,
            "degree": x.decor.degree,
            "color": x.color,
            "children": [rec(c) for c in x.children],
        }

    return rec(t)


def tree_from_json(data) -> Tree:
    if isinstance(data, dict) and data.get("unit"):
        return Unit(data.get("color"))

    def rec(d):
        if "leaf" in d:
            return Leaf(d["leaf"])
        decor = Decor(d["label"], d["suspended"], d["degree"])
        return Node(decor, d.get("color"), tuple(rec(c) for c in d["children"]))

    return rec(data)


def element_to_json(e: Element) -> dict:
    from .trees import tree_key

    return {
        "arity": e.arity,
        "flavor": e.flavor,
        "terms": [
            {"tree": tree_to_json(t), "coeff": frac_str(e.terms[t])}
            for t in sorted(e.terms, key=tree_key)
        ],
    }


def element_from_json(data: dict) -> Element:
    e = zero(data["flavor"], data["arity"])
    for term in data["terms"]:
        add_term(e, tree_from_json(term["tree"]), frac(term["coeff"]))
    return e


# -- derivations -------------------------------------------------------------

_PROFILE_NAMES = {"c": "single", "a": "alpha", "b": "beta", "m": "mixed"}
_PROFILE_CODES = {v: k for k, v in _PROFILE_NAMES.items()}


def derivation_to_json(d: Derivation) -> dict:
    values = []
    for (p, n, lab) in sorted(d.values):
        values.append(
            {
                "arity": n,
                "color_profile": _PROFILE_NAMES[p],
                "generator_label": lab,
                "value": element_to_json(d.values[(p, n, lab)]),
            }
        )
    return {"flavor": d.flavor, "degree": d.degree, "values": values}


def derivation_from_json(data: dict, ctx) -> Derivation:
    d = Derivation(ctx, data["flavor"], data["degree"])
    for v in data["values"]:
        key = (_PROFILE_CODES[v["color_profile"]], v["arity"], v["generator_label"])
        d.values[key] = element_from_json(v["value"])
    return d


# -- spaces and structures ---------------------------------------------------


def space_to_json(s: GradedSpace) -> dict:
    return {
        "name": s.name,
        "basis": [{"label": lab, "degree": deg} for lab, deg in s.basis.entries],
        "differential": [
            {"target": t, "source": src, "coeff": frac_str(frac(c))}
            for t, src, c in s.differential
        ],
    }


def space_from_json(data: dict) -> GradedSpace:
    return GradedSpace(
        data.get("name", "V"),
        GradedBasis.make([(b["label"], b["degree"]) for b in data["basis"]]),
        tuple((d["target"], d["source"], frac(d["coeff"])) for d in data.get("differential", [])),
    )


def end_element_to_json(e: EndElement) -> dict:
    return {
        "degree": e.degree,
        "entries": [
            {"out": o, "ins": list(ins), "coeff": frac_str(c)}
            for (o, ins), c in sorted(e.entries.items())
        ],
    }


def structure_to_json(F: AlgebraStructure) -> dict:
    spaces = {str(k): space_to_json(v) for k, v in F.spaces.items()}
    values = []
    for (p, n, lab) in sorted(F.values):
        values.append(
            {
                "arity": n,
                "color_profile": _PROFILE_NAMES[p],
                "generator_label": lab,
                "matrix": end_element_to_json(F.values[(p, n, lab)]),
            }
        )
    return {"flavor": F.flavor, "spaces": spaces, "values": values}


def structure_from_json(data: dict, spec: CooperadSpec) -> AlgebraStructure:
    spaces = {}
    for k, v in data["spaces"].items():
        key = None if k == "None" else k
        spaces[key] = space_from_json(v)
    F = AlgebraStructure(spec, data["flavor"], spaces)
    for v in data["values"]:
        p = _PROFILE_CODES[v["color_profile"]]
        n = v["arity"]
        lab = v["generator_label"]
        ins, out = _slot_colors(p, n)
        e = end_zero(spaces, ins, out, v["matrix"]["degree"])
        for ent in v["matrix"]["entries"]:
            e.entries[(ent["out"], tuple(ent["ins"]))] = frac(ent["coeff"])
        F.values[(p, n, lab)] = e
    return F


def triple_to_json(FV: AlgebraStructure, FW: AlgebraStructure, U: InfinityMorphism) -> dict:
    return {
        "source": structure_to_json(FV),
        "target": structure_to_json(FW),
        "morphism": [
            {
                "arity": n,
                "generator_label": lab,
                "matrix": end_element_to_json(U.components[(n, lab)]),
            }
            for (n, lab) in sorted(U.components)
        ],
    }


def triple_from_json(data: dict, spec: CooperadSpec):
    FV = structure_from_json(data["source"], spec)
    FW = structure_from_json(data["target"], spec)
    U = InfinityMorphism()
    V = FV.spaces[None]
    W = FW.spaces[None]
    from .trees import ALPHA, BETA

    spaces = {ALPHA: V, BETA: W}
    for comp in data["morphism"]:
        n = comp["arity"]
        lab = comp["generator_label"]
        e = end_zero(spaces, (ALPHA,) * n, BETA, comp["matrix"]["degree"])
        for ent in comp["matrix"]["entries"]:
            e.entries[(ent["out"], tuple(ent["ins"]))] = frac(ent["coeff"])
        U.components[(n, lab)] = e
    return FV, FW, U
