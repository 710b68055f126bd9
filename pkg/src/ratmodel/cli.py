"""Command line interface: ``ratmodel <verb> ...``.

Exit status is 0 on success, 1 when a verified property fails and 2 on
usage or parse errors.  Text output is tab separated; ``--json`` switches to
JSON with sorted keys.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import __version__
from .burnside import (BurnsideElement, Restriction, SizeBoundExceeded, idempotent_basis,
                       power_decomposition, split_unit_report, support, table_of_marks)
from .dgmod import ComplexError, DGModule, homology
from .exactq import DimensionError, format_rational
from .permgrp import (GroupSpecError, OrderCapExceeded, format_perm, group_from_spec, is_subconjugate,
                      parse_subgroup_spec, weyl_group, fixed_point_count)
from .ringoid import (CategoryError, DGCategory, TruncationError, build_Ea, formality_zigzag,
                      verify_gtilde_inverse, find_ring_isomorphism)
from .ringoidmod import box_checks, morita_roundtrip_check
from .skew import dihedral_iso_check


class UsageError(Exception):
    pass


def _emit(payload, text: str, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}:{e.lineno}:{e.colno}: malformed JSON ({e.msg})")


def _group(spec: str):
    return group_from_spec(spec)


# -- verbs --------------------------------------------------------------------------

def cmd_marks(args) -> int:
    G = _group(args.group)
    tom = table_of_marks(G, workers=args.threads)
    _emit(tom.to_json(), tom.to_tsv(), args.json)
    return 0


def cmd_idempotents(args) -> int:
    G = _group(args.group)
    es = idempotent_basis(G)
    rows = []
    lines = ["\t".join(["class"] + [c.label() for c in G.subgroup_classes])]
    for c, e in zip(G.subgroup_classes, es):
        rows.append({"class": c.index, "label": c.label(), "coefficients": e.to_json(),
                     "support": sorted(support(e))})
        lines.append("\t".join([f"e{c.index}"] + e.to_json()))
    _emit({"group": G.name, "idempotents": rows}, "\n".join(lines) + "\n", args.json)
    return 0


def cmd_split(args) -> int:
    G = _group(args.group)
    table_of_marks(G, workers=args.threads)
    rep = split_unit_report(G)
    _emit(rep.to_json(), rep.to_text(), args.json)
    return 0 if rep.passed else 1


def cmd_weyl(args) -> int:
    G = _group(args.group)
    H = parse_subgroup_spec(G, args.subgroup)
    W = weyl_group(G, H)
    N = H.normalizer()
    diag = fixed_point_count(G, H, H)
    ok = W.order == N.order // H.order == diag
    gens = [format_perm(g) for g in W.generators if any(x != i for i, x in enumerate(g))]
    payload = {"group": G.name, "subgroup": H.label(), "class": G.class_of(H).index,
               "subgroup_order": H.order, "normalizer_order": N.order, "weyl_order": W.order,
               "weyl_degree": W.degree, "weyl_generators": sorted(set(gens)),
               "diagonal_mark": diag, "check": "pass" if ok else "fail"}
    text = "".join(f"{k}\t{v if not isinstance(v, list) else ' '.join(v) or '()'}\n"
                   for k, v in [("subgroup", H.label()), ("subgroup_order", H.order),
                                ("normalizer_order", N.order), ("weyl_order", W.order),
                                ("weyl_generators", sorted(set(gens))), ("diagonal_mark", diag),
                                ("check", payload["check"])])
    _emit(payload, text, args.json)
    return 0 if ok else 1


def cmd_powers(args) -> int:
    G = _group(args.group)
    H = parse_subgroup_spec(G, args.subgroup)
    if args.i < 1:
        raise UsageError("--i must be at least 1")
    dec = power_decomposition(G, H, args.i, size_bound=args.size_bound)
    h = G.class_of(H).index
    worder = weyl_group(G, H).order
    expected = worder ** (args.i - 1)
    above = [k for k in dec if k != h and is_subconjugate(G, H, G.subgroup_classes[k].representative)]
    ok = dec.get(h, 0) == expected and not above
    classes = G.subgroup_classes
    payload = {"group": G.name, "subgroup": H.label(), "class": h, "i": args.i,
               "multiplicities": [{"class": k, "label": classes[k].label(), "multiplicity": m}
                                  for k, m in sorted(dec.items())],
               "expected_multiplicity": expected, "classes_strictly_above": above,
               "check": "pass" if ok else "fail"}
    lines = ["class\tlabel\tmultiplicity"]
    lines += [f"{k}\t{classes[k].label()}\t{m}" for k, m in sorted(dec.items())]
    lines.append(f"check\tmultiplicity at {h} is {dec.get(h, 0)}, expected {expected}; "
                 f"classes above: {len(above)}\t{payload['check']}")
    _emit(payload, "\n".join(lines) + "\n", args.json)
    return 0 if ok else 1


def cmd_restrict(args) -> int:
    G = _group(args.group)
    H = parse_subgroup_spec(G, args.subgroup)
    try:
        data = json.loads(args.element)
    except json.JSONDecodeError as e:
        raise UsageError(f"--element:{e.lineno}:{e.colno}: malformed JSON ({e.msg})")
    if isinstance(data, dict):
        data = data.get("coefficients", data)
    if not isinstance(data, list) or len(data) != len(G.subgroup_classes):
        raise UsageError(f"--element must be a list of {len(G.subgroup_classes)} coefficients")
    try:
        x = BurnsideElement.from_json(G, data)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"--element: {e}")
    res = Restriction(G, H)
    y = res(x)
    K = res.group
    payload = {"group": G.name, "subgroup": H.label(), "element": x.to_json(),
               "restriction": y.to_json(),
               "subgroup_classes": [c.label() for c in K.subgroup_classes]}
    lines = ["class\tcoefficient"]
    lines += [f"{c.label()}\t{v}" for c, v in zip(K.subgroup_classes, y.to_json())]
    _emit(payload, "\n".join(lines) + "\n", args.json)
    return 0


def _load_complex(path: str) -> DGModule:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object")
    try:
        return DGModule.from_json(data)
    except (ComplexError, DimensionError, GroupSpecError, ValueError, TypeError) as e:
        raise UsageError(f"{path}: {e}")


def cmd_homology(args) -> int:
    X = _load_complex(args.complex)
    Hm = homology(X)
    G = X.group
    degrees = {}
    lines = ["degree\tdim\tcharacter"]
    for n in Hm.degrees:
        if not Hm.dim(n):
            continue
        chi = [format_rational(c) for c in Hm.character(n)]
        degrees[str(n)] = {"dim": Hm.dim(n), "character": chi,
                           "action": {str(g): Hm.act(g, n).to_json() for g in range(1, G.order)}}
        lines.append(f"{n}\t{Hm.dim(n)}\t{' '.join(chi)}")
    _emit({"group": G.name, "homology": degrees}, "\n".join(lines) + "\n", args.json)
    return 0


def cmd_ea(args) -> int:
    W = _group(args.weyl)
    E = build_Ea(W, args.max_power)
    k = args.max_power
    dims = [[E.hom_dim(i, j) for j in range(k + 1)] for i in range(k + 1)]
    formula = all(dims[i][j] == W.order ** (i + j - 1) for i in range(1, k + 1) for j in range(1, k + 1))
    ring = verify_gtilde_inverse(E) if k >= 1 else True
    iso = find_ring_isomorphism(E) if k >= 1 else {}
    ok = formula and ring and iso is not None
    payload = {"weyl": W.name, "max_power": k, "objects": list(E.objects), "hom_dims": dims,
               "dimension_formula": "pass" if formula else "fail",
               "gtilde_to_inverse_ring_iso": "pass" if ring else "fail",
               "ring_iso_found": iso is not None}
    lines = ["\t".join(["hom"] + list(E.objects))]
    for i in range(k + 1):
        lines.append("\t".join([E.objects[i]] + [str(d) for d in dims[i]]))
    lines.append(f"check\tdimension formula\t{payload['dimension_formula']}")
    lines.append(f"check\tg~ -> g^-1 ring iso\t{payload['gtilde_to_inverse_ring_iso']}")
    _emit(payload, "\n".join(lines) + "\n", args.json)
    return 0 if ok else 1


def cmd_formality(args) -> int:
    data = _load_json(args.category)
    try:
        C = DGCategory.from_json(data)
    except (CategoryError, ComplexError, DimensionError, KeyError, ValueError, TypeError) as e:
        raise UsageError(f"{args.category}: {e}")
    rep = formality_zigzag(C)
    payload = rep.to_json(C.objects)
    lines = [f"cover -> original quasi-iso\t{'yes' if rep.original_ok else 'no'}",
             f"cover -> H0 quasi-iso\t{'yes' if rep.h0_ok else 'no'}",
             f"verdict\t{'formal' if rep.verdict else 'not formal'}"]
    for a, b, h in rep.offending:
        hs = " ".join(f"H{n}={d}" for n, d in sorted(h.items()))
        lines.append(f"offending\t{C.objects[a]}->{C.objects[b]}\t{hs}")
    _emit(payload, "\n".join(lines) + "\n", args.json)
    return 0 if rep.verdict else 1


def cmd_morita(args) -> int:
    W = _group(args.weyl)
    X = _load_complex(args.complex)
    if X.group is not W:
        raise UsageError(f"complex is over {X.group.name}, not {W.name}")
    E = build_Ea(W, args.max_power)
    rep = morita_roundtrip_check(X, E)
    payload = dict(rep.to_json(), weyl=W.name, max_power=args.max_power)
    lines = [f"counit iso\t{_pf(rep.counit_iso)}", f"counit chain map\t{_pf(rep.counit_chain_map)}",
             f"counit equivariant\t{_pf(rep.counit_equivariant)}"]
    lines += [f"unit iso at F{a}\t{_pf(v)}" for a, v in sorted(rep.unit_isos.items())]
    lines.append(f"dims\t{' '.join(map(str, rep.coend_dims))}\t{' '.join(map(str, rep.target_dims))}")
    _emit(payload, "\n".join(lines) + "\n", args.json)
    return 0 if rep.passed else 1


def _pf(ok: bool) -> str:
    return "pass" if ok else "fail"


def cmd_box(args) -> int:
    W = _group(args.weyl)
    E = build_Ea(W, args.max_power)
    results = box_checks(E)
    payload = {"weyl": W.name, "max_power": args.max_power,
               "checks": [{"name": name, "result": _pf(ok)} for name, ok in results]}
    lines = [f"{name}\t{_pf(ok)}" for name, ok in results]
    _emit(payload, "\n".join(lines) + "\n", args.json)
    return 0 if all(ok for _, ok in results) else 1


def cmd_skew(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    rep = dihedral_iso_check(args.n)
    _emit(rep.to_json(), rep.to_text(), args.json)
    return 0 if rep.verified else 1


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratmodel", description="Rational Burnside rings, dg categories and Morita checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine readable output")
    common.add_argument("--threads", type=int, default=1, help="worker threads for the table of marks")
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    for name, fn, help in [("marks", cmd_marks, "table of marks as TSV"),
                           ("idempotents", cmd_idempotents, "primitive idempotents of the rational Burnside ring"),
                           ("split", cmd_split, "verify the idempotent splitting of the unit")]:
        verb(name, fn, help).add_argument("group")
    sp = verb("weyl", cmd_weyl, "Weyl group of a subgroup")
    sp.add_argument("group")
    sp.add_argument("--subgroup", required=True)
    sp = verb("powers", cmd_powers, "orbit decomposition of (G/H)^i")
    sp.add_argument("group")
    sp.add_argument("--subgroup", required=True)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--size-bound", type=int, default=20000)
    sp = verb("restrict", cmd_restrict, "restrict a Burnside element to a subgroup")
    sp.add_argument("group")
    sp.add_argument("--subgroup", required=True)
    sp.add_argument("--element", required=True, help="JSON list of rational coefficients")
    verb("homology", cmd_homology, "homology of a complex file").add_argument("complex")
    sp = verb("ea", cmd_ea, "hom dimensions and ring check for E_a")
    sp.add_argument("weyl")
    sp.add_argument("--max-power", type=int, required=True)
    verb("formality", cmd_formality, "formality zig-zag for a dg category file").add_argument("category")
    sp = verb("morita-check", cmd_morita, "Morita roundtrip for a complex")
    sp.add_argument("complex")
    sp.add_argument("--weyl", required=True)
    sp.add_argument("--max-power", type=int, default=1)
    sp = verb("box-check", cmd_box, "box product isomorphisms on free modules")
    sp.add_argument("weyl")
    sp.add_argument("--max-power", type=int, required=True)
    sp = verb("skew-dihedral", cmd_skew, "QC_n # C2 versus QD_2n")
    sp.add_argument("--n", type=int, required=True)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    if getattr(args, "threads", 1) < 1:
        print("ratmodel: --threads must be positive", file=sys.stderr)
        return 2
    if getattr(args, "max_power", 0) < 0:
        print("ratmodel: --max-power must be non-negative", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except (UsageError, GroupSpecError, OrderCapExceeded, SizeBoundExceeded, TruncationError,
            DimensionError) as e:
        print(f"ratmodel: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
