"""Command-line entry point: parse instance files, run pipelines, verify.

One instance file may define everything; commands select objects by name.
Output is plain text by default; --format report emits a machine-readable
JSON document.  The exit code is 0 exactly when every executed check passed.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import homalg
from .ceres import build_ce_triple, compute_invariants, verify_ce
from .exactla import field_from_name
from .forge import GenConfig, gen_poset, gen_ses_sheaves, gen_sheaf
from .gross import (
    E2Identification,
    FunctorPair,
    acyclic_middle_analysis,
    delta_morphism,
    first_ss_check,
    grothendieck_ss,
    leray_ss,
    verify_main_theorem,
)
from .instancefile import (
    Instance,
    InstanceError,
    matrix_to_rows,
    morphism_to_dict,
    poset_to_dict,
    sheaf_to_dict,
    validate_instance,
)
from .sheafcat import SheafContext, restrict_to_open, sheaf_cohomology_dims


class _Run:
    """Collects check results and tables for both output formats."""

    def __init__(self, command, fmt):
        self.command = command
        self.fmt = fmt
        self.checks = []
        self.lines = []
        self.tables = {}

    def say(self, text):
        self.lines.append(text)

    def check(self, name, ok, detail=""):
        self.checks.append({"name": name, "ok": bool(ok), "detail": detail})
        self.say("%-52s %s%s" % (name, "PASS" if ok else "FAIL",
                                 (" " + detail) if detail else ""))

    def table(self, name, rows):
        self.tables[name] = rows

    @property
    def ok(self):
        return all(c["ok"] for c in self.checks)

    def emit(self):
        if self.fmt == "report":
            doc = {"command": self.command, "ok": self.ok,
                   "checks": self.checks, "tables": self.tables}
            print(json.dumps(doc, indent=2))
        else:
            for name, rows in self.tables.items():
                print(name)
                for row in rows:
                    print("  " + "  ".join(str(x) for x in row))
            for line in self.lines:
                print(line)
        return 0 if self.ok else 1


def _load(args):
    return Instance.load(args.file, field=field_from_name(args.field))


def _get(section, name, kind):
    if name not in section:
        raise InstanceError("unknown %s %r" % (kind, name))
    return section[name]


def _page_rows(ss, r):
    return [(p, q, d) for (p, q, d) in ss.page_table(r)]


def cmd_validate(args, run):
    ok, messages = validate_instance(args.file, field=field_from_name(args.field))
    for msg in messages:
        run.say(msg)
    run.check("instance file valid", ok)


def cmd_cohomology(args, run):
    inst = _load(args)
    F = _get(inst.sheaves, args.sheaf, "sheaf")
    if args.open is not None:
        names = set(args.open.split(",")) if args.open else set()
        F, _ = restrict_to_open(F, names)
    dims = sheaf_cohomology_dims(F, max_q=args.max_degree)
    run.table("H^q dims", [(q, d) for q, d in enumerate(dims)])
    run.check("cohomology computed", True)


def cmd_resolve(args, run):
    inst = _load(args)
    F = _get(inst.sheaves, args.sheaf, "sheaf")
    ctx = SheafContext(F.poset, inst.field)
    res = homalg.injective_resolution(ctx, F, max_len=args.max_degree)
    rows = []
    for q in res.complex.degrees():
        I = res.complex.obj(q)
        rows.append((q, [(F.poset.elements[x], v) for (x, v) in I.summands]))
    run.table("coinduced resolution", rows)
    run.check("resolution exact", res.verify_exact())
    if res.truncated:
        run.say("note: bound was raised past --max-degree to stay exact")


def cmd_ce(args, run):
    inst = _load(args)
    kind, *data = _get(inst.sequences, args.sequence, "sequence")
    if kind != "complexes":
        raise InstanceError("sequence %r is not a sequence of complexes" % args.sequence)
    ses = data[0]
    if args.max_degree is not None and args.max_degree < ses.ctx.resolution_bound():
        run.say("warning: --max-degree %d is below the safe bound %d"
                % (args.max_degree, ses.ctx.resolution_bound()))
    inv = compute_invariants(ses)
    run.check("nineteen derived sequences exact", True,
              "%d labels" % sum(inv.label_counts().values()))
    ce = build_ce_triple(ses, depth=args.max_degree)
    run.say("depth: %d rows" % ce.depth())
    for name in ("A", "B", "C"):
        rep = verify_ce(ce.doubles[name])
        run.check("Cartan-Eilenberg property for %s" % name, rep.ok,
                  "" if rep.ok else rep.failures()[0][0])
    ok_rows = True
    for p in range(ce.depth()):
        t = ce.triples[p]
        for q in t.inv.main_degrees():
            if not ses.ctx.is_exact_pair(ce.row_iotas[p].comp(q), ce.row_pis[p].comp(q),
                                         t.cplx["J"].obj(q)):
                ok_rows = False
    run.check("rows exact in every bidegree", ok_rows)


def _pair_for(args, inst, default_poset):
    f = None
    if getattr(args, "map", None):
        f = _get(inst.maps, args.map, "map")
        return FunctorPair(f, f.source, inst.field)
    return FunctorPair(None, default_poset, inst.field)


def cmd_gss(args, run):
    inst = _load(args)
    F = _get(inst.sheaves, args.sheaf, "sheaf")
    pair = _pair_for(args, inst, F.poset)
    data = grothendieck_ss(pair, F)
    run.table("E2 page (p, q, dim)", _page_rows(data.ss, 2))
    run.table("E_inf page (p, q, dim)", _page_rows(data.ss, data.ss.r_inf))
    diffs = []
    for r in range(2, data.ss.r_inf):
        for (p, q, _) in _page_rows(data.ss, r):
            d = data.ss.differential(r, p, q)
            if not d.is_zero():
                diffs.append((r, p, q, matrix_to_rows(d)))
    run.table("nonzero differentials (r, p, q, matrix)", diffs)
    run.table("total cohomology", [(n, data.ss.total_h_dim(n))
                                   for n in range(2 * data.ss.tower.D + 1)])
    run.check("first spectral sequence checks", first_ss_check(data).ok)
    run.check("E2 identification invertible",
              E2Identification(pair, data.double, data.ss).check())
    run.check("convergence: E_inf matches total cohomology", data.ss.convergence_ok())


def cmd_leray(args, run):
    inst = _load(args)
    F = _get(inst.sheaves, args.sheaf, "sheaf")
    f = _get(inst.maps, args.map, "map")
    data, ident, comparisons = leray_ss(f, F, field=inst.field)
    run.table("E2 page (p, q, dim)", _page_rows(data.ss, 2))
    run.table("total cohomology", [(n, data.ss.total_h_dim(n))
                                   for n in range(2 * data.ss.tower.D + 1)])
    if _page_rows(data.ss, 2) == _page_rows(data.ss, data.ss.r_inf):
        run.say("degenerates at E2")
    run.check("E2 = H^p(Y, R^q f_*) dimensions", all(a == b for a, b in comparisons.values()))
    run.check("E2 identification invertible", ident.check())
    run.check("first spectral sequence checks", first_ss_check(data).ok)
    run.check("convergence: E_inf matches total cohomology", data.ss.convergence_ok())


def _family_for(args, run, inst):
    kind, *data = _get(inst.sequences, args.sequence, "sequence")
    if kind != "sheaves":
        raise InstanceError("sequence %r is not a sequence of sheaves" % args.sequence)
    iota, pi = data
    f = _get(inst.maps, args.map, "map")
    pair = FunctorPair(f, f.source, inst.field)
    return pair, iota, pi, delta_morphism(pair, iota, pi)


def cmd_delta(args, run):
    inst = _load(args)
    _, _, _, family = _family_for(args, run, inst)
    run.say("recorded couple signs: %s" % family.mor.signs)
    for r in range(2, family.r_inf + 1):
        rows = []
        for (p, q) in sorted(set(family.ssT.page_dims(r))):
            m = family.delta_r(r, p, q)
            rows.append((p, q, "%dx%d" % (m.rows, m.cols), matrix_to_rows(m)))
        run.table("delta_%d maps" % r, rows)
    run.check("coboundary family constructed", True)


def cmd_verify_main(args, run):
    inst = _load(args)
    _, _, _, family = _family_for(args, run, inst)
    rep = verify_main_theorem(family)
    for name, ok, detail in rep.items:
        run.check(name, ok, detail)


def cmd_verify_cz(args, run):
    inst = _load(args)
    pair, iota, pi, family = _family_for(args, run, inst)
    rep, _ = acyclic_middle_analysis(pair, iota, pi, family)
    for name, ok, detail in rep.items:
        run.check(name, ok, detail)


def cmd_selftest(args, run):
    passed = 0
    for k in range(args.count):
        cfg = GenConfig("%d-%d" % (args.seed, k), max_elements=5, max_stalk_dim=2)
        try:
            from .forge import gen_ses_complexes

            ses = gen_ses_complexes(cfg)
            compute_invariants(ses)
            ce = build_ce_triple(ses)
            ok = all(verify_ce(ce.doubles[n]).ok for n in ("A", "B", "C"))
        except Exception as exc:   # a failure here is an engine bug
            ok = False
            run.say("seed %d failed: %s" % (k, exc))
        passed += bool(ok)
    run.check("selftest", passed == args.count, "%d/%d PASS" % (passed, args.count))


def cmd_forge(args, run):
    cfg = GenConfig(args.seed, max_elements=args.max_elements,
                    max_stalk_dim=2, field=field_from_name(args.field))
    doc = {"field": args.field, "posets": {}, "sheaves": {}}
    if args.kind == "poset":
        doc["posets"]["P"] = poset_to_dict(gen_poset(cfg))
    elif args.kind == "sheaf":
        p = gen_poset(cfg.child("poset"))
        doc["posets"]["P"] = poset_to_dict(p)
        doc["sheaves"]["F"] = sheaf_to_dict(gen_sheaf(cfg, p), "P")
    else:  # ses
        p = gen_poset(cfg.child("poset"))
        _, mono, epi = gen_ses_sheaves(cfg, p)
        doc["posets"]["P"] = poset_to_dict(p)
        doc["sheaves"]["A"] = sheaf_to_dict(mono.source, "P")
        doc["sheaves"]["B"] = sheaf_to_dict(mono.target, "P")
        doc["sheaves"]["C"] = sheaf_to_dict(epi.target, "P")
        doc["morphisms"] = {"iota": morphism_to_dict(mono, "A", "B"),
                            "pi": morphism_to_dict(epi, "B", "C")}
        doc["sequences"] = {"S": {"kind": "sheaves", "iota": "iota", "pi": "pi"}}
    print(json.dumps(doc, indent=2))
    run.check("instance generated", True)


def build_parser():
    top = argparse.ArgumentParser(prog="possheaf",
                                  description="exact spectral sequences of sheaves on finite posets")
    top.add_argument("--field", default="q", help="q or fp:<prime>")
    top.add_argument("--format", default="text", choices=["text", "report"])
    top.add_argument("--max-degree", type=int, default=None)
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, func, file_arg=True, **opts):
        p = sub.add_parser(name)
        if file_arg:
            p.add_argument("file")
        for opt, kw in opts.items():
            p.add_argument("--" + opt.replace("_", "-"), **kw)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate)
    add("cohomology", cmd_cohomology, sheaf={"required": True}, open={"default": None})
    add("resolve", cmd_resolve, sheaf={"required": True})
    add("ce", cmd_ce, sequence={"required": True})
    add("gss", cmd_gss, sheaf={"required": True}, map={"default": None})
    add("leray", cmd_leray, sheaf={"required": True}, map={"required": True})
    add("delta", cmd_delta, sequence={"required": True}, map={"required": True})
    add("verify-main", cmd_verify_main, sequence={"required": True}, map={"required": True})
    add("verify-cz", cmd_verify_cz, sequence={"required": True}, map={"required": True})
    add("selftest", cmd_selftest, file_arg=False,
        seed={"type": int, "default": 0}, count={"type": int, "default": 10})
    add("forge", cmd_forge, file_arg=False,
        seed={"type": int, "default": 0}, kind={"default": "ses"},
        max_elements={"type": int, "default": 5})
    return top


def main(argv=None):
    args = build_parser().parse_args(argv)
    run = _Run(args.command, args.format)
    try:
        args.func(args, run)
    except InstanceError as exc:
        run.check("input error", False, str(exc))
    return run.emit()


if __name__ == "__main__":
    sys.exit(main())
