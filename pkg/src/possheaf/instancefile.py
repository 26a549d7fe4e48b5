"""The JSON instance format: posets, sheaves, morphisms, maps, complexes, SESs.

Matrices are row-major arrays of strings "n" or "n/d" (exact, no decimals).
Restrictions are keyed by cover "x<y", morphism components by element.  All
cross-references are by name and resolved at load time; every referenced
object passes its validator before any computation runs.
"""

from __future__ import annotations

import json

from .exactla import Matrix, field_from_name
from .homalg import ChainMap, CochainComplex, SESOfComplexes
from .poset import MonotoneMap, Poset
from .sheafcat import Sheaf, SheafContext, SheafMorphism


class InstanceError(Exception):
    """Parse or validation failure, with the offending location in the text."""


def _matrix_from_rows(field, rows, nrows, ncols, where):
    if rows is None:
        return Matrix.zeros(field, nrows, ncols)
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise InstanceError("%s: expected a %dx%d matrix" % (where, nrows, ncols))
    try:
        data = [[field.parse(x) for x in r] for r in rows]
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceError("%s: bad matrix entry (%s)" % (where, exc)) from exc
    return Matrix(field, nrows, ncols, data)


def matrix_to_rows(m: Matrix):
    return m.to_str_rows()


class Instance:
    """All named objects of one instance file, fully validated."""

    def __init__(self, field):
        self.field = field
        self.posets = {}
        self.sheaves = {}
        self.morphisms = {}
        self.maps = {}
        self.complexes = {}
        self.sequences = {}

    # -- loading -----------------------------------------------------------

    @classmethod
    def load(cls, path, field=None):
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InstanceError("%s: line %d column %d: %s"
                                    % (path, exc.lineno, exc.colno, exc.msg)) from exc
        return cls.from_dict(doc, field=field)

    @classmethod
    def from_dict(cls, doc, field=None):
        field = field if field is not None else field_from_name(doc.get("field", "q"))
        inst = cls(field)
        for name, spec in (doc.get("posets") or {}).items():
            try:
                inst.posets[name] = Poset(spec["elements"],
                                          [tuple(c) for c in spec.get("covers", [])])
            except (KeyError, ValueError) as exc:
                raise InstanceError("poset %r: %s" % (name, exc)) from exc
        for name, spec in (doc.get("sheaves") or {}).items():
            inst.sheaves[name] = inst._parse_sheaf(name, spec)
        for name, spec in (doc.get("morphisms") or {}).items():
            inst.morphisms[name] = inst._parse_morphism(name, spec)
        for name, spec in (doc.get("maps") or {}).items():
            inst.maps[name] = inst._parse_map(name, spec)
        for name, spec in (doc.get("complexes") or {}).items():
            inst.complexes[name] = inst._parse_complex(name, spec)
        for name, spec in (doc.get("sequences") or {}).items():
            inst.sequences[name] = inst._parse_sequence(name, spec)
        return inst

    def _poset(self, ref, where):
        if ref not in self.posets:
            raise InstanceError("%s: unknown poset %r" % (where, ref))
        return self.posets[ref]

    def _parse_sheaf(self, name, spec):
        where = "sheaf %r" % name
        p = self._poset(spec.get("poset"), where)
        stalks = spec.get("stalks", {})
        for e in stalks:
            if e not in p.index:
                raise InstanceError("%s: stalk at unknown element %r" % (where, e))
        dims = [int(stalks.get(e, 0)) for e in p.elements]
        rho = {}
        given = spec.get("restrictions", {})
        for key in given:
            if "<" not in key:
                raise InstanceError("%s: restriction key %r is not 'x<y'" % (where, key))
        for (i, j) in p.covers:
            key = "%s<%s" % (p.elements[i], p.elements[j])
            rho[(i, j)] = _matrix_from_rows(self.field, given.get(key),
                                            dims[j], dims[i], "%s %s" % (where, key))
        extra = set(given) - {"%s<%s" % (p.elements[i], p.elements[j]) for (i, j) in p.covers}
        if extra:
            raise InstanceError("%s: restriction %r is not a cover" % (where, sorted(extra)[0]))
        try:
            return Sheaf(p, self.field, dims, rho)
        except ValueError as exc:
            raise InstanceError("%s: %s" % (where, exc)) from exc

    def _parse_morphism(self, name, spec):
        where = "morphism %r" % name
        for ref in (spec.get("source"), spec.get("target")):
            if ref not in self.sheaves:
                raise InstanceError("%s: unknown sheaf %r" % (where, ref))
        src = self.sheaves[spec["source"]]
        tgt = self.sheaves[spec["target"]]
        if src.poset is not tgt.poset:
            raise InstanceError("%s: source and target posets differ" % where)
        comps_spec = spec.get("components", {})
        comps = []
        for i, e in enumerate(src.poset.elements):
            comps.append(_matrix_from_rows(self.field, comps_spec.get(e),
                                           tgt.dims[i], src.dims[i],
                                           "%s at %s" % (where, e)))
        try:
            return SheafMorphism(src, tgt, comps)
        except Exception as exc:
            raise InstanceError("%s: %s" % (where, exc)) from exc

    def _parse_map(self, name, spec):
        where = "map %r" % name
        src = self._poset(spec.get("source"), where)
        tgt = self._poset(spec.get("target"), where)
        try:
            return MonotoneMap(src, tgt, spec.get("values", {}))
        except Exception as exc:
            raise InstanceError("%s: %s" % (where, exc)) from exc

    def _parse_complex(self, name, spec):
        where = "complex %r" % name
        p = self._poset(spec.get("poset"), where)
        ctx = SheafContext(p, self.field)
        objects, diffs = {}, {}
        for term in spec.get("terms", []):
            q = int(term["degree"])
            ref = term.get("object")
            if ref not in self.sheaves:
                raise InstanceError("%s: unknown sheaf %r at degree %d" % (where, ref, q))
            objects[q] = self.sheaves[ref]
            dref = term.get("differential")
            if dref is not None:
                if dref not in self.morphisms:
                    raise InstanceError("%s: unknown morphism %r" % (where, dref))
                diffs[q] = self.morphisms[dref]
        try:
            return CochainComplex(ctx, objects, diffs)
        except Exception as exc:
            raise InstanceError("%s: %s" % (where, exc)) from exc

    def _parse_sequence(self, name, spec):
        where = "sequence %r" % name
        kind = spec.get("kind", "sheaves")
        if kind == "sheaves":
            for ref in (spec.get("iota"), spec.get("pi")):
                if ref not in self.morphisms:
                    raise InstanceError("%s: unknown morphism %r" % (where, ref))
            iota = self.morphisms[spec["iota"]]
            pi = self.morphisms[spec["pi"]]
            ctx = SheafContext(iota.source.poset, self.field)
            if not (ctx.is_mono(iota) and ctx.is_epi(pi)
                    and ctx.is_exact_pair(iota, pi, iota.target)):
                raise InstanceError("%s: not a short exact sequence" % where)
            return ("sheaves", iota, pi)
        if kind == "complexes":
            cplxs = []
            for key in ("A", "B", "C"):
                ref = spec.get(key)
                if ref not in self.complexes:
                    raise InstanceError("%s: unknown complex %r" % (where, ref))
                cplxs.append(self.complexes[ref])
            A, B, C = cplxs

            def chain_map(tag, src, tgt):
                comps = {}
                for qs, ref in (spec.get(tag) or {}).items():
                    if ref not in self.morphisms:
                        raise InstanceError("%s: unknown morphism %r" % (where, ref))
                    comps[int(qs)] = self.morphisms[ref]
                try:
                    return ChainMap(src, tgt, comps)
                except Exception as exc:
                    raise InstanceError("%s: %s: %s" % (where, tag, exc)) from exc

            iota = chain_map("iota", A, B)
            pi = chain_map("pi", B, C)
            try:
                return ("complexes", SESOfComplexes(iota, pi))
            except Exception as exc:
                raise InstanceError("%s: %s" % (where, exc)) from exc
        raise InstanceError("%s: unknown kind %r" % (where, kind))


# -- serialization ------------------------------------------------------------

def poset_to_dict(p: Poset):
    return {"elements": list(p.elements),
            "covers": [[p.elements[i], p.elements[j]] for (i, j) in p.covers]}

def sheaf_to_dict(F: Sheaf, poset_name):
    out = {"poset": poset_name,
           "stalks": {F.poset.elements[i]: F.dims[i]
                      for i in range(len(F.poset)) if F.dims[i]},
           "restrictions": {}}
    for (i, j) in F.poset.covers:
        if F.dims[i] and F.dims[j]:
            key = "%s<%s" % (F.poset.elements[i], F.poset.elements[j])
            out["restrictions"][key] = matrix_to_rows(F.rho[(i, j)])
    return out


def morphism_to_dict(phi: SheafMorphism, source_name, target_name):
    comps = {}
    for i, e in enumerate(phi.source.poset.elements):
        if phi.source.dims[i] and phi.target.dims[i]:
            comps[e] = matrix_to_rows(phi.comps[i])
    return {"source": source_name, "target": target_name, "components": comps}


def map_to_dict(f: MonotoneMap, source_name, target_name):
    return {"source": source_name, "target": target_name,
            "values": {e: f.apply(e) for e in f.source.elements}}


def validate_instance(path, field=None):
    """Parse and run every invariant check; returns (ok, messages)."""
    messages = []
    try:
        inst = Instance.load(path, field=field)
    except InstanceError as exc:
        return False, [str(exc)]
    for section in ("posets", "sheaves", "morphisms", "maps", "complexes", "sequences"):
        for name in sorted(getattr(inst, section)):
            messages.append("%s %s: valid" % (section[:-1], name))
    return True, messages
