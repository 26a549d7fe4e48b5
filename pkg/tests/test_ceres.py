import pytest

from possheaf.ceres import (
    ES_LABELS,
    InternalExactnessFailure,
    build_ce_triple,
    build_injective_triple,
    ce_resolution_of_complex,
    compute_invariants,
    verify_ce,
)
from possheaf.exactla import QQ, Matrix
from possheaf.homalg import ChainMap, CochainComplex, SESOfComplexes, horseshoe, injective_resolution
from possheaf.poset import fence_x4
from possheaf.sheafcat import SheafContext, VectorContext

X4 = fence_x4()


def fence_ctx():
    return SheafContext(X4, QQ)


def injective_middle_ses(ctx):
    k = ctx.constant_sheaf()
    I, m = ctx.injective_embed(k)
    C, e = ctx.cokernel(m)
    A1 = CochainComplex(ctx, {0: k}, {})
    B1 = CochainComplex(ctx, {0: I}, {})
    C1 = CochainComplex(ctx, {0: C}, {})
    return SESOfComplexes(ChainMap(A1, B1, {0: m}), ChainMap(B1, C1, {0: e}))


def horseshoe_ses(ctx):
    k = ctx.constant_sheaf()
    I, m = ctx.injective_embed(k)
    C, e = ctx.cokernel(m)
    hs = horseshoe(ctx, m, e, injective_resolution(ctx, k), injective_resolution(ctx, C))
    return hs.as_ses()


def test_invariants_split_zero_differentials():
    V = VectorContext(QQ)
    A = CochainComplex(V, {0: 1, 1: 1}, {0: Matrix.zeros(QQ, 1, 1)})
    C = CochainComplex(V, {0: 2, 1: 2}, {0: Matrix.zeros(QQ, 2, 2)})
    B = CochainComplex(V, {0: 3, 1: 3}, {0: Matrix.zeros(QQ, 3, 3)})
    iota = ChainMap(A, B, {q: Matrix.from_int_rows(QQ, [[1], [0], [0]]) for q in (0, 1)})
    pi = ChainMap(B, C, {q: Matrix.from_int_rows(QQ, [[0, 1, 0], [0, 0, 1]]) for q in (0, 1)})
    inv = compute_invariants(SESOfComplexes(iota, pi))
    for q in (0, 1):
        assert inv.A.W[q] == 0                # H(A) -> H(B) is mono
        assert inv.A.X[q] == 0
        assert inv.A.B[q] == inv.B.B[q] == inv.C.B[q] == 0
        assert inv.A.H[q] == 1 and inv.B.H[q] == 3 and inv.C.H[q] == 2
        assert inv.B.W[q] == 1                # kernel of H(B) -> H(C) is the A part
        assert inv.C.W[q] == 2                # connecting map is zero


def test_invariants_epi_onto_b():
    # A -> B iso in degree 0, C = 0: every C-side object vanishes
    V = VectorContext(QQ)
    A = CochainComplex(V, {0: 2}, {})
    B = CochainComplex(V, {0: 2}, {})
    C = CochainComplex(V, {0: 0}, {})
    ses = SESOfComplexes(ChainMap(A, B, {0: Matrix.identity(QQ, 2)}),
                         ChainMap(B, C, {0: Matrix.zeros(QQ, 0, 2)}))
    inv = compute_invariants(ses)
    assert inv.C.H[0] == 0 and inv.C.W[0] == 0 and inv.C.X[0] == 0


def test_nineteen_labels_present():
    inv = compute_invariants(injective_middle_ses(fence_ctx()))
    counts = inv.label_counts()
    assert set(counts) == set(ES_LABELS)
    assert all(c >= 1 for c in counts.values())


def test_triple_single_degree_shape():
    ctx = fence_ctx()
    ses = injective_middle_ses(ctx)
    triple = build_injective_triple(compute_invariants(ses))
    k = ctx.constant_sheaf()
    I, _ = ctx.injective_embed(k)
    # with zero differentials, I^0 is the chosen injective of A's cohomology
    assert triple.cplx["I"].obj(0).dims == I.dims
    # rows are exact and the differentials square to zero by construction
    triple.cplx["J"].validate()
    ses_row = triple.as_ses()
    assert ses_row.A is triple.cplx["I"]


def test_triple_on_horseshoe_ses():
    ctx = fence_ctx()
    ses = horseshoe_ses(ctx)
    triple = build_injective_triple(compute_invariants(ses))
    for q in triple.inv.main_degrees():
        assert ctx.is_mono(triple.aug["B"].comp(q))


def test_zero_ses_gives_zero_triple():
    ctx = fence_ctx()
    z = ctx.zero_obj()
    Z = CochainComplex(ctx, {0: z}, {})
    ses = SESOfComplexes(ChainMap(Z, Z, {0: ctx.zero_map(z, z)}),
                         ChainMap(Z, Z, {0: ctx.zero_map(z, z)}))
    ce = build_ce_triple(ses)
    assert ce.depth() == 0
    assert verify_ce(ce.doubles["A"]).ok


def test_ce_triple_verifies_on_fence():
    ctx = fence_ctx()
    ce = build_ce_triple(horseshoe_ses(ctx))
    assert ce.depth() <= X4.longest_chain_length() + 2
    for name in ("A", "B", "C"):
        rep = verify_ce(ce.doubles[name])
        assert rep.ok, rep.render()
    # row exactness in every bidegree
    for p in range(ce.depth()):
        for q in ce.triples[p].inv.main_degrees():
            i = ce.row_iotas[p].comp(q)
            pi = ce.row_pis[p].comp(q)
            assert ctx.is_exact_pair(i, pi, ce.triples[p].cplx["J"].obj(q))


def test_ce_of_single_complex():
    ctx = fence_ctx()
    k = ctx.constant_sheaf()
    res = injective_resolution(ctx, k)
    double = ce_resolution_of_complex(
        CochainComplex(ctx, {0: k, 1: k}, {0: ctx.zero_map(k, k)}))
    assert verify_ce(double).ok
    assert res is not None


def test_ce_on_vector_context_closes_immediately():
    V = VectorContext(QQ)
    A = CochainComplex(V, {0: 1, 1: 1}, {0: Matrix.from_int_rows(QQ, [[0]])})
    B = CochainComplex(V, {0: 2, 1: 2}, {0: Matrix.zeros(QQ, 2, 2)})
    C = CochainComplex(V, {0: 1, 1: 1}, {0: Matrix.zeros(QQ, 1, 1)})
    ses = SESOfComplexes(
        ChainMap(A, B, {q: Matrix.from_int_rows(QQ, [[1], [0]]) for q in (0, 1)}),
        ChainMap(B, C, {q: Matrix.from_int_rows(QQ, [[0, 1]]) for q in (0, 1)}))
    ce = build_ce_triple(ses)
    assert ce.depth() == 1
    for name in ("A", "B", "C"):
        assert verify_ce(ce.doubles[name]).ok


def test_corrupted_double_is_located():
    ctx = fence_ctx()
    ce = build_ce_triple(injective_middle_ses(ctx))
    double = ce.doubles["B"]
    # corrupt the first horizontal map by zeroing it
    bad_dh = list(double.dh)
    q0 = 0
    bad_comps = dict(bad_dh[0].comps)
    bad_comps[q0] = ctx.zero_map(double.rows[0].obj(q0), double.rows[1].obj(q0))
    from possheaf.ceres import AugmentedDouble

    corrupt = AugmentedDouble(ctx, double.base, double.rows,
                              [ChainMap(bad_dh[0].source, bad_dh[0].target, bad_comps,
                                        validate=False)] + bad_dh[1:],
                              double.augmentation, double.tag_rows)
    rep = verify_ce(corrupt)
    assert not rep.ok
    assert rep.failures()


def test_degree_bound_preserved():
    ctx = fence_ctx()
    ses = horseshoe_ses(ctx)
    ce = build_ce_triple(ses)
    for name in ("A", "B", "C"):
        for row in ce.doubles[name].rows:
            for q in row.degrees():
                if q < 0:
                    assert ctx.is_zero_obj(row.obj(q))
