import pytest

from possheaf.exactla import QQ, Matrix, rank
from possheaf.specseq import (
    CoupleTower,
    DoubleComplex,
    SquareNotCommuting,
    Subquotient,
    map_of_spectral_sequences,
    pages_from_filtration,
    SpectralSequence,
)


def empty_grid(D):
    dims = [[0] * (D + 1) for _ in range(D + 1)]
    horiz = [[None] * (D + 1) for _ in range(D + 1)]
    vert = [[None] * (D + 1) for _ in range(D + 1)]
    return dims, horiz, vert


def staircase():
    """R^{0,1} = R^{1,0} = R^{1,1} = R^{2,0} = k with identity steps."""
    dims, horiz, vert = empty_grid(2)
    one = Matrix.identity(QQ, 1)
    dims[0][1] = dims[1][0] = dims[1][1] = dims[2][0] = 1
    horiz[0][1] = one       # (0,1) -> (1,1)
    vert[1][0] = one        # (1,0) -> (1,1)
    horiz[1][0] = one       # (1,0) -> (2,0)
    return DoubleComplex(QQ, 2, dims, horiz, vert)


def one_entry():
    dims, horiz, vert = empty_grid(1)
    dims[0][0] = 1
    return DoubleComplex(QQ, 1, dims, horiz, vert)


def test_one_entry_everything_trivial():
    ss = SpectralSequence(one_entry())
    assert ss.total_h_dim(0) == 1
    assert ss.entry(1, 0, 0).dim == 1
    assert ss.entry(ss.r_inf, 0, 0).dim == 1
    assert ss.convergence_ok()


def test_noncommuting_square_rejected():
    dims, horiz, vert = empty_grid(1)
    dims[0][0] = dims[1][0] = dims[0][1] = dims[1][1] = 1
    horiz[0][0] = Matrix.identity(QQ, 1)
    vert[0][0] = Matrix.identity(QQ, 1)
    horiz[0][1] = Matrix.identity(QQ, 1)
    vert[1][0] = Matrix.from_int_rows(QQ, [[2]])
    with pytest.raises(SquareNotCommuting):
        DoubleComplex(QQ, 1, dims, horiz, vert)


def test_staircase_total_cohomology_vanishes():
    ss = SpectralSequence(staircase())
    for n in range(5):
        assert ss.total_h_dim(n) == 0


def test_staircase_pages_and_d2():
    ss = SpectralSequence(staircase())
    # E_1: columns with the vertical differential
    assert ss.entry(1, 0, 1).dim == 1
    assert ss.entry(1, 1, 0).dim == 0
    assert ss.entry(1, 1, 1).dim == 0
    assert ss.entry(1, 2, 0).dim == 1
    # E_2 equals E_1 here, and d_2 is an isomorphism killing everything
    assert ss.entry(2, 0, 1).dim == 1 and ss.entry(2, 2, 0).dim == 1
    d2 = ss.differential(2, 0, 1)
    assert d2.rows == 1 and d2.cols == 1 and rank(d2) == 1
    assert ss.entry(3, 0, 1).dim == 0
    assert ss.entry(3, 2, 0).dim == 0
    assert ss.convergence_ok()


def test_staircase_stabilizes_at_three():
    ss = SpectralSequence(staircase())
    for r in range(3, ss.r_inf + 1):
        assert ss.page_dims(r) == {}
    assert ss.stabilization_ok()


def test_couples_stay_exact():
    tower = CoupleTower(staircase())
    for r in range(1, tower.r_infinity() + 1):
        assert tower.page(r).check_exact()


def test_two_column_reproduces_les():
    # columns p = 0, 1 with a horizontal map: pages encode the two-column LES
    from possheaf.homalg import ChainMap, CochainComplex, SESOfComplexes, connecting
    from possheaf.sheafcat import VectorContext

    dims, horiz, vert = empty_grid(2)
    # column 0: k -> k^2 (injective-ish), column 1: k^2 -> k
    dims[0][0], dims[0][1] = 1, 2
    dims[1][0], dims[1][1] = 2, 1
    vert[0][0] = Matrix.from_int_rows(QQ, [[1], [0]])
    vert[1][0] = Matrix.from_int_rows(QQ, [[0, 1]])
    horiz[0][0] = Matrix.from_int_rows(QQ, [[1], [0]])
    horiz[0][1] = Matrix.from_int_rows(QQ, [[0, 1]])
    # commuting square: h(0,1) v(0,0) = v(1,0) h(0,0)
    dc = DoubleComplex(QQ, 2, dims, horiz, vert)
    ss = SpectralSequence(dc)
    assert ss.convergence_ok()
    # the d_1 differential on E_1 computes cohomology of the row maps
    tot = sum(ss.total_h_dim(n) for n in range(5))
    e2 = sum(d for (_, _), d in ss.page_dims(2).items())
    einf = sum(d for (_, _), d in ss.page_dims(ss.r_inf).items())
    assert tot == einf
    assert e2 >= einf


def test_filtration_is_decreasing_and_exhaustive():
    ss = SpectralSequence(staircase())
    filt = ss.filtration()
    for n, levels in filt.items():
        total = ss.total_h_dim(n)
        assert levels[0].dim == total
        for p in range(len(levels) - 1):
            assert levels[p].contains(levels[p + 1])
        assert levels[-1].dim == 0


def test_identity_couple_morphism():
    dc = staircase()
    ss1 = SpectralSequence(dc)
    ss2 = SpectralSequence(dc)
    entry_maps = {(p, q): Matrix.identity(QQ, dc.dim(p, q))
                  for p in range(3) for q in range(3) if dc.dim(p, q)}
    mor = map_of_spectral_sequences(ss1, ss2, entry_maps)
    assert mor.signs["i"] in (0, 1)
    assert mor.signs["j"] in (0, 1)
    assert mor.signs["k"] in (0, 1)
    for r in (1, 2, 3):
        for (p, q), d in ss1.page_dims(r).items():
            m = mor.page_map(r, p, q)
            assert m == Matrix.identity(QQ, d)


def test_zero_couple_morphism():
    dc = staircase()
    ss1 = SpectralSequence(dc)
    ss2 = SpectralSequence(dc)
    entry_maps = {(p, q): Matrix.zeros(QQ, dc.dim(p, q), dc.dim(p, q))
                  for p in range(3) for q in range(3) if dc.dim(p, q)}
    mor = map_of_spectral_sequences(ss1, ss2, entry_maps)
    for r in (1, 2):
        for (p, q), d in ss1.page_dims(r).items():
            assert mor.page_map(r, p, q).is_zero()


def test_by_q_mode_runs_on_transpose():
    ss = pages_from_filtration(staircase(), mode="q")
    assert ss.convergence_ok()
    for n in range(5):
        assert ss.total_h_dim(n) == 0


def test_total_complex_and_cohomology():
    from possheaf.homalg import cohomology
    from possheaf.specseq import cohomology_of_total, total_complex

    dc = staircase()
    tot = total_complex(dc)
    tot.validate()
    for n in range(4):
        assert cohomology_of_total(dc, n) == cohomology(tot, n).H == 0
    one = one_entry()
    assert cohomology_of_total(one, 0) == 1


def test_graded_iso_invertible_on_nontrivial_total():
    # single column: E_1 = E_inf = vertical cohomology, total H matches
    dims, horiz, vert = empty_grid(1)
    dims[0][0], dims[0][1] = 2, 1
    vert[0][0] = Matrix.from_int_rows(QQ, [[1, 0]])
    dc = DoubleComplex(QQ, 1, dims, horiz, vert)
    ss = SpectralSequence(dc)
    assert ss.total_h_dim(0) == 1 and ss.total_h_dim(1) == 0
    assert ss.entry(ss.r_inf, 0, 0).dim == 1
    iso = ss.graded_iso(0, 0)
    assert rank(iso) == 1
    assert ss.convergence_ok()
