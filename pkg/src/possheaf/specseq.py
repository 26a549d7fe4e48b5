"""Double complexes, exact couples and spectral sequence pages.

Everything here is plain linear algebra over an exact field (the engine runs
after global sections have been applied).  Pages are stored as explicit
subquotient witnesses: E_r^{p,q} is a pair of nested subspaces of the fixed
E_1^{p,q} coordinate space (the entry R^{p,q}), with differentials as
matrices in canonical representative bases, so every page identity is a
checkable matrix statement.

Conventions: squares of the double complex commute; the total differential
carries the sign (-1)^p on the vertical part.  The filtration is by column
degree p.  E_1^{p,q} is the vertical cohomology of column p, A_1^{p,q} the
total cohomology of the filtration piece F^p.
"""

from __future__ import annotations

from .exactla import Matrix, NoSolution, Subspace, hstack, kernel_basis, quotient_basis, rank, solve


class SquareNotCommuting(Exception):
    pass


class ExactnessLost(Exception):
    """A derived couple failed its exactness check (engine bug signal)."""


class NotACoupleMorphism(Exception):
    pass


class DoubleComplex:
    """First-quadrant grid 0 <= p, q <= D with commuting squares."""

    def __init__(self, field, size, dims, horiz, vert, validate=True):
        self.field = field
        self.size = size            # grid bound D; indices run 0..D
        self.dims = dims            # dims[p][q]
        self.horiz = horiz          # horiz[p][q]: R^{p,q} -> R^{p+1,q} (or None)
        self.vert = vert            # vert[p][q]: R^{p,q} -> R^{p,q+1} (or None)
        if validate:
            self.validate()

    def dim(self, p, q):
        if 0 <= p <= self.size and 0 <= q <= self.size:
            return self.dims[p][q]
        return 0

    def h(self, p, q) -> Matrix:
        m = None
        if 0 <= p < self.size and 0 <= q <= self.size:
            m = self.horiz[p][q]
        return m if m is not None else Matrix.zeros(self.field, self.dim(p + 1, q), self.dim(p, q))

    def v(self, p, q) -> Matrix:
        m = None
        if 0 <= p <= self.size and 0 <= q < self.size:
            m = self.vert[p][q]
        return m if m is not None else Matrix.zeros(self.field, self.dim(p, q + 1), self.dim(p, q))

    def validate(self):
        D = self.size
        for p in range(D + 1):
            for q in range(D + 1):
                if self.h(p, q).cols != self.dim(p, q) or self.h(p, q).rows != self.dim(p + 1, q):
                    raise ValueError("horizontal map shape at (%d,%d)" % (p, q))
                if self.v(p, q).cols != self.dim(p, q) or self.v(p, q).rows != self.dim(p, q + 1):
                    raise ValueError("vertical map shape at (%d,%d)" % (p, q))
                if not (self.h(p + 1, q) * self.h(p, q)).is_zero():
                    raise ValueError("d_h^2 != 0 at (%d,%d)" % (p, q))
                if not (self.v(p, q + 1) * self.v(p, q)).is_zero():
                    raise ValueError("d_v^2 != 0 at (%d,%d)" % (p, q))
                if not (self.v(p + 1, q) * self.h(p, q) == self.h(p, q + 1) * self.v(p, q)):
                    raise SquareNotCommuting("square at (%d,%d) does not commute" % (p, q))

    def transpose(self) -> "DoubleComplex":
        D = self.size
        dims = [[self.dim(q, p) for q in range(D + 1)] for p in range(D + 1)]
        horiz = [[self.v(q, p) for q in range(D + 1)] for p in range(D + 1)]
        vert = [[self.h(q, p) for q in range(D + 1)] for p in range(D + 1)]
        return DoubleComplex(self.field, D, dims, horiz, vert)


class Subquotient:
    """Z/B inside a fixed coordinate space, with canonical representatives."""

    def __init__(self, field, ambient_dim, Z: Subspace, B: Subspace):
        if not Z.contains(B):
            raise ValueError("B not contained in Z")
        self.field = field
        self.ambient_dim = ambient_dim
        self.Z = Z
        self.B = B
        self.reps, self.proj = quotient_basis(Z, B)
        self.dim = self.reps.cols

    @classmethod
    def zero(cls, field, ambient_dim=0):
        z = Subspace.zero(field, ambient_dim)
        return cls(field, ambient_dim, z, z)

    def project(self, vecs: Matrix) -> Matrix:
        """Coordinates of ambient vectors (must lie in Z) in the rep basis."""
        if vecs.cols and not self.Z.contains_matrix(vecs):
            raise NoSolution("vector not in the cocycle witness space")
        return self.proj * vecs

    def induced_map(self, other: "Subquotient", ambient_map: Matrix) -> Matrix:
        """Matrix of the induced map when ambient_map respects the witnesses."""
        if self.Z.dim and not other.Z.contains_matrix(ambient_map * self.Z.basis):
            raise NoSolution("induced map does not preserve cocycle witnesses")
        if self.B.dim and not other.B.contains_matrix(ambient_map * self.B.basis):
            raise NoSolution("induced map does not preserve boundary witnesses")
        return other.proj * (ambient_map * self.reps)


class _Filtered:
    """Coordinate data of one filtration level F^p of the total complex."""

    __slots__ = ("positions", "dim", "diff")

    def __init__(self, positions, dim, diff):
        self.positions = positions  # per n: global Tot^n coordinate indices
        self.dim = dim              # per n: dimension
        self.diff = diff            # per n: matrix F^p Tot^n -> F^p Tot^{n+1}


class CoupleTower:
    """Level-one exact couple of the column filtration, plus derived stages."""

    def __init__(self, dc: DoubleComplex):
        self.dc = dc
        self.field = dc.field
        D = dc.size
        self.D = D
        self.nmax = 2 * D
        self.cells = {}
        self.offsets = {}
        self.tot_dim = {}
        for n in range(self.nmax + 2):
            cells = [(p, n - p) for p in range(max(0, n - D), min(n, D) + 1)]
            self.cells[n] = cells
            off = 0
            for (p, q) in cells:
                self.offsets[(n, p, q)] = off
                off += dc.dim(p, q)
            self.tot_dim[n] = off
        self.tot_diff = {n: self._total_diff(n) for n in range(self.nmax + 1)}
        self.filt = []
        for p in range(D + 2):
            positions, dimn, diffs = {}, {}, {}
            for n in range(self.nmax + 2):
                pos = []
                for (pp, qq) in self.cells[n]:
                    if pp >= p:
                        base = self.offsets[(n, pp, qq)]
                        pos.extend(range(base, base + dc.dim(pp, qq)))
                positions[n] = pos
                dimn[n] = len(pos)
            for n in range(self.nmax + 1):
                diffs[n] = self.tot_diff[n].rows_slice(positions[n + 1]).cols_slice(positions[n])
            self.filt.append(_Filtered(positions, dimn, diffs))
        self.A1 = {}
        self.E1 = {}
        for p in range(D + 2):
            for n in range(self.nmax + 1):
                self.A1[(p, n - p)] = self._h_of_filtration(p, n)
        for p in range(D + 1):
            for q in range(D + 1):
                zv = kernel_basis(dc.v(p, q))
                bv = Subspace.from_columns(dc.v(p, q - 1)) if q > 0 else \
                    Subspace.zero(self.field, dc.dim(p, q))
                self.E1[(p, q)] = Subquotient(self.field, dc.dim(p, q), zv, bv)
        self.couples = [ExactCouple(self, 1, dict(self.A1), dict(self.E1))]

    def _total_diff(self, n) -> Matrix:
        dc = self.dc
        rows = self.tot_dim.get(n + 1, 0)
        out = Matrix.zeros(self.field, rows, self.tot_dim[n]).data
        nxt = set(self.cells.get(n + 1, []))
        for (p, q) in self.cells[n]:
            coff = self.offsets[(n, p, q)]
            if (p + 1, q) in nxt:
                h = dc.h(p, q)
                roff = self.offsets[(n + 1, p + 1, q)]
                for r in range(h.rows):
                    for c in range(h.cols):
                        out[roff + r][coff + c] = h.data[r][c]
            if (p, q + 1) in nxt:
                v = dc.v(p, q)
                roff = self.offsets[(n + 1, p, q + 1)]
                sign = self.field.one() if p % 2 == 0 else -self.field.one()
                for r in range(v.rows):
                    for c in range(v.cols):
                        out[roff + r][coff + c] = sign * v.data[r][c]
        return Matrix(self.field, rows, self.tot_dim[n], out)

    def _h_of_filtration(self, p, n) -> Subquotient:
        f = self.filt[p]
        d_out = f.diff.get(n)
        if d_out is None:
            d_out = Matrix.zeros(self.field, 0, f.dim.get(n, 0))
        Z = kernel_basis(d_out)
        if n - 1 in f.diff:
            B = Subspace.from_columns(f.diff[n - 1])
        else:
            B = Subspace.zero(self.field, f.dim.get(n, 0))
        return Subquotient(self.field, f.dim.get(n, 0), Z, B)

    def filt_dim(self, p, n):
        p = min(max(p, 0), self.D + 1)
        return self.filt[p].dim.get(n, 0)

    def clamp(self, p):
        return min(max(p, 0), self.D + 1)

    def inclusion_matrix(self, p_from, p_to, n) -> Matrix:
        """Coordinate inclusion F^{p_from} -> F^{p_to} at degree n, p_from >= p_to."""
        src = self.filt[self.clamp(p_from)].positions.get(n, [])
        tgt = self.filt[self.clamp(p_to)].positions.get(n, [])
        tpos = {g: i for i, g in enumerate(tgt)}
        out = Matrix.zeros(self.field, len(tgt), len(src)).data
        for c, g in enumerate(src):
            out[tpos[g]][c] = self.field.one()
        return Matrix(self.field, len(tgt), len(src), out)

    def column_inclusion(self, p, q) -> Matrix:
        """Coordinates of the cell (p,q) inside F^p at degree n = p + q."""
        n = p + q
        pos = self.filt[self.clamp(p)].positions.get(n, [])
        base = self.offsets.get((n, p, q), 0)
        dim = self.dc.dim(p, q)
        ppos = {g: i for i, g in enumerate(pos)}
        out = Matrix.zeros(self.field, len(pos), dim).data
        for c in range(dim):
            out[ppos[base + c]][c] = self.field.one()
        return Matrix(self.field, len(pos), dim, out)

    def column_projection(self, p, q) -> Matrix:
        return self.column_inclusion(p, q).transpose()

    def page(self, r) -> "ExactCouple":
        while len(self.couples) < r:
            self.couples.append(self.couples[-1].derive())
        return self.couples[r - 1]

    def r_infinity(self):
        return self.D + 2


class ExactCouple:
    """One stage: bigraded A, E with maps i, j, k exact in a triangle.

    Maps at level r: i: A^{p,q} -> A^{p-1,q+1}; j: A^{p,q} -> E^{p+r-1,q-r+1};
    k: E^{p,q} -> A^{p+1,q}.  The E-differential is d = j.k.
    """

    def __init__(self, tower: CoupleTower, level: int, A, E):
        self.tower = tower
        self.level = level
        self.A = A
        self.E = E

    def a_sq(self, p, q) -> Subquotient:
        sq = self.A.get((p, q))
        if sq is None:
            sq = Subquotient.zero(self.tower.field, self.tower.filt_dim(p, p + q))
        return sq

    def e_sq(self, p, q) -> Subquotient:
        sq = self.E.get((p, q))
        if sq is None:
            sq = Subquotient.zero(self.tower.field, self.tower.dc.dim(p, q)
                                  if 0 <= p <= self.tower.D and 0 <= q <= self.tower.D else 0)
        return sq

    def i_map(self, p, q) -> Matrix:
        t = self.tower
        src, tgt = self.a_sq(p, q), self.a_sq(p - 1, q + 1)
        if src.dim == 0 or tgt.dim == 0:
            return Matrix.zeros(t.field, tgt.dim, src.dim)
        incl = t.inclusion_matrix(p, p - 1, p + q)
        return src.induced_map(tgt, incl)

    def j_map(self, p, q) -> Matrix:
        t, r = self.tower, self.level
        src = self.a_sq(p, q)
        p2, q2 = p + r - 1, q - r + 1
        tgt = self.e_sq(p2, q2)
        if src.dim == 0 or tgt.dim == 0:
            return Matrix.zeros(t.field, tgt.dim, src.dim)
        n = p + q
        z1 = t.A1.get((p2, q2))
        if z1 is None or z1.Z.dim == 0:
            return Matrix.zeros(t.field, tgt.dim, src.dim)
        incl = t.inclusion_matrix(p2, p, n)
        base1 = t.A1[(p, q)]
        frame = (hstack([incl * z1.Z.basis, base1.B.basis]) if base1.B.dim
                 else incl * z1.Z.basis)
        sol = solve(frame, src.reps)
        a = z1.Z.basis * sol.rows_slice(range(z1.Z.dim))
        return tgt.project(t.column_projection(p2, q2) * a)

    def k_map(self, p, q) -> Matrix:
        t = self.tower
        src, tgt = self.e_sq(p, q), self.a_sq(p + 1, q)
        if src.dim == 0 or tgt.dim == 0:
            return Matrix.zeros(t.field, tgt.dim, src.dim)
        n = p + q
        colinc = t.column_inclusion(p, q)
        dF = t.filt[t.clamp(p)].diff[n]
        incl_back = t.inclusion_matrix(p + 1, p, n + 1)
        dx = dF * (colinc * src.reps)               # lies in the F^{p+1} block
        return tgt.project(solve(incl_back, dx))

    def d_map(self, p, q) -> Matrix:
        """d_r = j . k, of bidegree (r, 1-r)."""
        return self.j_map(p + 1, q) * self.k_map(p, q)

    def derive(self) -> "ExactCouple":
        t, r = self.tower, self.level
        newA, newE = {}, {}
        for (p, q), sq in self.A.items():
            if sq.ambient_dim == 0:
                newA[(p, q)] = sq
                continue
            src = self.a_sq(p + 1, q - 1)
            if src.dim:
                incl = t.inclusion_matrix(p + 1, p, p + q)
                Z = sq.B.sum(Subspace.from_columns(incl * src.reps))
            else:
                Z = sq.B
            newA[(p, q)] = Subquotient(t.field, sq.ambient_dim, Z, sq.B)
        for (p, q), sq in self.E.items():
            if sq.ambient_dim == 0:
                newE[(p, q)] = sq
                continue
            dout = self.d_map(p, q)
            din = self.d_map(p - r, q + r - 1)
            if sq.dim:
                kerd = kernel_basis(dout)
                Z = sq.B.sum(Subspace.from_columns(sq.reps * kerd.basis))
                B = sq.B.sum(Subspace.from_columns(sq.reps * din)) if din.cols else sq.B
            else:
                Z, B = sq.Z, sq.B
            if not Z.contains(B):
                raise ExactnessLost("derived boundaries escape cocycles at (%d,%d)" % (p, q))
            newE[(p, q)] = Subquotient(t.field, sq.ambient_dim, Z, B)
        return ExactCouple(t, r + 1, newA, newE)

    def check_exact(self) -> bool:
        """Triangle exactness at every populated node."""
        r = self.level
        for (p, q) in self.E:
            # at E^{p,q}: im(j from A^{p-r+1,q+r-1}) = ker(k to A^{p+1,q})
            jm = self.j_map(p - r + 1, q + r - 1)
            km = self.k_map(p, q)
            if not _exact_pair(jm, km, self.e_sq(p, q).dim):
                return False
        for (p, q) in self.A:
            # at A^{p,q}: im(i from A^{p+1,q-1}) = ker(j)
            im = self.i_map(p + 1, q - 1)
            jm = self.j_map(p, q)
            if not _exact_pair(im, jm, self.a_sq(p, q).dim):
                return False
            # at A^{p,q}: im(k from E^{p-1,q}) = ker(i to A^{p-1,q+1})
            km = self.k_map(p - 1, q)
            im2 = self.i_map(p, q)
            if not _exact_pair(km, im2, self.a_sq(p, q).dim):
                return False
        return True


def _exact_pair(f: Matrix, g: Matrix, mid: int) -> bool:
    if f.rows != mid or g.cols != mid:
        return False
    if not (g * f).is_zero():
        return False
    return rank(f) + rank(g) == mid


class SpectralSequence:
    """Pages, differentials, the limit and the filtration on total cohomology."""

    def __init__(self, dc: DoubleComplex):
        self.dc = dc
        self.tower = CoupleTower(dc)
        self.field = dc.field
        self.r_inf = self.tower.r_infinity()
        self.tower.page(self.r_inf)
        self._filtration = None
        self._graded_isos = None

    # -- page access ---------------------------------------------------------

    def page_dims(self, r):
        D = self.tower.D
        couple = self.tower.page(r)
        return {(p, q): couple.e_sq(p, q).dim
                for p in range(D + 1) for q in range(D + 1)
                if couple.e_sq(p, q).dim}

    def entry(self, r, p, q) -> Subquotient:
        return self.tower.page(r).e_sq(p, q)

    def differential(self, r, p, q) -> Matrix:
        return self.tower.page(r).d_map(p, q)

    def total_h_dim(self, n) -> int:
        return self.tower.A1[(0, n)].dim if (0, n) in self.tower.A1 else 0

    # -- filtration and convergence -------------------------------------------

    def filtration(self):
        """filt[n][p]: subspace of H^n(Tot) coords hit by H^n(F^p)."""
        if self._filtration is not None:
            return self._filtration
        t = self.tower
        out = {}
        for n in range(t.nmax + 1):
            h = t.A1[(0, n)]
            levels = []
            for p in range(t.D + 2):
                ap = t.A1.get((p, n - p))
                if ap is None or ap.Z.dim == 0:
                    levels.append(Subspace.zero(self.field, h.dim))
                    continue
                incl = t.inclusion_matrix(p, 0, n)
                levels.append(Subspace.from_columns(h.project(incl * ap.Z.basis)))
            out[n] = levels
        self._filtration = out
        return out

    def graded_iso(self, p, q) -> Matrix:
        """The stored isomorphism E_inf^{p,q} -> F^p H^{p+q} / F^{p+1} H^{p+q}."""
        if self._graded_isos is None:
            self._graded_isos = {}
        key = (p, q)
        if key in self._graded_isos:
            return self._graded_isos[key]
        t = self.tower
        n = p + q
        einf = self.entry(self.r_inf, p, q)
        h = t.A1[(0, n)]
        filt = self.filtration()[n]
        grad = Subquotient(self.field, h.dim, filt[p], filt[p + 1])
        if einf.dim == 0:
            mat = Matrix.zeros(self.field, grad.dim, 0)
            self._graded_isos[key] = mat
            return mat
        colinc = t.column_inclusion(p, q)
        fp1 = t.filt[t.clamp(p + 1)]
        dnext = fp1.diff[n] if n in fp1.diff else Matrix.zeros(self.field, 0, fp1.dim.get(n, 0))
        incl_p1_p = t.inclusion_matrix(p + 1, p, n)
        incl_p_0 = t.inclusion_matrix(p, 0, n)
        incl_p1_p_next = t.inclusion_matrix(p + 1, p, n + 1)
        dF = t.filt[t.clamp(p)].diff[n]
        x = colinc * einf.reps
        dx_in_p1 = solve(incl_p1_p_next, dF * x)   # D x lands in F^{p+1}
        s = solve(dnext, dx_in_p1)                 # s in F^{p+1} with D s = D x
        vec = incl_p_0 * (x - incl_p1_p * s)
        mat = grad.project(h.project(vec))
        self._graded_isos[key] = mat
        return mat

    def convergence_ok(self) -> bool:
        """Sum of limit-page dimensions equals total cohomology, via stored isos."""
        t = self.tower
        for n in range(t.nmax + 1):
            total = self.total_h_dim(n)
            s = 0
            for p in range(t.D + 1):
                q = n - p
                if 0 <= q <= t.D:
                    e = self.entry(self.r_inf, p, q)
                    s += e.dim
                    iso = self.graded_iso(p, q)
                    if rank(iso) != e.dim:
                        return False
            if s != total:
                return False
        return True

    def stabilization_ok(self) -> bool:
        """E_r^{p,q} constant for r > max(p, q+1) + 1."""
        for p in range(self.tower.D + 1):
            for q in range(self.tower.D + 1):
                start = max(p, q + 1) + 2
                dims = {r: self.entry(r, p, q).dim
                        for r in range(min(start, self.r_inf), self.r_inf + 1)}
                if len(set(dims.values())) > 1:
                    return False
        return True

    def page_table(self, r):
        """Sorted (p, q, dim) rows for reporting."""
        dims = self.page_dims(r)
        return sorted((p, q, d) for (p, q), d in dims.items())


def total_complex(dc: DoubleComplex):
    """The total complex as a plain cochain complex of vector spaces."""
    from .homalg import CochainComplex
    from .sheafcat import VectorContext

    tower = CoupleTower(dc)
    objs = {n: tower.tot_dim[n] for n in range(tower.nmax + 1)}
    diffs = {n: tower.tot_diff[n] for n in range(tower.nmax)}
    return CochainComplex(VectorContext(dc.field), objs, diffs)


def cohomology_of_total(dc: DoubleComplex, n: int) -> int:
    """dim H^n of the total complex."""
    tower = CoupleTower(dc)
    sq = tower.A1.get((0, n))
    return sq.dim if sq is not None else 0


def pages_from_filtration(dc: DoubleComplex, mode: str = "p") -> SpectralSequence:
    """Spectral sequence of the column (by-p) or row (by-q) filtration.

    The by-q branch runs the same engine on the transposed grid, so its
    E_r^{p,q} has p counting the other direction's cohomology.
    """
    if mode == "p":
        return SpectralSequence(dc)
    if mode == "q":
        return SpectralSequence(dc.transpose())
    raise ValueError("mode must be 'p' or 'q'")


class CoupleMorphism:
    """Morphism of exact couples of a fixed bidegree, with recorded signs.

    Holds level-one maps on A and E (matrices in representative bases); the
    intertwining relations with i, j, k are required to hold up to one
    global sign each, which is recorded, never assumed.
    """

    def __init__(self, src: SpectralSequence, dst: SpectralSequence, bidegree,
                 a_maps, e_maps, check=True):
        self.src = src
        self.dst = dst
        self.bidegree = tuple(bidegree)
        self.a_maps = a_maps     # (p,q) -> Matrix A1-src reps -> A1-dst reps
        self.e_maps = e_maps     # (p,q) -> Matrix E1-src reps -> E1-dst reps
        self.signs = {}
        if check:
            self.verify_intertwining()

    def a_map(self, p, q) -> Matrix:
        m = self.a_maps.get((p, q))
        if m is None:
            dp, dq = self.bidegree
            m = Matrix.zeros(self.src.field,
                             self.dst.tower.page(1).a_sq(p + dp, q + dq).dim,
                             self.src.tower.page(1).a_sq(p, q).dim)
        return m

    def e_map(self, p, q) -> Matrix:
        m = self.e_maps.get((p, q))
        if m is None:
            dp, dq = self.bidegree
            m = Matrix.zeros(self.src.field,
                             self.dst.tower.page(1).e_sq(p + dp, q + dq).dim,
                             self.src.tower.page(1).e_sq(p, q).dim)
        return m

    def _find_sign(self, pairs, name):
        """One global sign making lhs = sign * rhs across all bidegrees."""
        sign = None
        for lhs, rhs in pairs:
            if lhs.is_zero() and rhs.is_zero():
                continue
            if lhs == rhs:
                cand = 1
            elif lhs == -rhs:
                cand = -1
            else:
                raise NotACoupleMorphism(
                    "intertwining with %s fails beyond a global sign" % name)
            if sign is None:
                sign = cand
            elif sign != cand:
                raise NotACoupleMorphism(
                    "intertwining sign with %s is not global" % name)
        return sign if sign is not None else 0

    def verify_intertwining(self):
        s1, d1 = self.src.tower.page(1), self.dst.tower.page(1)
        dp, dq = self.bidegree
        ipairs, jpairs, kpairs = [], [], []
        for (p, q) in s1.A:
            if s1.a_sq(p, q).dim == 0:
                continue
            ipairs.append((self.a_map(p - 1, q + 1) * s1.i_map(p, q),
                           d1.i_map(p + dp, q + dq) * self.a_map(p, q)))
            jpairs.append((self.e_map(p, q) * s1.j_map(p, q),
                           d1.j_map(p + dp, q + dq) * self.a_map(p, q)))
        for (p, q) in s1.E:
            if s1.e_sq(p, q).dim == 0:
                continue
            kpairs.append((self.a_map(p + 1, q) * s1.k_map(p, q),
                           d1.k_map(p + dp, q + dq) * self.e_map(p, q)))
        self.signs["i"] = self._find_sign(ipairs, "i")
        self.signs["j"] = self._find_sign(jpairs, "j")
        self.signs["k"] = self._find_sign(kpairs, "k")

    def page_map(self, r, p, q) -> Matrix:
        """Induced map E_r^{p,q}(src) -> E_r^{p+dp,q+dq}(dst)."""
        dp, dq = self.bidegree
        es = self.src.entry(r, p, q)
        ed = self.dst.entry(r, p + dp, q + dq)
        e1s = self.src.entry(1, p, q)
        e1d = self.dst.entry(1, p + dp, q + dq)
        if es.dim == 0 or ed.ambient_dim == 0:
            return Matrix.zeros(self.src.field, ed.dim, es.dim)
        m1 = self.e_map(p, q)
        w = e1d.reps * (m1 * e1s.project(es.reps))   # representatives; B_1 <= Z_r
        if not ed.Z.contains_matrix(w):
            raise NotACoupleMorphism(
                "page %d map misses the page witnesses at (%d,%d)" % (r, p, q))
        out = ed.project(w)
        # boundary witnesses must be respected as well
        if es.B.dim:
            wb = e1d.reps * (m1 * e1s.project(es.B.basis))
            if not ed.B.contains_matrix(wb):
                raise NotACoupleMorphism(
                    "page %d map breaks boundary witnesses at (%d,%d)" % (r, p, q))
        return out

    def induced_next_page(self, r, p, q) -> Matrix:
        """Transport the page-r map to page r+1 through the subquotients."""
        dp, dq = self.bidegree
        es, es1 = self.src.entry(r + 1, p, q), self.src.entry(r, p, q)
        ed, ed1 = self.dst.entry(r + 1, p + dp, q + dq), self.dst.entry(r, p + dp, q + dq)
        if es.dim == 0 or ed.dim == 0:
            return Matrix.zeros(self.src.field, ed.dim, es.dim)
        mr = self.page_map(r, p, q)
        w = ed1.reps * (mr * es1.project(es.reps))   # B_r(dst) <= Z_{r+1}(dst)
        if not ed.Z.contains_matrix(w):
            raise NotACoupleMorphism(
                "page %d map does not induce one at stage %d" % (r, r + 1))
        return ed.project(w)


def map_of_spectral_sequences(src: SpectralSequence, dst: SpectralSequence,
                              entry_maps, bidegree=(0, 0)) -> CoupleMorphism:
    """Couple morphism induced by entrywise maps R^{p,q} -> R'^{p+dp,q+dq}.

    The entry maps must commute with both differentials up to one global
    sign (checked); A-level maps are induced on filtration cohomology.
    """
    dp, dq = bidegree
    t_src, t_dst = src.tower, dst.tower
    field = src.field

    def entry(p, q):
        m = entry_maps.get((p, q))
        if m is None:
            m = Matrix.zeros(field, dst.dc.dim(p + dp, q + dq), src.dc.dim(p, q))
        return m

    a_maps, e_maps = {}, {}
    for (p, q), asq in t_src.A1.items():
        n = p + q
        tgt = t_dst.A1.get((p + dp, q + dq))
        if tgt is None or asq.dim == 0:
            continue
        big = _filtered_block_map(t_src, t_dst, entry, p, n, dp, dq)
        a_maps[(p, q)] = asq.induced_map(tgt, big)
    for (p, q), esq in t_src.E1.items():
        tgt = t_dst.E1.get((p + dp, q + dq))
        if tgt is None or esq.dim == 0:
            continue
        e_maps[(p, q)] = esq.induced_map(tgt, entry(p, q))
    return CoupleMorphism(src, dst, bidegree, a_maps, e_maps)


def _filtered_block_map(t_src, t_dst, entry, p, n, dp, dq):
    """Entrywise maps assembled on F^p Tot^n -> F^{p+dp} Tot^{n+dq} coordinates."""
    field = t_src.field
    src_pos = t_src.filt[t_src.clamp(p)].positions.get(n, [])
    tgt_pos = t_dst.filt[t_dst.clamp(p + dp)].positions.get(n + dq, [])
    tpos = {g: i for i, g in enumerate(tgt_pos)}
    out = Matrix.zeros(field, len(tgt_pos), len(src_pos)).data
    src_lookup = {}
    for (pp, qq) in t_src.cells[n]:
        base = t_src.offsets[(n, pp, qq)]
        for c in range(t_src.dc.dim(pp, qq)):
            src_lookup[base + c] = (pp, qq, c)
    for col, g in enumerate(src_pos):
        pp, qq, c = src_lookup[g]
        m = entry(pp, qq)
        if m.rows == 0:
            continue
        tbase = t_dst.offsets.get((n + dq, pp + dp, qq + dq))
        if tbase is None:
            continue
        for rr in range(m.rows):
            gi = tbase + rr
            if gi in tpos:
                out[tpos[gi]][col] = m.data[rr][c]
    return Matrix(field, len(tgt_pos), len(src_pos), out)
