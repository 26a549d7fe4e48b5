"""The two concrete abelian categories with enough injectives.

Plain finite-dimensional vector spaces, and sheaves of such on a finite
poset (stalk at x = sections over the minimal open U_x, so a sheaf is a
functor on <= with restriction maps F_x -> F_y for x <= y).  Both are
wrapped in one context interface: kernels, cokernels, images, direct sums,
injective embeddings and the extension property along monomorphisms.

Injective sheaves are only ever represented as formal sums of coinduced
summands [x]_V (stalk V at every y <= x, identity restrictions); the
correspondence Hom(F, [x]_V) = Hom(F_x, V) drives every extension step.
"""

from __future__ import annotations

import random

from . import homalg
from .exactla import (
    Matrix,
    NoSolution,
    Subspace,
    block_diag,
    hstack,
    image_basis,
    kernel_basis,
    quotient_basis,
    rank,
    solve,
    vstack,
)
from .poset import MonotoneMap, Poset


class IllFormedMorphism(Exception):
    pass


class NotMono(Exception):
    pass


class NotCoinduced(Exception):
    pass


class NotOpen(Exception):
    pass


def _complement_of_image(m: Matrix, flip: bool) -> Matrix:
    """Basis of a complement of im(m), chosen by the pivot rule.

    With flip=True the rule runs on reversed coordinates, giving a second
    deterministic (and generally different) choice.
    """
    n = m.rows
    if not flip:
        return image_basis(m).complement().basis
    rev = Matrix.identity(m.field, n).cols_slice(list(range(n - 1, -1, -1)))
    comp = image_basis(rev * m).complement().basis
    return rev * comp


def _extend_matrix(m: Matrix, f: Matrix, flip: bool) -> Matrix:
    """g with g*m = f and g = 0 on the chosen complement of im(m)."""
    comp = _complement_of_image(m, flip)
    frame = hstack([m, comp])
    zero = Matrix.zeros(f.field, f.rows, comp.cols)
    target = hstack([f, zero])
    return solve(frame.transpose(), target.transpose()).transpose()


class VectorContext:
    """Finite-dimensional vector spaces; objects are dimensions, maps matrices."""

    LiftError = NoSolution

    def __init__(self, field, flip=False):
        self.field = field
        self.flip = flip

    # objects -----------------------------------------------------------
    def zero_obj(self):
        return 0

    def is_zero_obj(self, X):
        return X == 0

    def obj_dim(self, X):
        return X

    # maps ---------------------------------------------------------------
    def identity(self, X):
        return Matrix.identity(self.field, X)

    def zero_map(self, X, Y):
        return Matrix.zeros(self.field, Y, X)

    def compose(self, f, g):
        return f * g

    def add(self, f, g):
        return f + g

    def sub(self, f, g):
        return f - g

    def neg(self, f):
        return -f

    def map_eq(self, f, g):
        return f == g

    def is_zero_map(self, f):
        return f.is_zero()

    def check_map(self, f, X, Y):
        if f.cols != X or f.rows != Y:
            raise IllFormedMorphism("expected %dx%d map, got %dx%d" % (Y, X, f.rows, f.cols))

    def map_source_obj(self, f):
        return f.cols

    def map_target_obj(self, f):
        return f.rows

    # abelian structure ---------------------------------------------------
    def kernel(self, f):
        ker = kernel_basis(f)
        return ker.dim, ker.basis

    def cokernel(self, f):
        img = image_basis(f)
        reps, proj = quotient_basis(Subspace.full(self.field, f.rows), img)
        return reps.cols, proj

    def image(self, f):
        img = image_basis(f)
        if img.dim == 0:
            return 0, Matrix.zeros(self.field, f.rows, 0), Matrix.zeros(self.field, 0, f.cols)
        return img.dim, img.basis, solve(img.basis, f)

    def is_mono(self, f):
        return rank(f) == f.cols

    def is_epi(self, f):
        return rank(f) == f.rows

    def lift_through_mono(self, f, m):
        return solve(m, f)

    def descend_along_epi(self, e, f):
        g = solve(e.transpose(), f.transpose()).transpose()
        if not (g * e == f):
            raise NoSolution("map does not descend along the epimorphism")
        return g

    def direct_sum(self, Xs):
        total = sum(Xs)
        injs, projs = [], []
        off = 0
        ident = Matrix.identity(self.field, total)
        for n in Xs:
            idx = list(range(off, off + n))
            injs.append(ident.cols_slice(idx))
            projs.append(ident.rows_slice(idx))
            off += n
        return total, injs, projs

    def injective_embed(self, X):
        return X, Matrix.identity(self.field, X)

    def extend_along_mono(self, m, f):
        if not self.is_mono(m):
            raise NotMono("extension base is not a monomorphism")
        return _extend_matrix(m, f, self.flip)

    def is_exact_pair(self, f, g, mid):
        if not (g * f).is_zero():
            return False
        return rank(f) + rank(g) == mid

    def is_injective_object(self, X):
        return True

    def resolution_bound(self):
        return 2


class Sheaf:
    """Sheaf of finite-dimensional vector spaces on a finite poset."""

    def __init__(self, poset: Poset, field, dims, rho, validate=True):
        self.poset = poset
        self.field = field
        self.dims = list(dims)
        if len(self.dims) != len(poset):
            raise ValueError("stalk dimension list does not match the poset")
        self.rho = dict(rho)  # (i, j) cover index pair -> Matrix dims[j] x dims[i]
        for (i, j) in poset.covers:
            m = self.rho.get((i, j))
            if m is None:
                if self.dims[i] == 0 or self.dims[j] == 0:
                    self.rho[(i, j)] = Matrix.zeros(field, self.dims[j], self.dims[i])
                else:
                    raise ValueError("missing restriction for cover %s<%s"
                                     % (poset.elements[i], poset.elements[j]))
        self.offsets = []
        off = 0
        for d in self.dims:
            self.offsets.append(off)
            off += d
        self.total_dim = off
        self._full = None
        if validate:
            self.validate()

    def validate(self):
        for (i, j), m in self.rho.items():
            if m.rows != self.dims[j] or m.cols != self.dims[i]:
                raise ValueError("restriction %s<%s has wrong shape"
                                 % (self.poset.elements[i], self.poset.elements[j]))
        self._build_full()

    def _build_full(self):
        """Compose restrictions along covers; checks path-independence."""
        if self._full is not None:
            return
        p = self.poset
        pos = {e: k for k, e in enumerate(p.linear_extension())}
        full = {}
        for i in range(len(p)):
            fi = {i: Matrix.identity(self.field, self.dims[i])}
            for j in sorted(p.up[i], key=lambda t: pos[t]):
                if j == i:
                    continue
                cands = []
                for (k, jj) in p.covers:
                    if jj == j and k in fi:
                        cands.append(self.rho[(k, j)] * fi[k])
                first = cands[0]
                for other in cands[1:]:
                    if not (other == first):
                        raise ValueError(
                            "restriction maps are path dependent from %s to %s"
                            % (p.elements[i], p.elements[j]))
                fi[j] = first
            full[i] = fi
        self._full = full

    def restriction(self, i, j) -> Matrix:
        """The composite restriction F_i -> F_j for i <= j."""
        self._build_full()
        return self._full[i][j]

    def is_zero(self):
        return self.total_dim == 0

    def stalk_slice(self, i):
        return range(self.offsets[i], self.offsets[i] + self.dims[i])

    def __repr__(self):
        return "Sheaf(dims=%s)" % (self.dims,)


class InjectiveSheaf(Sheaf):
    """Realized formal sum of coinduced summands [x]_V."""

    def __init__(self, poset: Poset, field, summands):
        self.summands = [(poset_idx, mult) for (poset_idx, mult) in summands]
        n = len(poset)
        present = [[] for _ in range(n)]
        for j, (x, v) in enumerate(self.summands):
            if v <= 0:
                raise ValueError("coinduced summand multiplicity must be >= 1")
            for y in poset.down[x]:
                present[y].append(j)
        dims = [sum(self.summands[j][1] for j in present[y]) for y in range(n)]
        slot = [dict() for _ in range(n)]
        for y in range(n):
            off = 0
            for j in present[y]:
                slot[y][j] = off
                off += self.summands[j][1]
        rho = {}
        for (i, j) in poset.covers:
            m = Matrix.zeros(field, dims[j], dims[i]).data
            for s in present[j]:
                v = self.summands[s][1]
                r0, c0 = slot[j][s], slot[i][s]
                for t in range(v):
                    m[r0 + t][c0 + t] = field.one()
            rho[(i, j)] = Matrix(field, dims[j], dims[i], m)
        self.present = present
        self.slot = slot
        self.mult_total = sum(v for (_, v) in self.summands)
        super().__init__(poset, field, dims, rho, validate=False)
        self._build_full()

    def peak_rows(self, j):
        """Row indices (in total coordinates) of summand j at its peak point."""
        x, v = self.summands[j]
        off = self.offsets[x] + self.slot[x][j]
        return list(range(off, off + v))

    def __repr__(self):
        return "InjectiveSheaf(%s)" % [
            ("%s" % self.poset.elements[x], v) for (x, v) in self.summands
        ]


class SheafMorphism:
    """Stalk-wise linear maps commuting with all restriction maps."""

    def __init__(self, source: Sheaf, target: Sheaf, comps, validate=True):
        self.source = source
        self.target = target
        self.comps = list(comps)
        if validate:
            self.validate()

    def comp(self, i) -> Matrix:
        return self.comps[i]

    def validate(self):
        src, tgt = self.source, self.target
        if src.poset is not tgt.poset:
            raise IllFormedMorphism("source and target live on different posets")
        if len(self.comps) != len(src.poset):
            raise IllFormedMorphism("wrong number of components")
        for i, m in enumerate(self.comps):
            if m.rows != tgt.dims[i] or m.cols != src.dims[i]:
                raise IllFormedMorphism("component at %s has wrong shape"
                                        % src.poset.elements[i])
        for (i, j) in src.poset.covers:
            lhs = self.comps[j] * src.rho[(i, j)]
            rhs = tgt.rho[(i, j)] * self.comps[i]
            if not (lhs == rhs):
                raise IllFormedMorphism("component square at cover %s<%s does not commute"
                                        % (src.poset.elements[i], src.poset.elements[j]))

    def is_zero(self):
        return all(m.is_zero() for m in self.comps)

    def __eq__(self, other):
        return (
            isinstance(other, SheafMorphism)
            and self.source.dims == other.source.dims
            and self.target.dims == other.target.dims
            and all(a == b for a, b in zip(self.comps, other.comps))
        )

    def as_block_matrix(self) -> Matrix:
        """The morphism on total coordinates (block diagonal over elements)."""
        return block_diag(self.source.field, self.comps)

    def __repr__(self):
        return "SheafMorphism(%s -> %s)" % (self.source.dims, self.target.dims)


class SheafContext:
    """Sheaves on a fixed finite poset as an abelian category."""

    LiftError = NoSolution

    def __init__(self, poset: Poset, field, flip=False):
        self.poset = poset
        self.field = field
        self.flip = flip
        self._zero = InjectiveSheaf(poset, field, [])

    # objects -----------------------------------------------------------
    def zero_obj(self):
        return self._zero

    def is_zero_obj(self, X):
        return X.total_dim == 0

    def obj_dim(self, X):
        return X.total_dim

    def constant_sheaf(self, dim=1):
        ident = Matrix.identity(self.field, dim)
        rho = {(i, j): ident for (i, j) in self.poset.covers}
        return Sheaf(self.poset, self.field, [dim] * len(self.poset), rho)

    # maps ---------------------------------------------------------------
    def identity(self, X):
        return SheafMorphism(X, X, [Matrix.identity(self.field, d) for d in X.dims],
                             validate=False)

    def zero_map(self, X, Y):
        return SheafMorphism(
            X, Y, [Matrix.zeros(self.field, Y.dims[i], X.dims[i]) for i in range(len(self.poset))],
            validate=False)

    def compose(self, f, g):
        if g.target.dims != f.source.dims:
            raise IllFormedMorphism("composition shape mismatch")
        return SheafMorphism(g.source, f.target,
                             [a * b for a, b in zip(f.comps, g.comps)], validate=False)

    def add(self, f, g):
        return SheafMorphism(f.source, f.target,
                             [a + b for a, b in zip(f.comps, g.comps)], validate=False)

    def sub(self, f, g):
        return SheafMorphism(f.source, f.target,
                             [a - b for a, b in zip(f.comps, g.comps)], validate=False)

    def neg(self, f):
        return SheafMorphism(f.source, f.target, [-a for a in f.comps], validate=False)

    def map_eq(self, f, g):
        return all(a == b for a, b in zip(f.comps, g.comps))

    def is_zero_map(self, f):
        return f.is_zero()

    def check_map(self, f, X, Y):
        if f.source.dims != X.dims or f.target.dims != Y.dims:
            raise IllFormedMorphism("morphism endpoints do not match")

    def map_source_obj(self, f):
        return f.source

    def map_target_obj(self, f):
        return f.target

    # abelian structure ---------------------------------------------------
    def kernel(self, f):
        kers = [kernel_basis(f.comps[i]) for i in range(len(self.poset))]
        dims = [k.dim for k in kers]
        rho = {}
        for (i, j) in self.poset.covers:
            moved = f.source.rho[(i, j)] * kers[i].basis
            rho[(i, j)] = (kers[j].coords_of(moved) if dims[j] else
                           Matrix.zeros(self.field, 0, dims[i]))
        K = Sheaf(self.poset, self.field, dims, rho, validate=False)
        K._build_full()
        mono = SheafMorphism(K, f.source, [k.basis for k in kers], validate=False)
        return K, mono

    def cokernel(self, f):
        reps, projs, dims = [], [], []
        for i in range(len(self.poset)):
            img = image_basis(f.comps[i])
            r, p = quotient_basis(Subspace.full(self.field, f.target.dims[i]), img)
            reps.append(r)
            projs.append(p)
            dims.append(r.cols)
        rho = {}
        for (i, j) in self.poset.covers:
            rho[(i, j)] = projs[j] * (f.target.rho[(i, j)] * reps[i])
        Q = Sheaf(self.poset, self.field, dims, rho, validate=False)
        Q._build_full()
        epi = SheafMorphism(f.target, Q, projs, validate=False)
        return Q, epi

    def image(self, f):
        imgs = [image_basis(f.comps[i]) for i in range(len(self.poset))]
        dims = [s.dim for s in imgs]
        rho = {}
        for (i, j) in self.poset.covers:
            moved = f.target.rho[(i, j)] * imgs[i].basis
            rho[(i, j)] = (imgs[j].coords_of(moved) if dims[j] else
                           Matrix.zeros(self.field, 0, dims[i]))
        I = Sheaf(self.poset, self.field, dims, rho, validate=False)
        I._build_full()
        mono = SheafMorphism(I, f.target, [s.basis for s in imgs], validate=False)
        epi_comps = []
        for i in range(len(self.poset)):
            if dims[i]:
                epi_comps.append(solve(imgs[i].basis, f.comps[i]))
            else:
                epi_comps.append(Matrix.zeros(self.field, 0, f.source.dims[i]))
        epi = SheafMorphism(f.source, I, epi_comps, validate=False)
        return I, mono, epi

    def is_mono(self, f):
        return all(rank(m) == m.cols for m in f.comps)

    def is_epi(self, f):
        return all(rank(m) == m.rows for m in f.comps)

    def lift_through_mono(self, f, m):
        comps = [solve(m.comps[i], f.comps[i]) for i in range(len(self.poset))]
        return SheafMorphism(f.source, m.source, comps, validate=False)

    def descend_along_epi(self, e, f):
        comps = []
        for i in range(len(self.poset)):
            g = solve(e.comps[i].transpose(), f.comps[i].transpose()).transpose()
            if not (g * e.comps[i] == f.comps[i]):
                raise NoSolution("map does not descend along the epimorphism at %s"
                                 % self.poset.elements[i])
            comps.append(g)
        return SheafMorphism(e.target, f.target, comps, validate=False)

    def direct_sum(self, Xs):
        if all(isinstance(X, InjectiveSheaf) for X in Xs):
            S = InjectiveSheaf(self.poset, self.field,
                               [s for X in Xs for s in X.summands])
        else:
            dims = [sum(X.dims[i] for X in Xs) for i in range(len(self.poset))]
            rho = {}
            for (i, j) in self.poset.covers:
                rho[(i, j)] = block_diag(self.field, [X.rho[(i, j)] for X in Xs])
            S = Sheaf(self.poset, self.field, dims, rho, validate=False)
            S._build_full()
        injs, projs = [], []
        for k, X in enumerate(Xs):
            inj_comps, proj_comps = [], []
            for i in range(len(self.poset)):
                before = sum(Y.dims[i] for Y in Xs[:k])
                ident = Matrix.identity(self.field, S.dims[i])
                idx = list(range(before, before + X.dims[i]))
                inj_comps.append(ident.cols_slice(idx))
                proj_comps.append(ident.rows_slice(idx))
            injs.append(SheafMorphism(X, S, inj_comps, validate=False))
            projs.append(SheafMorphism(S, X, proj_comps, validate=False))
        return S, injs, projs

    def injective_embed(self, X):
        """Canonical coinduced embedding; identity when X is already realized."""
        if isinstance(X, InjectiveSheaf):
            return X, self.identity(X)
        order = range(len(self.poset))
        if self.flip:
            order = range(len(self.poset) - 1, -1, -1)
        summands = [(x, X.dims[x]) for x in order if X.dims[x] > 0]
        I = InjectiveSheaf(self.poset, self.field, summands)
        comps = []
        for y in range(len(self.poset)):
            blocks = [X.restriction(y, I.summands[j][0]) for j in I.present[y]]
            if blocks:
                comps.append(vstack(blocks))
            else:
                comps.append(Matrix.zeros(self.field, 0, X.dims[y]))
        mono = SheafMorphism(X, I, comps, validate=False)
        return I, mono

    def extend_along_mono(self, m, f):
        """g: B -> I with g.m = f, for I a realized coinduced sum.

        Works one summand [x]_V at a time through Hom(F, [x]_V) = Hom(F_x, V):
        solve at the peak stalk, extend by zero on a complement of im(m_x).
        """
        I = f.target
        if not isinstance(I, InjectiveSheaf):
            raise NotCoinduced("extension target must be a realized coinduced sum")
        if not self.is_mono(m):
            raise NotMono("extension base is not a monomorphism")
        B = m.target
        peaks = []
        for j, (x, v) in enumerate(I.summands):
            off = I.slot[x][j]
            fj = f.comps[x].rows_slice(range(off, off + v))
            peaks.append(_extend_matrix(m.comps[x], fj, self.flip))
        comps = []
        for y in range(len(self.poset)):
            blocks = [peaks[j] * B.restriction(y, I.summands[j][0]) for j in I.present[y]]
            if blocks:
                comps.append(vstack(blocks))
            else:
                comps.append(Matrix.zeros(self.field, 0, B.dims[y]))
        return SheafMorphism(B, I, comps, validate=False)

    def is_exact_pair(self, f, g, mid):
        for i in range(len(self.poset)):
            if not (g.comps[i] * f.comps[i]).is_zero():
                return False
            if rank(f.comps[i]) + rank(g.comps[i]) != mid.dims[i]:
                return False
        return True

    def is_injective_object(self, X):
        return isinstance(X, InjectiveSheaf)

    def resolution_bound(self):
        return self.poset.longest_chain_length() + 2


# global sections ---------------------------------------------------------

def global_sections(F: Sheaf) -> Subspace:
    """Gamma(F) as the kernel of the difference map over covers."""
    p = F.poset
    if not p.covers:
        return Subspace.full(F.field, F.total_dim)
    rows = []
    for (i, j) in p.covers:
        row = Matrix.zeros(F.field, F.dims[j], F.total_dim).data
        rmat = F.rho[(i, j)]
        for r in range(F.dims[j]):
            for c in range(F.dims[i]):
                row[r][F.offsets[i] + c] = rmat.data[r][c]
            row[r][F.offsets[j] + r] = -F.field.one()
        rows.append(Matrix(F.field, F.dims[j], F.total_dim, row))
    return kernel_basis(vstack(rows))


def sections_over(F: Sheaf, open_idx) -> Subspace:
    """Sections over an open set, in the coordinates of its stalks."""
    p = F.poset
    open_idx = sorted(open_idx)
    pos = {x: k for k, x in enumerate(open_idx)}
    offs, off = {}, 0
    for x in open_idx:
        offs[x] = off
        off += F.dims[x]
    total = off
    rows = []
    for (i, j) in p.covers:
        if i in pos and j in pos:
            blk = Matrix.zeros(F.field, F.dims[j], total).data
            rmat = F.rho[(i, j)]
            for r in range(F.dims[j]):
                for c in range(F.dims[i]):
                    blk[r][offs[i] + c] = rmat.data[r][c]
                blk[r][offs[j] + r] = -F.field.one()
            rows.append(Matrix(F.field, F.dims[j], total, blk))
    if not rows:
        return Subspace.full(F.field, total)
    return kernel_basis(vstack(rows))


def gamma_struct_map(phi: SheafMorphism, srcI: InjectiveSheaf, tgtI: InjectiveSheaf) -> Matrix:
    """Gamma(phi) in structured coordinates (one slot per coinduced summand)."""
    field = phi.source.field
    p = phi.source.poset
    out = Matrix.zeros(field, tgtI.mult_total, srcI.mult_total).data
    roff = 0
    for jt, (xt, vt) in enumerate(tgtI.summands):
        toff = tgtI.slot[xt][jt]
        coff = 0
        for js, (xs, vs) in enumerate(srcI.summands):
            if xs in p.up[xt]:  # xt <= xs: source section present at xt
                soff = srcI.slot[xt][js]
                blk = phi.comps[xt]
                for r in range(vt):
                    for c in range(vs):
                        out[roff + r][coff + c] = blk.data[toff + r][soff + c]
            coff += vs
        roff += vt
    return Matrix(field, tgtI.mult_total, srcI.mult_total, out)


def gamma_struct_basis(I: InjectiveSheaf) -> Matrix:
    """Structured section basis as vectors in total stalk coordinates."""
    field = I.field
    cols = []
    for j, (x, v) in enumerate(I.summands):
        for t in range(v):
            vec = [field.zero()] * I.total_dim
            for y in I.poset.down[x]:
                vec[I.offsets[y] + I.slot[y][j] + t] = field.one()
            cols.append(vec)
    return Matrix(field, I.total_dim, len(cols),
                  [[c[i] for c in cols] for i in range(I.total_dim)])


def gamma_read_struct(I: InjectiveSheaf, vecs: Matrix) -> Matrix:
    """Structured coordinates of section vectors (read off at the peaks)."""
    rows = []
    for j in range(len(I.summands)):
        rows.extend(I.peak_rows(j))
    return vecs.rows_slice(rows)


def gamma_map(phi: SheafMorphism, src_basis: Matrix, tgt_basis: Matrix) -> Matrix:
    """Gamma(phi) between explicit section bases in total coordinates."""
    moved = phi.as_block_matrix() * src_basis
    if tgt_basis.cols == 0:
        if not moved.is_zero():
            raise NoSolution("section image misses the target section space")
        return Matrix.zeros(phi.source.field, 0, src_basis.cols)
    return solve(tgt_basis, moved)


def gamma_of_complex(cplx: homalg.CochainComplex, vctx: VectorContext) -> homalg.CochainComplex:
    """Apply Gamma to a complex of realized injective sheaves (structured)."""
    objects, diffs = {}, {}
    for q in cplx.degrees():
        objects[q] = cplx.obj(q).mult_total
    for q in cplx.degrees():
        if q + 1 in objects:
            diffs[q] = gamma_struct_map(cplx.diff(q), cplx.obj(q), cplx.obj(q + 1))
    return homalg.CochainComplex(vctx, objects, diffs)


def sheaf_cohomology_dims(F: Sheaf, max_q=None) -> list:
    """R^q Gamma via the canonical coinduced resolution; list of dims from q=0."""
    ctx = SheafContext(F.poset, F.field)
    res = homalg.injective_resolution(ctx, F)
    vec = gamma_of_complex(res.complex, VectorContext(F.field))
    top = res.length() if max_q is None else max(res.length(), max_q)
    return [vctx_h_dim(vec, q) for q in range(top + 1)]


def vctx_h_dim(vec: homalg.CochainComplex, q: int) -> int:
    return homalg.cohomology(vec, q).H


# opens, restriction, acyclicity -------------------------------------------

def restrict_to_open(F: Sheaf, open_names):
    """F restricted to an open set, as a sheaf on the induced subposet."""
    p = F.poset
    if not p.is_open(set(open_names)):
        raise NotOpen("%r is not an up-set" % (sorted(open_names),))
    keepset = {i for i in range(len(p)) if p.elements[i] in set(open_names)}
    keep = sorted(keepset)
    sub = Poset([p.elements[i] for i in keep],
                [(p.elements[i], p.elements[j]) for (i, j) in p.covers
                 if i in keepset and j in keepset])
    remap = {i: sub.idx(p.elements[i]) for i in keep}
    dims = [0] * len(sub)
    for i in keep:
        dims[remap[i]] = F.dims[i]
    rho = {}
    for (i, j) in p.covers:
        if i in remap and j in remap:
            rho[(remap[i], remap[j])] = F.rho[(i, j)]
    return Sheaf(sub, F.field, dims, rho, validate=False), sub


class AcyclicityReport:
    def __init__(self, ok, failing_open, opens_checked, exhaustive):
        self.ok = ok
        self.failing_open = failing_open
        self.opens_checked = opens_checked
        self.exhaustive = exhaustive

    def __bool__(self):
        return self.ok


def is_acyclic_on_all_opens(F: Sheaf, open_cap=600, sample_seed=0, sample_count=24) -> AcyclicityReport:
    """H^q(U, F|_U) = 0 for q >= 1, over all opens or a generated sample.

    Small posets are checked exhaustively; larger ones over all minimal opens
    U_x, their pairwise unions, the whole space and seeded random unions.
    """
    p = F.poset
    opens = None
    if len(p) <= 10:
        all_opens = p.open_sets()
        if len(all_opens) <= open_cap:
            opens = [set(s) for s in all_opens if s]
    exhaustive = opens is not None
    if opens is None:
        gens = [set(p.up[i]) for i in range(len(p))]
        fam = [set(range(len(p)))] + gens
        for a in range(len(gens)):
            for b in range(a + 1, len(gens)):
                fam.append(gens[a] | gens[b])
        rng = random.Random(sample_seed)
        for _ in range(sample_count):
            k = rng.randint(2, max(2, min(4, len(gens))))
            pick = rng.sample(range(len(gens)), k)
            fam.append(set().union(*[gens[t] for t in pick]))
        seen, opens = set(), []
        for s in fam:
            key = frozenset(s)
            if key and key not in seen:
                seen.add(key)
                opens.append(s)
    for s in opens:
        names = {p.elements[i] for i in s}
        FU, _ = restrict_to_open(F, names)
        if FU.total_dim == 0:
            continue
        dims = sheaf_cohomology_dims(FU)
        if any(d != 0 for d in dims[1:]):
            return AcyclicityReport(False, sorted(names), len(opens), exhaustive)
    return AcyclicityReport(True, None, len(opens), exhaustive)


# pushforward ---------------------------------------------------------------

class Pushforward:
    """Direct image along a monotone map: stalks are sections over preimages."""

    def __init__(self, f: MonotoneMap):
        self.f = f

    def apply(self, F: Sheaf) -> Sheaf:
        f, tgt = self.f, self.f.target
        opens, bases = [], []
        for q in range(len(tgt)):
            o = sorted(f.preimage_idx(tgt.up[q]))
            opens.append(o)
            bases.append(sections_over(F, o))
        dims = [b.dim for b in bases]
        rho = {}
        for (q, q2) in tgt.covers:
            sel = self._selector(F, opens[q], opens[q2])
            moved = sel * bases[q].basis
            rho[(q, q2)] = (bases[q2].coords_of(moved) if dims[q2] else
                            Matrix.zeros(F.field, 0, dims[q]))
        out = Sheaf(tgt, F.field, dims, rho, validate=False)
        out._build_full()
        out._push = (opens, bases)
        return out

    @staticmethod
    def _selector(F: Sheaf, big, small) -> Matrix:
        offs_big, off = {}, 0
        for x in big:
            offs_big[x] = off
            off += F.dims[x]
        total_big = off
        rows = []
        for x in small:
            for r in range(F.dims[x]):
                row = [F.field.zero()] * total_big
                row[offs_big[x] + r] = F.field.one()
                rows.append(row)
        return Matrix(F.field, len(rows), total_big, rows)

    def apply_map(self, phi: SheafMorphism, FA_pushed: Sheaf, FB_pushed: Sheaf) -> SheafMorphism:
        opensA, basesA = FA_pushed._push
        _, basesB = FB_pushed._push
        comps = []
        for q in range(len(self.f.target)):
            o = opensA[q]
            blocks = block_diag(phi.source.field, [phi.comps[x] for x in o]) if o else \
                Matrix.zeros(phi.source.field, 0, 0)
            moved = blocks * basesA[q].basis
            if basesB[q].dim:
                comps.append(basesB[q].coords_of(moved))
            else:
                comps.append(Matrix.zeros(phi.source.field, 0, basesA[q].dim))
        return SheafMorphism(FA_pushed, FB_pushed, comps, validate=False)


def hom_basis(F: Sheaf, G: Sheaf):
    """Basis of the space of sheaf morphisms F -> G."""
    p = F.poset
    field = F.field
    var_off, off = [], 0
    for i in range(len(p)):
        var_off.append(off)
        off += G.dims[i] * F.dims[i]
    nvars = off
    rows = []
    for (i, j) in p.covers:
        rF, rG = F.rho[(i, j)], G.rho[(i, j)]
        for r in range(G.dims[j]):
            for c in range(F.dims[i]):
                row = [field.zero()] * nvars
                # (phi_j . rF)[r,c] - (rG . phi_i)[r,c] = 0
                for k in range(F.dims[j]):
                    row[var_off[j] + r * F.dims[j] + k] = row[var_off[j] + r * F.dims[j] + k] + rF.data[k][c]
                for k in range(G.dims[i]):
                    row[var_off[i] + k * F.dims[i] + c] = row[var_off[i] + k * F.dims[i] + c] - rG.data[r][k]
                rows.append(row)
    if rows:
        ker = kernel_basis(Matrix(field, len(rows), nvars, rows))
    else:
        ker = Subspace.full(field, nvars)
    out = []
    for t in range(ker.dim):
        vec = [ker.basis.data[i][t] for i in range(nvars)]
        comps = []
        for i in range(len(p)):
            m = [[vec[var_off[i] + r * F.dims[i] + c] for c in range(F.dims[i])]
                 for r in range(G.dims[i])]
            comps.append(Matrix(field, G.dims[i], F.dims[i], m))
        out.append(SheafMorphism(F, G, comps))
    return out
