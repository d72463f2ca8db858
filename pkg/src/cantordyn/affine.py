"""Exact algebra of affine crystallographic groups over the integers.

Elements are pairs (A, v): x -> A x + v with A an integer matrix of
determinant +-1 and finite order, and v a rational vector whose entries have
denominators dividing a group-wide integer d.  Finite-index subgroups are
stored as a translation lattice in canonical Hermite form together with one
affine representative per point-part class.  All arithmetic is exact; there
is no floating point anywhere in this module.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import _intmat as im
from .errors import ResourceLimitError, StructureError

DEFAULT_ORDER_BOUND = 12
DEFAULT_INDEX_CAP = 10 ** 6
DEFAULT_CLASS_CAP = 4096
INDEX_CAP_ENV = "CANTORDYN_INDEX_CAP"


def index_cap():
    raw = os.environ.get(INDEX_CAP_ENV)
    if raw is None:
        return DEFAULT_INDEX_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise StructureError(f"{INDEX_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap <= 0:
        raise StructureError(f"{INDEX_CAP_ENV} must be positive")
    return cap


def _to_fraction_vec(v):
    return tuple(Fraction(x) for x in v)


def _point_key(a):
    return tuple(x for row in a for x in row)


@dataclass(frozen=True)
class AffineElement:
    """An affine map x -> point @ x + trans with exact rational translation."""

    point: tuple
    trans: tuple
    denom: int
    order_bound: int = field(default=DEFAULT_ORDER_BOUND, compare=False, repr=False)

    def __post_init__(self):
        point = tuple(tuple(int(x) for x in row) for row in self.point)
        trans = _to_fraction_vec(self.trans)
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "trans", trans)
        n = len(point)
        if any(len(row) != n for row in point) or len(trans) != n:
            raise StructureError("point part must be square and match the translation length")
        if self.denom < 1:
            raise StructureError("denominator must be a positive integer")
        d = im.det(point)
        if d not in (1, -1):
            raise StructureError(f"point part must be unimodular, got determinant {d}")
        if im.matrix_order(point, self.order_bound) is None:
            raise StructureError(
                f"point part order exceeds the bound {self.order_bound}"
            )
        for t in trans:
            if (t * self.denom).denominator != 1:
                raise StructureError(
                    f"translation entry {t} is not a multiple of 1/{self.denom}"
                )

    @property
    def dimension(self):
        return len(self.point)

    def is_identity(self):
        return self.point == im.identity(self.dimension) and all(
            t == 0 for t in self.trans
        )

    def scaled_trans(self):
        return tuple(int(t * self.denom) for t in self.trans)

    def compose(self, other):
        return compose(self, other)

    def inverse(self):
        inv = im.mat_inverse_unimodular(self.point)
        v = tuple(-x for x in im.mat_vec(inv, self.trans))
        return AffineElement(inv, v, self.denom, self.order_bound)

    def __mul__(self, other):
        return compose(self, other)

    def key(self):
        return (_point_key(self.point), self.trans)

    def __str__(self):
        rows = ";".join(",".join(str(x) for x in row) for row in self.point)
        vec = ",".join(str(t) for t in self.trans)
        return f"[{rows}]|({vec})"


def identity_element(n, denom=1):
    return AffineElement(im.identity(n), (0,) * n, denom)


def translation(v, denom=1):
    v = _to_fraction_vec(v)
    return AffineElement(im.identity(len(v)), v, denom)


def compose(a, b):
    """Group law: (A,v)(B,w) = (AB, v + A w); apply b first, then a."""
    if a.dimension != b.dimension:
        raise StructureError("dimension mismatch in composition")
    if a.denom != b.denom:
        raise StructureError("denominator mismatch in composition")
    point = im.mat_mul(a.point, b.point)
    trans = im.vec_add(a.trans, im.mat_vec(a.point, b.trans))
    return AffineElement(point, trans, a.denom, a.order_bound)


def inverse(a):
    return a.inverse()


@dataclass(frozen=True)
class IntegerLattice:
    """Full-rank sublattice of Z^n with canonical upper-triangular HNF basis."""

    basis: tuple

    def __post_init__(self):
        basis = tuple(tuple(int(x) for x in row) for row in self.basis)
        object.__setattr__(self, "basis", basis)
        n = len(basis)
        d = im.det(basis)
        if d == 0:
            raise StructureError("lattice basis is singular")
        for i in range(n):
            if basis[i][i] <= 0:
                raise StructureError("lattice basis is not in canonical form")
            for j in range(n):
                if j < i and basis[i][j] != 0:
                    raise StructureError("lattice basis is not upper triangular")
                if j > i and not 0 <= basis[i][j] < basis[i][i]:
                    raise StructureError("lattice basis off-diagonal entries not reduced")

    @property
    def dimension(self):
        return len(self.basis)

    def index(self):
        """Index of the lattice in Z^n: the product of the diagonal."""
        p = 1
        for i in range(self.dimension):
            p *= self.basis[i][i]
        return p

    def _pivots(self):
        return tuple(range(self.dimension))

    def contains(self, v):
        return im.solve_echelon(self.basis, self._pivots(), v) is not None

    def reduce(self, v):
        """Canonical representative of v + L in the fundamental box."""
        return im.reduce_echelon(self.basis, self._pivots(), v)

    def transform(self, a):
        """The lattice A * L for an integer matrix A with det != 0."""
        return hermite_normal_form(im.mat_mul(a, self.basis))

    def scale(self, c):
        return hermite_normal_form(
            tuple(tuple(c * x for x in row) for row in self.basis)
        )

    def contains_lattice(self, other):
        n = self.dimension
        return all(
            self.contains(tuple(other.basis[i][j] for i in range(n))) for j in range(n)
        )

    def column(self, j):
        return tuple(self.basis[i][j] for i in range(self.dimension))

    def columns(self):
        return [self.column(j) for j in range(self.dimension)]

    def __str__(self):
        return "[" + ";".join(",".join(str(x) for x in row) for row in self.basis) + "]"


def hermite_normal_form(m):
    """Canonical HNF lattice spanned by the columns of a nonsingular matrix."""
    m = tuple(tuple(int(x) for x in row) for row in m)
    if im.det(m) == 0:
        raise StructureError("degenerate lattice: matrix is singular")
    h, pivots = im.column_hnf(m)
    n = len(m)
    basis = tuple(tuple(h[i][j] for j in range(n)) for i in range(n))
    return IntegerLattice(basis)


def lattice_from_columns(cols):
    n = len(cols[0])
    rows = tuple(tuple(c[i] for c in cols) for i in range(n))
    h, pivots = im.column_hnf(rows)
    if len(pivots) != n:
        raise StructureError("columns do not span a full-rank lattice")
    basis = tuple(tuple(h[i][j] for j in range(n)) for i in range(n))
    return IntegerLattice(basis)


def lattice_sum(l1, l2):
    return lattice_from_columns(l1.columns() + l2.columns())


def lattice_intersect(l1, l2):
    """Intersection of two full-rank integer lattices, via duals."""
    if l1.dimension != l2.dimension:
        raise StructureError("dimension mismatch in lattice intersection")
    n = l1.dimension

    def dual_cols(lat):
        inv = im.mat_inverse_exact(lat.basis)
        # columns of (B^{-1})^T are the rows of B^{-1}
        return [tuple(inv[i][j] for j in range(n)) for i in range(n)]

    cols = dual_cols(l1) + dual_cols(l2)
    denom = 1
    for c in cols:
        for x in c:
            denom = denom * x.denominator // math.gcd(denom, x.denominator)
    int_cols = [tuple(int(x * denom) for x in c) for c in cols]
    s = lattice_from_columns(int_cols)
    inv = im.mat_inverse_exact(s.basis)
    out_cols = []
    for i in range(n):
        col = tuple(inv[i][j] * denom for j in range(n))
        if any(x.denominator != 1 for x in col):
            raise StructureError("lattice intersection is not integral")
        out_cols.append(tuple(int(x) for x in col))
    return lattice_from_columns(out_cols)


class _LatticeSpan:
    """Incrementally grown integer lattice of possibly deficient rank."""

    def __init__(self, n):
        self.n = n
        self.cols = []
        self._h = None
        self._pivots = ()

    def _refresh(self):
        if not self.cols:
            self._h, self._pivots = None, ()
            return
        rows = tuple(tuple(c[i] for c in self.cols) for i in range(self.n))
        self._h, self._pivots = im.column_hnf(rows)

    def contains(self, v):
        if all(x == 0 for x in v):
            return True
        if self._h is None:
            return False
        return im.solve_echelon(self._h, self._pivots, v) is not None

    def reduce(self, v):
        if self._h is None:
            return tuple(v)
        return im.reduce_echelon(self._h, self._pivots, v)

    def add(self, v):
        """Add a vector; returns True if the lattice grew."""
        if self.contains(v):
            return False
        self.cols.append(tuple(v))
        self._refresh()
        # drop redundant columns: keep the echelon pivot columns only
        keep = []
        for j in range(len(self._h[0]) if self._h else 0):
            col = tuple(self._h[i][j] for i in range(self.n))
            if any(x != 0 for x in col):
                keep.append(col)
        self.cols = keep
        self._refresh()
        return True

    def full_rank(self):
        return len(self._pivots) == self.n


@dataclass(frozen=True)
class FiniteIndexSubgroup:
    """Translation lattice plus one affine representative per point class.

    The group is the union over representatives r of the cosets r * T(lattice).
    Invariants: the representative list is closed under composition modulo
    lattice translations, the lattice is stable under every representative's
    point part, the identity-point representative comes first, and all
    translation parts are reduced modulo the lattice.
    """

    lattice: IntegerLattice
    reps: tuple

    def __post_init__(self):
        if not self.reps:
            raise StructureError("subgroup needs at least one representative")
        object.__setattr__(self, "reps", tuple(self.reps))

    @property
    def dimension(self):
        return self.reps[0].dimension

    @property
    def denom(self):
        return self.reps[0].denom

    def point_parts(self):
        return [r.point for r in self.reps]

    def rep_for_point(self, point):
        for r in self.reps:
            if r.point == point:
                return r
        return None

    def num_classes(self):
        return len(self.reps)

    def lattice_elements(self):
        """The lattice basis vectors as translation elements."""
        return [
            translation(self.lattice.column(j), self.denom)
            for j in range(self.dimension)
        ]

    def generator_elements(self):
        """Representatives plus lattice translations: a generating set."""
        return [r for r in self.reps if not r.is_identity()] + self.lattice_elements()

    def __str__(self):
        reps = ", ".join(str(r) for r in self.reps)
        return f"<lattice={self.lattice} reps=[{reps}]>"


def _canonical_reps(lattice, reps):
    n = reps[0].dimension
    denom = reps[0].denom
    by_point = {}
    for r in reps:
        red = lattice.reduce(r.trans)
        by_point[r.point] = AffineElement(r.point, red, denom, r.order_bound)
    ident = im.identity(n)
    if ident not in by_point:
        raise StructureError("subgroup has no identity point class")
    if any(t != 0 for t in by_point[ident].trans):
        raise StructureError("identity point class does not contain the identity")
    rest = sorted(
        (r for p, r in by_point.items() if p != ident), key=AffineElement.key
    )
    return tuple([by_point[ident]] + rest)


def subgroup_from_parts(lattice, reps, *, validate=True):
    """Build a canonical FiniteIndexSubgroup from a lattice and class reps."""
    reps = list(reps)
    n = reps[0].dimension
    ident = im.identity(n)
    if all(r.point != ident for r in reps):
        reps.append(identity_element(n, reps[0].denom))
    canon = _canonical_reps(lattice, reps)
    h = FiniteIndexSubgroup(lattice, canon)
    if validate:
        _validate_subgroup(h)
    return h


def _validate_subgroup(h):
    # lattice stable under every point part
    for r in h.reps:
        if h.lattice.transform(r.point) != h.lattice:
            raise StructureError(
                f"lattice is not stable under point part of {r}"
            )
    # closure: product of any two reps lands in a known class modulo the lattice
    for a in h.reps:
        for b in h.reps:
            prod = compose(a, b)
            if not contains(h, prod):
                raise StructureError(
                    f"representatives not closed: {a} * {b} leaves the subgroup"
                )
    # inverses stay inside
    for a in h.reps:
        if not contains(h, a.inverse()):
            raise StructureError(f"representative inverse {a} leaves the subgroup")


def contains(h, g):
    """Exact membership: g = r * t_v for a class rep r and lattice vector v."""
    if g.dimension != h.dimension:
        raise StructureError("dimension mismatch in membership test")
    if g.denom != h.denom:
        raise StructureError("denominator mismatch in membership test")
    r = h.rep_for_point(g.point)
    if r is None:
        return False
    diff = im.vec_sub(g.trans, r.trans)
    if any(x.denominator != 1 for x in diff):
        return False
    return h.lattice.contains(tuple(int(x) for x in diff))


def subgroup_from_generators(
    n,
    denom,
    generators,
    *,
    class_cap=DEFAULT_CLASS_CAP,
    order_bound=DEFAULT_ORDER_BOUND,
    require_full_rank=True,
):
    """Closure of a finite generating set into lattice + class-rep normal form.

    Worklist closure over products with generators and their inverses.  The
    translation lattice is kept stable under all discovered point parts; a
    growing lattice only merges classes, so one representative per point part
    suffices throughout.
    """
    gens = list(generators)
    for g in gens:
        if g.dimension != n or g.denom != denom:
            raise StructureError("generator dimension/denominator mismatch")
    signed = []
    for g in gens:
        signed.append(g)
        signed.append(g.inverse())

    span = _LatticeSpan(n)  # scaled by denom: holds denom * v for v in T(H)
    classes = {}  # point matrix -> scaled translation (reduced later)
    ident = im.identity(n)
    classes[ident] = (0,) * n

    def grow_lattice(vec):
        # keep the span stable under every known point part
        queue = [tuple(vec)]
        while queue:
            w = queue.pop()
            if span.add(w):
                for p in classes:
                    queue.append(im.mat_vec(p, w))

    def on_new_point(p):
        for col in list(span.cols):
            grow_lattice(im.mat_vec(p, col))

    work = [(ident, (0,) * n)]
    while work:
        point, tr = work.pop()
        for g in signed:
            gp = g.point
            gt = g.scaled_trans()
            new_point = im.mat_mul(point, gp)
            new_tr = im.vec_add(tr, im.mat_vec(point, gt))
            if new_point in classes:
                delta = im.vec_sub(new_tr, classes[new_point])
                if not span.contains(delta):
                    grow_lattice(delta)
            else:
                if len(classes) >= class_cap:
                    raise ResourceLimitError(
                        f"point class count exceeded the cap {class_cap}"
                    )
                classes[new_point] = new_tr
                on_new_point(new_point)
                work.append((new_point, new_tr))

    if require_full_rank and not span.full_rank():
        raise StructureError(
            "translation lattice is not full rank; the subgroup has infinite index"
        )
    # unscale: lattice entries must be integral in unscaled units
    cols = []
    for col in span.cols:
        unscaled = [Fraction(x, denom) for x in col]
        cols.append(unscaled)
    int_cols = []
    for col in cols:
        if any(x.denominator != 1 for x in col):
            raise StructureError(
                "translation lattice has fractional entries; rescale coordinates "
                "so identity-point translations are integral"
            )
        int_cols.append(tuple(int(x) for x in col))
    lattice = lattice_from_columns(int_cols)
    reps = [
        AffineElement(p, tuple(Fraction(x, denom) for x in t), denom, order_bound)
        for p, t in classes.items()
    ]
    return subgroup_from_parts(lattice, reps, validate=True)


def conjugate(g, h):
    """Canonical form of g^{-1} H g."""
    ginv = g.inverse()
    lattice = h.lattice.transform(ginv.point)
    reps = [compose(compose(ginv, r), g) for r in h.reps]
    return subgroup_from_parts(lattice, reps, validate=False)


def subgroup_intersect(h1, h2):
    """Intersection of two finite-index subgroups of a common ambient group."""
    if h1.dimension != h2.dimension or h1.denom != h2.denom:
        raise StructureError("subgroup intersection: incompatible operands")
    n = h1.dimension
    denom = h1.denom
    lat = lattice_intersect(h1.lattice, h2.lattice)
    reps = []
    for r1 in h1.reps:
        r2 = h2.rep_for_point(r1.point)
        if r2 is None:
            continue
        diff = im.vec_sub(r2.trans, r1.trans)
        if any(x.denominator != 1 for x in diff):
            continue
        target = tuple(int(x) for x in diff)
        # solve B1 x - B2 y = target over the integers
        b1 = h1.lattice.basis
        b2 = h2.lattice.basis
        rows = tuple(
            tuple(b1[i][j] for j in range(n)) + tuple(-b2[i][j] for j in range(n))
            for i in range(n)
        )
        hh, pivots, u = im.column_hnf(rows, with_transform=True)
        y = im.solve_echelon(hh, pivots, target)
        if y is None:
            continue
        z = im.mat_vec(u, y)
        x = z[:n]
        shift = im.mat_vec(b1, x)
        w = im.vec_add(r1.trans, _to_fraction_vec(shift))
        reps.append(AffineElement(r1.point, w, denom, r1.order_bound))
    if not reps:
        raise StructureError("subgroup intersection lost the identity class")
    return subgroup_from_parts(lat, reps, validate=True)


def subgroup_le(h1, h2):
    """True iff H1 is contained in H2 (as subgroups of a common group)."""
    if not h2.lattice.contains_lattice(h1.lattice):
        return False
    return all(contains(h2, r) for r in h1.reps)


def element_not_in(h1, h2):
    """Some element of H1 outside H2, or None when H1 <= H2."""
    for j in range(h1.dimension):
        t = translation(h1.lattice.column(j), h1.denom)
        if not contains(h2, t):
            return t
    for r in h1.reps:
        if not contains(h2, r):
            return r
    return None


@dataclass(frozen=True)
class AffineGroup:
    """A fixed-dimension affine presentation: named generators plus denominator."""

    dimension: int
    denom: int
    generators: tuple  # tuple of (name, AffineElement)
    normal_form: FiniteIndexSubgroup

    @classmethod
    def from_generators(cls, named_generators, *, denom=None, class_cap=DEFAULT_CLASS_CAP):
        named = tuple((str(name), g) for name, g in named_generators)
        if not named:
            raise StructureError("a group needs at least one generator")
        n = named[0][1].dimension
        d = denom if denom is not None else named[0][1].denom
        nf = subgroup_from_generators(n, d, [g for _, g in named], class_cap=class_cap)
        return cls(n, d, named, nf)

    def generator(self, name):
        for gname, g in self.generators:
            if gname == name:
                return g
        raise StructureError(f"unknown generator {name!r}")

    def generator_names(self):
        return [name for name, _ in self.generators]

    def identity(self):
        return identity_element(self.dimension, self.denom)

    def point_class_order(self):
        """Deterministic point-class ids: identity first, then sorted."""
        ident = im.identity(self.dimension)
        pts = [r.point for r in self.normal_form.reps]
        rest = sorted((p for p in pts if p != ident), key=_point_key)
        ordered = [ident] + rest
        return {p: i for i, p in enumerate(ordered)}

    def contains_element(self, g):
        return contains(self.normal_form, g)

    def contains_subgroup(self, h):
        return subgroup_le(h, self.normal_form)

    def index_of(self, h):
        """Index [G : H] via lattice determinants and class counts."""
        lat_ratio, rem = divmod(h.lattice.index(), self.normal_form.lattice.index())
        if rem:
            raise StructureError("subgroup lattice is not contained in the group lattice")
        total, rem = divmod(
            lat_ratio * self.normal_form.num_classes(), h.num_classes()
        )
        if rem:
            raise StructureError("class counts are incompatible with a subgroup")
        return total

    def __str__(self):
        gens = ", ".join(f"{n}={g}" for n, g in self.generators)
        return f"AffineGroup(n={self.dimension}, d={self.denom}, {gens})"


def subgroup_index_in(h_small, h_big):
    """Index [H_big : H_small] for nested subgroups."""
    lat_ratio, rem = divmod(h_small.lattice.index(), h_big.lattice.index())
    if rem:
        raise StructureError("lattices are not nested")
    total, rem = divmod(lat_ratio * h_big.num_classes(), h_small.num_classes())
    if rem:
        raise StructureError("class counts are not nested")
    return total


@dataclass(frozen=True)
class NormalityVerdict:
    normal: bool
    witness_name: str = None
    witness: AffineElement = None


def is_normal(g, h):
    """True iff every generator conjugate of H equals H; witness on failure."""
    for name, gen in g.generators:
        if conjugate(gen, h) != h:
            return NormalityVerdict(False, name, gen)
    return NormalityVerdict(True)


def normal_core(g, h, *, cap=None):
    """Largest subgroup of H normal in G: intersect conjugates over coset reps."""
    cosets = coset_space(g, h, cap=cap)
    core = h
    for rep in cosets.reps:
        conj = conjugate(rep, h)
        if conj != core and not subgroup_le(core, conj):
            core = subgroup_intersect(core, conj)
    if not subgroup_le(core, h):
        raise StructureError("core computation produced a set outside H")
    verdict = is_normal(g, core)
    if not verdict.normal:
        raise StructureError("core computation produced a non-normal subgroup")
    return core


@dataclass(frozen=True)
class CosetSpace:
    """Left cosets of H in G with canonical representatives and generator action."""

    group: AffineGroup
    subgroup: FiniteIndexSubgroup
    reps: tuple  # canonical AffineElement per coset, sorted
    gen_perms: dict  # generator name -> tuple permutation (left multiplication)
    index: int

    def identity_index(self):
        return self._key_index[_coset_key_of(self.group, self.subgroup, self.group.identity())]

    def index_of_element(self, g):
        key = _coset_key_of(self.group, self.subgroup, g)
        try:
            return self._key_index[key]
        except KeyError:
            raise StructureError("element does not lie in the enumerated coset space")

    def permutation_of(self, g):
        """Left-multiplication permutation induced by an arbitrary element."""
        out = []
        for rep in self.reps:
            out.append(self.index_of_element(compose(g, rep)))
        return tuple(out)


def _coset_reduction_data(group, subgroup):
    """Per point-part A of G: scaled HNF of A * L_H, for canonical reduction."""
    d = group.denom
    data = {}
    for p in group.normal_form.point_parts():
        lat = subgroup.lattice.transform(p)
        scaled = lat.scale(d)
        data[p] = (scaled.basis, tuple(range(group.dimension)))
    return data


def _coset_key_scaled(group, subgroup, class_ids, red_data, point, scaled_tr):
    """Canonical (class_id, reduced scaled translation, point) key for a coset."""
    best = None
    for b in subgroup.reps:
        c = im.mat_mul(point, b.point)
        t2 = im.vec_add(scaled_tr, im.mat_vec(point, b.scaled_trans()))
        basis, pivots = red_data[point]
        red = im.reduce_echelon(basis, pivots, t2)
        cand = (class_ids[c], red, _point_key(c))
        if best is None or cand < best:
            best = cand
    return best


def _coset_key_of(group, subgroup, element):
    class_ids = group.point_class_order()
    red_data = _coset_reduction_data(group, subgroup)
    return _coset_key_scaled(
        group, subgroup, class_ids, red_data, element.point, element.scaled_trans()
    )


def coset_space(group, subgroup, *, cap=None):
    """Enumerate G/H with a deterministic canonical order and generator tables."""
    cap = cap if cap is not None else index_cap()
    expected = group.index_of(subgroup)
    if expected > cap:
        raise ResourceLimitError(
            f"coset index {expected} exceeds the cap {cap}"
        )
    class_ids = group.point_class_order()
    red_data = _coset_reduction_data(group, subgroup)
    d = group.denom

    signed = []
    for name, g in group.generators:
        signed.append((g.point, g.scaled_trans()))
        gi = g.inverse()
        signed.append((gi.point, gi.scaled_trans()))

    ident = im.identity(group.dimension)
    start = _coset_key_scaled(
        group, subgroup, class_ids, red_data, ident, (0,) * group.dimension
    )
    seen = {start}
    frontier = [start]
    while frontier:
        new_frontier = []
        for key in frontier:
            _, red, pkey = key
            n = group.dimension
            point = tuple(tuple(pkey[i * n + j] for j in range(n)) for i in range(n))
            for gp, gt in signed:
                np_ = im.mat_mul(gp, point)
                nt = im.vec_add(gt, im.mat_vec(gp, red))
                nkey = _coset_key_scaled(
                    group, subgroup, class_ids, red_data, np_, nt
                )
                if nkey not in seen:
                    if len(seen) >= cap:
                        raise ResourceLimitError(
                            f"coset enumeration exceeded the cap {cap}"
                        )
                    seen.add(nkey)
                    new_frontier.append(nkey)
        frontier = new_frontier

    if len(seen) != expected:
        raise StructureError(
            f"coset enumeration found {len(seen)} cosets, expected {expected}"
        )

    ordered = sorted(seen)
    key_index = {k: i for i, k in enumerate(ordered)}
    n = group.dimension
    reps = []
    for cid, red, pkey in ordered:
        point = tuple(tuple(pkey[i * n + j] for j in range(n)) for i in range(n))
        trans = tuple(Fraction(x, d) for x in red)
        reps.append(AffineElement(point, trans, d))

    gen_perms = {}
    for name, g in group.generators:
        gp, gt = g.point, g.scaled_trans()
        perm = []
        for cid, red, pkey in ordered:
            point = tuple(tuple(pkey[i * n + j] for j in range(n)) for i in range(n))
            np_ = im.mat_mul(gp, point)
            nt = im.vec_add(gt, im.mat_vec(gp, red))
            nkey = _coset_key_scaled(group, subgroup, class_ids, red_data, np_, nt)
            perm.append(key_index[nkey])
        if sorted(perm) != list(range(len(ordered))):
            raise StructureError(f"generator {name} does not act bijectively")
        gen_perms[name] = tuple(perm)

    space = CosetSpace(group, subgroup, tuple(reps), gen_perms, len(ordered))
    object.__setattr__(space, "_key_index", key_index)
    return space
