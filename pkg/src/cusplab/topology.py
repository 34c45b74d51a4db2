"""Exact-arithmetic classification engine.

Trapping/non-trapping verdicts for potentials and fields, coupling-constant
groups, and the gauge-existence criteria for surfaces and 3-manifolds.
All tests are exact: fluxes and cohomology classes are Fractions (already
divided by 2*pi, so integrality is plain denominator == 1), lattice work goes
through an integer Smith normal form. No floating point anywhere in here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Optional, Sequence, Tuple

from .model import ManifoldSpec, PotentialSpec, validate_pair

REASON_PHI0 = "phi0-nonconstant"
REASON_NONCLOSED = "theta0-nonclosed"
REASON_FLUX = "flux-nonintegral"
REASON_INTEGRAL = "integral"


@dataclass(frozen=True)
class Verdict:
    """Per-component trapping verdicts plus the aggregate flags.

    components: tuple of (label, trapping: bool, reason code). trapping is
    True iff every component traps; maximal_non_trapping iff none does.
    """

    components: Tuple[Tuple[str, bool, str], ...]

    @property
    def trapping(self):
        return all(t for _, t, _ in self.components)

    @property
    def maximal_non_trapping(self):
        return not any(t for _, t, _ in self.components)

    @property
    def non_trapping(self):
        return not self.trapping

    def reason(self, label):
        for lbl, _, r in self.components:
            if lbl == label:
                return r
        raise KeyError(label)


def classify_potential(spec: ManifoldSpec, pot: PotentialSpec) -> Verdict:
    """Trapping on a component iff phi0 is non-constant, theta0 is not closed,
    or the flux vector has a non-integer entry."""
    validate_pair(spec, pot)
    rows = []
    for e, c in zip(spec.ends, pot.components):
        if not c.phi0_constant:
            rows.append((e.label, True, REASON_PHI0))
        elif not c.closed:
            rows.append((e.label, True, REASON_NONCLOSED))
        elif not c.flux_integral:
            rows.append((e.label, True, REASON_FLUX))
        else:
            rows.append((e.label, False, REASON_INTEGRAL))
    return Verdict(components=tuple(rows))


@dataclass(frozen=True)
class FieldClass:
    """Relative cohomology data of a magnetic field vanishing on part of the boundary.

    classes maps component label -> rational class vector [B]_beta in the basis
    of the boundary image, already divided by 2*pi. Only labels in vanishes_on
    carry classes. h1x_zero records the user's declaration that H^1(X) = 0;
    the field-level classification is gauge-dependent without it.
    """

    classes: Tuple[Tuple[str, Tuple[Fraction, ...]], ...]
    vanishes_on: Tuple[str, ...]
    h1x_zero: bool = True

    def __post_init__(self):
        listed = {lbl for lbl, _ in self.classes}
        if listed != set(self.vanishes_on):
            raise ValueError("class components given exactly for vanishes_on labels")


def classify_field(fc: FieldClass) -> str:
    """'Trapping' iff every vanishing component's class has a non-integer entry.

    Refuses when H^1(X) != 0: the trapping condition is then gauge-dependent
    and only potentials can be classified.
    """
    if not fc.h1x_zero:
        raise ValueError("gauge-dependent: classify a potential instead")
    if not fc.vanishes_on:
        return "Trapping"
    for lbl, vec in fc.classes:
        if all(v.denominator == 1 for v in vec):
            return "NonTrapping"
    return "Trapping"


@dataclass(frozen=True)
class GroupDescription:
    """The coupling group G_B = {g : gB non-trapping}.

    kind 'all-reals' (zero class), 'cyclic' (generator g0, so G = g0*Z), or
    'union-of-cyclic' for disconnected boundaries (a union, not a group).
    """

    kind: str
    generators: Tuple[Fraction, ...] = ()


def _cyclic_generator(q: Fraction) -> Optional[Fraction]:
    """Generator of {g : g*q integral}: v/u for q = u/v in lowest terms."""
    if q == 0:
        return None
    return Fraction(q.denominator, q.numerator if q.numerator > 0 else -q.numerator)


def coupling_group(fc: FieldClass) -> GroupDescription:
    """Coupling constants g with g*B non-trapping.

    Connected boundary: a cyclic group (v/u)Z for class u/v, or all of R for
    the zero class. Disconnected boundaries return the union of the
    per-component cyclic groups (g*B is non-trapping as soon as one component
    becomes integral); the union is not a group and is reported as such.
    """
    if not fc.h1x_zero:
        raise ValueError("gauge-dependent: classify a potential instead")
    gens = []
    for lbl, vec in fc.classes:
        per = []
        for v in vec:
            g = _cyclic_generator(v)
            if g is None:
                return GroupDescription(kind="all-reals")
            per.append(g)
        # all entries must become integral simultaneously: lcm of the cyclic lattices
        gens.append(_lcm_fractions(per))
    if not gens:
        return GroupDescription(kind="all-reals")
    if len(gens) == 1:
        return GroupDescription(kind="cyclic", generators=(gens[0],))
    return GroupDescription(kind="union-of-cyclic", generators=tuple(sorted(set(gens))))


def _lcm_fractions(vals: Sequence[Fraction]) -> Fraction:
    """Generator of the intersection of the lattices v_i * Z:
    lcm of numerators over gcd of denominators."""
    num = 1
    den = 0
    for v in vals:
        num = lcm(num, abs(v.numerator))
        den = gcd(den, v.denominator)
    return Fraction(num, den)


# -- Smith normal form -------------------------------------------------------

def smith_normal_form(A: Sequence[Sequence[int]]):
    """Smith normal form over Z: returns (U, D, V) with U*A*V = D.

    U, V unimodular (det +-1), D diagonal with d_i | d_{i+1} and d_i >= 0.
    Plain Python integers throughout; no overflow.
    """
    A = [list(map(int, row)) for row in A]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def addmul_row(dst, src, f):
        for c in range(n):
            A[dst][c] += f * A[src][c]
        for c in range(m):
            U[dst][c] += f * U[src][c]

    def addmul_col(dst, src, f):
        for r in range(m):
            A[r][dst] += f * A[r][src]
        for r in range(n):
            V[r][dst] += f * V[r][src]

    def negate_row(i):
        A[i] = [-x for x in A[i]]
        U[i] = [-x for x in U[i]]

    t = 0
    while t < min(m, n):
        # find a nonzero pivot in the remaining block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0:
                    if piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            # clear the pivot column
            dirty = False
            for i in range(t + 1, m):
                if A[i][t] != 0:
                    q = A[i][t] // A[t][t]
                    addmul_row(i, t, -q)
                    if A[i][t] != 0:
                        swap_rows(i, t)
                        dirty = True
            for j in range(t + 1, n):
                if A[t][j] != 0:
                    q = A[t][j] // A[t][t]
                    addmul_col(j, t, -q)
                    if A[t][j] != 0:
                        swap_cols(j, t)
                        dirty = True
            if not dirty:
                break
        # make the pivot divide every remaining entry
        fixed = True
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % A[t][t] != 0:
                    addmul_row(t, i, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        if A[t][t] < 0:
            negate_row(t)
        t += 1

    return U, A, V


def snf_diagonal(A):
    """Invariant factors of A (the diagonal of D)."""
    _, D, _ = smith_normal_form(A)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


def _mat_vec(A, v):
    return [sum(A[i][j] * v[j] for j in range(len(v))) for i in range(len(A))]


def lattice_contains(gens: Sequence[Sequence[Fraction]], y: Sequence[Fraction]) -> bool:
    """Does y lie in the lattice spanned (over Z) by the columns gens?

    Exact: clears denominators, then solves with the Smith normal form.
    """
    cols = [list(map(Fraction, g)) for g in gens]
    y = list(map(Fraction, y))
    d = 1
    for vec in cols + [y]:
        for v in vec:
            d = lcm(d, v.denominator)
    G = [[int(cols[j][i] * d) for j in range(len(cols))] for i in range(len(y))]
    yi = [int(v * d) for v in y]
    U, D, V = smith_normal_form(G)
    rhs = _mat_vec(U, yi)
    r = min(len(D), len(D[0]) if D else 0)
    for i in range(len(rhs)):
        di = D[i][i] if i < r else 0
        if di == 0:
            if rhs[i] != 0:
                return False
        elif rhs[i] % di != 0:
            return False
    return True


# -- gauge-existence criteria --------------------------------------------------

def surface_gauge_options(cusps: int, orientable: bool, B_class: Fraction):
    """Which vector potentials exist for a field on a hyperbolic surface.

    Non-orientable, or orientable with >= 2 cusps: both trapping and
    non-trapping potentials exist for every field. Orientable one-cusp:
    everything is decided by the integrality of B_class = int_X B / (2*pi).
    """
    if cusps < 1:
        raise ValueError("cusps must be >= 1")
    if not orientable or cusps >= 2:
        return {"trapping_exists": True, "non_trapping_exists": True}
    B_class = Fraction(B_class)
    integral = B_class.denominator == 1
    return {"trapping_exists": not integral, "non_trapping_exists": integral}


@dataclass(frozen=True)
class CohomologyPresentation:
    """User-supplied integer presentation of the boundary restriction image.

    boundary_rank: per-component first Betti numbers (2 per torus cusp of a
    3-manifold). L_basis: integer matrix whose columns span
    L = i_M(H^1(X;Z)) inside the direct sum of the H^1(M_j;Z). dim is the
    manifold dimension tag, orientable the orientation tag.
    """

    boundary_rank: Tuple[int, ...]
    L_basis: Tuple[Tuple[int, ...], ...]  # rows: ambient coordinates, cols: generators
    dim: int = 3
    orientable: bool = True

    def __post_init__(self):
        total = sum(self.boundary_rank)
        if any(len(row) != len(self.L_basis[0]) for row in self.L_basis):
            raise ValueError("ragged L_basis")
        if len(self.L_basis) != total:
            raise ValueError("L_basis row count != total boundary rank")
        diag = snf_diagonal([list(r) for r in self.L_basis])
        if any(d == 0 for d in diag) or len(diag) < len(self.L_basis[0]):
            raise ValueError("L_basis not of full column rank")


def three_manifold_gauge(pres: CohomologyPresentation, B_components: Sequence[Fraction]):
    """Existence of a non-trapping potential for a field vanishing on the boundary
    of an orientable 3-manifold, plus the least common denominator q of the
    per-cusp translate-subgroup generators.

    Coordinates: cusp j owns the ambient rows [off_j, off_j + rank_j); the
    supplied class component b_j multiplies that cusp's first basis covector.
    B admits a non-trapping potential iff some b_j * e_j lies in Z^{2h} + L*Q
    (translates of integer classes along L), decided exactly with the Smith
    normal form. q is the least common denominator of the per-component
    generators of {t : t*e_j in Z^{2h} + L*Q}.
    """
    if pres.dim != 3 or not pres.orientable:
        raise ValueError("presentation must be tagged as an orientable 3-manifold")
    h = len(pres.boundary_rank)
    B_components = [Fraction(b) for b in B_components]
    if len(B_components) != h:
        raise ValueError(f"{len(B_components)} class components for {h} cusps")
    total = sum(pres.boundary_rank)
    offsets = []
    off = 0
    for r in pres.boundary_rank:
        offsets.append(off)
        off += r

    gens = []
    exists = False
    for j in range(h):
        e = [Fraction(0)] * total
        e[offsets[j]] = Fraction(1)
        g = _translate_generator(pres.L_basis, e)
        gens.append(g)
        b = B_components[j]
        if b == 0:
            exists = True
        elif g == 0:
            # reference covector lies in span(L): every multiple is reachable
            exists = True
        elif g is not None and (b / g).denominator == 1:
            exists = True
    finite = [g for g in gens if g is not None and g != 0]
    q = 1
    for g in finite:
        q = lcm(q, g.denominator)
    return {"non_trapping_exists": exists, "q": q}


def _quotient_coords(L_basis, vec):
    """Coordinates of vec in a rational complement of span_Q(L), plus the
    images of the unit vectors (the quotient lattice generators)."""
    rows = len(L_basis)
    ncols = len(L_basis[0])
    # Solve [L | C] x = vec with C completing a basis; instead do Gaussian
    # elimination of L over Q and express the quotient as the kernel rows.
    M = [[Fraction(L_basis[i][j]) for j in range(ncols)] for i in range(rows)]
    # reduce M to column echelon, tracking the elimination on the identity:
    # find pivot rows of span(L); quotient coordinates = non-pivot rows after
    # eliminating pivot-row components.
    piv_rows = []
    col = 0
    work = [row[:] for row in M]
    elim = [[Fraction(int(i == j)) for j in range(rows)] for i in range(rows)]
    for c in range(ncols):
        sel = None
        for r in range(rows):
            if r in piv_rows:
                continue
            if work[r][c] != 0:
                sel = r
                break
        if sel is None:
            continue
        piv_rows.append(sel)
        inv = 1 / work[sel][c]
        work[sel] = [v * inv for v in work[sel]]
        elim[sel] = [v * inv for v in elim[sel]]
        for r in range(rows):
            if r != sel and work[r][c] != 0:
                f = work[r][c]
                work[r] = [a - f * b for a, b in zip(work[r], work[sel])]
                elim[r] = [a - f * b for a, b in zip(elim[r], elim[sel])]
    free_rows = [r for r in range(rows) if r not in piv_rows]
    # elim rows for free coordinates give the projection killing span(L)
    proj = [elim[r] for r in free_rows]
    return proj


def _translate_generator(L_basis, e):
    """Generator of the subgroup {t in Q : t*e in Z^rows + span_Q(L)}.

    Returns Fraction(0) when the projection of e along L vanishes (every t
    works), else the positive generator g with the subgroup equal to g*Z.
    """
    proj = _quotient_coords(L_basis, e)
    if not proj:
        return Fraction(0)
    rows = len(L_basis)
    q_e = [sum(P[i] * e[i] for i in range(rows)) for P in proj]
    if all(v == 0 for v in q_e):
        return Fraction(0)
    # quotient lattice: images of the unit vectors under the projection
    unit_images = [[proj[k][j] for k in range(len(proj))] for j in range(rows)]
    c = _basis_coordinates(unit_images, q_e)
    if c is None:
        return None
    per = [Fraction(ci.denominator, abs(ci.numerator)) for ci in c if ci != 0]
    if not per:
        return Fraction(0)
    return _lcm_fractions(per)


def _basis_coordinates(gens, y):
    """Coordinates of y in a Z-basis of the lattice spanned by gens.

    Returns rationals c with y = sum c_i beta_i for a Smith basis beta of the
    lattice, or None when y is outside the rational span. t*y lies in the
    lattice iff every t*c_i is an integer.
    """
    d = 1
    for g in gens:
        for v in g:
            d = lcm(d, Fraction(v).denominator)
    rows = len(y)
    cols = len(gens)
    G = [[int(Fraction(gens[j][i]) * d) for j in range(cols)] for i in range(rows)]
    U, D, _ = smith_normal_form(G)
    rank = sum(1 for i in range(min(rows, cols)) if D[i][i] != 0)
    # lattice(G)/d has Smith basis (1/d) U^-1 (D_ii e_i); coordinates of y are
    # (U (d y))_i / D_ii, provided the rows beyond the rank vanish.
    dy = [Fraction(y[i]) * d for i in range(rows)]
    rhs = [sum(Fraction(U[i][j]) * dy[j] for j in range(rows)) for i in range(rows)]
    for i in range(rank, rows):
        if rhs[i] != 0:
            return None
    return [rhs[i] / D[i][i] for i in range(rank)]
