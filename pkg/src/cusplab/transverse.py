"""Spectra of the boundary magnetic Laplacian on circle and flat-torus components.

With lengths in units of 2*pi and Gram matrices in units of (2*pi)^2 (see
model docstring), the eigenvalues are exact rationals:

    circle:  mu_k = ((k + a) / l)^2,          k in Z,
    torus:   mu_k = (k + a)^T W (k + a),      k in Z^{n-1},  W = gram^{-1}.

Equal-norm lattice points are grouped by exact rational comparison before any
float conversion, so multiplicities are exact. The zero eigenvalue appears
iff the flux vector is integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .model import BoundaryComponent, ManifoldSpec, PotentialSpec
from .topology import classify_potential


@dataclass(frozen=True)
class ModeSpectrum:
    """Transverse modes of one boundary component, sorted ascending.

    entries: (mu, multiplicity, indices) with mu a float computed from the
    exact rational mu_exact; indices lists the lattice points sharing that
    eigenvalue, sorted lexicographically. holonomy echoes the flux vector.
    """

    entries: Tuple[Tuple[float, int, Tuple[Tuple[int, ...], ...]], ...]
    mu_exact: Tuple[Fraction, ...]
    mu_max: float
    label: str
    holonomy: Tuple[Fraction, ...]

    def counting(self, mu: float) -> int:
        """Number of modes (with multiplicity) of eigenvalue <= mu."""
        return sum(m for v, m, _ in self.entries if v <= mu)

    def total_multiplicity(self) -> int:
        return sum(m for _, m, _ in self.entries)


def _gram_inverse(gram):
    """Exact inverse of a rational symmetric positive-definite matrix."""
    d = len(gram)
    aug = [[Fraction(gram[i][j]) for j in range(d)] +
           [Fraction(int(i == k)) for k in range(d)] for i in range(d)]
    for i in range(d):
        piv = None
        for r in range(i, d):
            if aug[r][i] != 0:
                piv = r
                break
        aug[i], aug[piv] = aug[piv], aug[i]
        inv = 1 / aug[i][i]
        aug[i] = [v * inv for v in aug[i]]
        for r in range(d):
            if r != i and aug[r][i] != 0:
                f = aug[r][i]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[i])]
    return [row[d:] for row in aug]


def mode_spectrum(component: BoundaryComponent, a, mu_max: float,
                  label=None) -> ModeSpectrum:
    """Enumerate all transverse eigenvalues <= mu_max for holonomy vector a.

    Enumeration walks the axis-aligned bounding box of the ellipsoid
    mu <= mu_max with an exact rational test per lattice point.
    """
    if mu_max < 0:
        raise ValueError("mu_max must be >= 0")
    a = tuple(Fraction(v) for v in a)
    if len(a) != component.b1:
        raise ValueError(f"flux length {len(a)} != b1 = {component.b1}")

    groups = {}
    if component.kind == "circle":
        ell = component.length_2pi
        W = [[1 / (ell * ell)]]
    else:
        W = _gram_inverse(component.gram_2pi)
    d = len(W)
    # box half-widths: max |x_i| over {x^T W x <= mu_max} is sqrt(mu_max * G_ii)
    G = component.gram_2pi if component.kind == "torus" else ((ell * ell,),)
    half = [int(math.floor(math.sqrt(float(mu_max) * float(G[i][i])) + float(abs(a[i])))) + 1
            for i in range(d)]

    def visit(idx):
        v = [Fraction(idx[i]) + a[i] for i in range(d)]
        mu = Fraction(0)
        for i in range(d):
            for j in range(d):
                mu += v[i] * W[i][j] * v[j]
        if float(mu) <= mu_max:
            groups.setdefault(mu, []).append(tuple(idx))

    def walk(pos, idx):
        if pos == d:
            visit(idx)
            return
        for k in range(-half[pos], half[pos] + 1):
            walk(pos + 1, idx + [k])

    walk(0, [])
    entries = []
    exact = []
    for mu in sorted(groups):
        pts = sorted(groups[mu])
        entries.append((float(mu), len(pts), tuple(pts)))
        exact.append(mu)
    return ModeSpectrum(entries=tuple(entries), mu_exact=tuple(exact),
                        mu_max=float(mu_max),
                        label=label if label is not None else component.label,
                        holonomy=a)


def kernel_dimension(spec: ManifoldSpec, pot: PotentialSpec) -> int:
    """Dimension of the transverse zero-mode space: the number of boundary
    components on which the potential is non-trapping."""
    verdict = classify_potential(spec, pot)
    return sum(1 for _, trapping, _ in verdict.components if not trapping)


def _tail_bound(d: int, s: float, R: float, rho: float, covol: float) -> float:
    """Upper bound on sum_{mu > R^2} mu^-s by integral comparison.

    Lattice points beyond W-norm R are compared to the volume integral with
    the norm deflated by the cell diameter rho; a factor 2 covers the edge
    ring. Requires 2s > d and R > 2*rho.
    """
    Rm = R - rho
    if Rm <= 0:
        return float("inf")
    ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    return 2.0 * ball / covol * d / (2.0 * s - d) * Rm ** (d - 2.0 * s)


def spectral_zeta(component: BoundaryComponent, a, s: float, tol: float,
                  return_detail=False):
    """zeta(Delta_A^{h0}, s) = sum над mu_k > 0 of mu_k^-s to accuracy tol.

    The zero eigenvalue (present only for integral flux) is always excluded.
    Enumerates mu <= R^2 and bounds the tail by integral comparison, growing
    R until the bound drops below tol. Requires s > (n-1)/2, the abscissa of
    convergence of the lattice sum.
    """
    d = component.b1
    if s <= d / 2.0:
        raise ValueError(f"divergent: s must exceed (n-1)/2 = {d / 2}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = tuple(Fraction(v) for v in a)

    if component.kind == "circle":
        W = [[1 / (component.length_2pi ** 2)]]
        G = ((component.length_2pi ** 2,),)
    else:
        W = _gram_inverse(component.gram_2pi)
        G = component.gram_2pi
    # cell diameter in the W-norm (trace bounds lambda_max) and lattice covolume
    trW = sum(float(W[i][i]) for i in range(d))
    rho = math.sqrt(trW * d)
    from .model import _minor_det
    detW = float(_minor_det([[Fraction(W[i][j]) for j in range(d)] for i in range(d)], d))
    covol = math.sqrt(detW)

    R = max(8.0, 4.0 * rho)
    while True:
        bound = _tail_bound(d, s, R, rho, covol)
        if bound < tol:
            break
        R *= 1.5
        if R > 1e9:
            raise ValueError("tail bound does not reach tol (s too close to d/2?)")
    spectrum = mode_spectrum(component, a, R * R, label="zeta")
    terms = []
    for mu, mult, _ in spectrum.entries:
        if mu > 0.0:
            terms.append(mult * mu ** (-s))
    value = math.fsum(sorted(terms))
    if return_detail:
        return value, {"radius": R, "tail_bound": bound, "terms": len(terms)}
    return value
