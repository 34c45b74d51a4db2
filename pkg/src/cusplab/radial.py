"""Half-line radial operators of the diagonalized cusp model.

On each transverse mode mu the operator is

    H_mu = -d^2/dr^2 + V_p(r) + Q_p(r) * mu      on [r0, r_max], Dirichlet,

with V_1 = ((n-1)/2)^2, Q_1 = e^{2r} and, for p < 1,
V_p = c0_eff / r^2, Q_p = ((1-p) r)^{2p/(1-p)} where

    c0_eff = c0^2/(1-p)^2 - 1/4,     c0 = ((2-n)p - 1)/2.

The c0_eff formula is fixed by the derivation oracle (conjugating the
x-coordinate operator D*D + c0^2 x^{2-2p} through the x^{(n-1)p/2}
multiplication and the z = L(x) substitution); a config override is honored.
Discretization: uniform 3-point stencil, diag_i = 2/h^2 + potential(r_i),
offdiag = -1/h^2. Eigenvalue counting by Sturm pivots (numba kernel),
eigenvalues by lockstep bisection. p > 1 (metric horns) is handled by the
x-coordinate variant horn_ground_state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
import numba
import scipy.linalg

from .model import Grid, ManifoldSpec, PotentialSpec
from .topology import classify_potential
from .transverse import mode_spectrum


@numba.njit(cache=True, nogil=True)
def _sturm_kernel(diag, lams, inv_h2):
    """Eigenvalue counts below each lam for the tridiagonal (diag, -inv_h2)."""
    m = diag.shape[0]
    out = np.zeros(lams.shape[0], dtype=np.int64)
    g = inv_h2 * inv_h2
    for l in range(lams.shape[0]):
        lam = lams[l]
        d = 1.0
        cnt = 0
        for i in range(m):
            if i == 0:
                d = diag[0] - lam
            else:
                d = diag[i] - lam - g / d
            if d == 0.0:
                d = 1e-300
            if d < 0.0:
                cnt += 1
        out[l] = cnt
    return out


def cusp_potentials(spec: ManifoldSpec, c0_eff_override: Optional[float] = None):
    """(V, Q, c0_eff) callables for the radial model; p <= 1 only."""
    n = spec.n
    p = float(spec.p)
    if spec.p == 1:
        v0 = ((n - 1) / 2.0) ** 2

        def V(r):
            return np.full_like(np.asarray(r, dtype=float), v0)

        def Q(r):
            return np.exp(2.0 * np.asarray(r, dtype=float))

        return V, Q, None
    if spec.p < 1:
        c0 = ((2 - n) * p - 1.0) / 2.0
        c0_eff = c0 * c0 / (1.0 - p) ** 2 - 0.25
        if c0_eff_override is not None:
            c0_eff = float(c0_eff_override)
        ex = 2.0 * p / (1.0 - p)

        def V(r):
            r = np.asarray(r, dtype=float)
            return c0_eff / (r * r)

        def Q(r):
            r = np.asarray(r, dtype=float)
            return ((1.0 - p) * r) ** ex

        return V, Q, c0_eff
    raise ValueError("r-coordinate model requires p <= 1 (use horn_ground_state for p > 1)")


@dataclass(frozen=True)
class ShortRangePotential:
    """Pointwise potential W with sup |L^{1+eps} W| finite on the grid."""

    W: Callable[[np.ndarray], np.ndarray]
    eps: float = 0.5


@dataclass(frozen=True)
class RadialConformal:
    """Radial conformal factor rho; applied as the first-order diagonal
    modification diag_i += rho(r_i) * (V(r_i) + mu Q(r_i))."""

    rho: Callable[[np.ndarray], np.ndarray]


Perturbation = Optional[object]  # None | ShortRangePotential | RadialConformal


@dataclass(frozen=True)
class RadialOperator:
    """Symmetric tridiagonal form of -d^2/dr^2 + V_p + Q_p*mu (+ perturbation)."""

    diag: np.ndarray
    offdiag: np.ndarray
    grid: Grid
    mode_mu: float
    n: int
    p: Fraction
    bc: str = "dirichlet-dirichlet"
    warn_coarse: bool = False

    @property
    def size(self):
        return self.diag.shape[0]

    def nodes(self):
        return self.grid.nodes()

    def weight(self, s: float):
        """Weight L(r)^{-s}, with the length function clamped below by 1."""
        return np.maximum(self.nodes(), 1.0) ** (-s)


def _length_scale(r):
    return np.maximum(r, 1.0)


def assemble(spec: ManifoldSpec, mode_mu: float, grid: Grid,
             pert: Perturbation = None,
             c0_eff_override: Optional[float] = None) -> RadialOperator:
    """Build the radial operator for one transverse eigenvalue."""
    V, Q, _ = cusp_potentials(spec, c0_eff_override)
    r = grid.nodes()
    h = float(grid.h)
    inv_h2 = 1.0 / (h * h)
    pot = V(r) + float(mode_mu) * Q(r)
    if isinstance(pert, ShortRangePotential):
        w = np.asarray(pert.W(r), dtype=float)
        weighted = np.abs(_length_scale(r) ** (1.0 + pert.eps) * w)
        head = weighted[: max(1, len(r) // 10)].max()
        tail = weighted[-max(1, len(r) // 10):].max()
        if tail > max(head, 1e-12) * 1.5:
            raise ValueError("perturbation is not short-range: L^{1+eps} W grows along the grid")
        pot = pot + w
    elif isinstance(pert, RadialConformal):
        rho = np.asarray(pert.rho(r), dtype=float)
        if rho.min() <= -1.0:
            raise ValueError("conformal factor must satisfy 1 + rho > 0")
        pot = pot + rho * (V(r) + float(mode_mu) * Q(r))
    elif pert is not None:
        raise TypeError(f"unknown perturbation {pert!r}")
    diag = 2.0 * inv_h2 + pot
    offdiag = np.full(len(r) - 1, -inv_h2)
    # coarseness heuristic at the inner boundary, where eigenfunctions
    # oscillate; the increasing barrier farther out only acts as a wall
    warn = bool(h * h * abs(pot[0]) > 1.0)
    return RadialOperator(diag=diag, offdiag=offdiag, grid=grid,
                          mode_mu=float(mode_mu), n=spec.n, p=spec.p,
                          warn_coarse=warn)


def sturm_count(op: RadialOperator, lam) -> int:
    """Number of eigenvalues strictly below lam."""
    inv_h2 = 1.0 / float(op.grid.h) ** 2
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    out = _sturm_kernel(op.diag, lams, inv_h2)
    return int(out[0]) if np.isscalar(lam) or np.asarray(lam).ndim == 0 else out


def eigenvalues_below(op: RadialOperator, lam_max: float, tol: float):
    """All eigenvalues < lam_max, each to within tol, sorted (all simple)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    inv_h2 = 1.0 / float(op.grid.h) ** 2
    k = int(_sturm_kernel(op.diag, np.array([float(lam_max)]), inv_h2)[0])
    if k == 0:
        return []
    lo = np.full(k, float(np.min(op.diag)) - 2.0 * inv_h2)
    hi = np.full(k, float(lam_max))
    targets = np.arange(1, k + 1)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        cnt = _sturm_kernel(op.diag, mid, inv_h2)
        below = cnt >= targets  # at least j eigenvalues < mid: root is left of mid
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return list(0.5 * (lo + hi))


@dataclass(frozen=True)
class GridPolicy:
    """h and r_max as functions of lambda (and mode), per the default policy:

    h = min(0.02, 0.5/sqrt(lam)), rounded down to a dyadic rational;
    r_max - r0 = max(40, 4 ln lam)                       for p = 1,
                 max(40, 8 lam^{(1-p)/(2p)} / (1-p))     for p < 1.
    Per-mode grids stop at that mode's classical turning point plus an
    Airy-width margin (Dirichlet truncation; the omitted tail holds no
    spectrum below lam up to an exponentially small deficit).
    """

    h_cap: float = 0.02
    waves_per_h: float = 0.5
    min_length: float = 40.0
    h_override: Optional[Fraction] = None
    r_max_override: Optional[Fraction] = None

    def h(self, lam_max: float) -> Fraction:
        if self.h_override is not None:
            return Fraction(self.h_override)
        target = min(self.h_cap, self.waves_per_h / math.sqrt(max(lam_max, 1.0)))
        return Fraction(1, 2 ** math.ceil(math.log2(1.0 / target)))

    def length(self, spec: ManifoldSpec, lam_max: float) -> float:
        if self.r_max_override is not None:
            return float(self.r_max_override)
        p = float(spec.p)
        if spec.p == 1:
            return max(self.min_length, 4.0 * math.log(max(lam_max, 2.0)))
        return max(self.min_length,
                   8.0 * lam_max ** ((1.0 - p) / (2.0 * p)) / (1.0 - p))

    def mode_length(self, spec: ManifoldSpec, lam_max: float, mu: float,
                    r0: float) -> float:
        """Turning point of Q_p * mu at lam_max plus an Airy-width margin."""
        full = self.length(spec, lam_max)
        if self.r_max_override is not None or mu <= 0:
            return full
        p = float(spec.p)
        if spec.p == 1:
            turn = 0.5 * math.log(lam_max / mu)
            slope = 2.0 * lam_max
        else:
            turn = (lam_max / mu) ** ((1.0 - p) / (2.0 * p)) / (1.0 - p)
            ex = 2.0 * p / (1.0 - p)
            slope = mu * ex * (1.0 - p) * ((1.0 - p) * turn) ** (ex - 1.0) if turn > 0 else 1.0
        width = slope ** (-1.0 / 3.0) if slope > 0 else 1.0
        margin = max(12.0, 8.0 * width)
        return min(full, max(turn - r0, 0.0) + margin)


def default_grid(spec: ManifoldSpec, lam_max: float,
                 policy: Optional[GridPolicy] = None,
                 length: Optional[float] = None) -> Grid:
    """Grid starting at the end cutoff r0 = L(x0) (dyadic-rounded upward)."""
    from .model import radial_coordinate
    policy = policy or GridPolicy()
    r0f = radial_coordinate(spec, spec.truncation_x0)
    r0 = Fraction(math.ceil(r0f * 65536), 65536)
    h = policy.h(lam_max)
    L = length if length is not None else policy.length(spec, lam_max)
    steps = max(8, int(math.ceil(L / float(h))))
    return Grid(r0=r0, r_max=r0 + steps * h, h=h)


def counting_function(spec: ManifoldSpec, pot: PotentialSpec, lam: float,
                      grid_policy: Optional[GridPolicy] = None,
                      continuum_ok: bool = False,
                      threads: int = 1) -> int:
    """Mode-summed eigenvalue count N(lambda) of the end model."""
    return int(counting_profile(spec, pot, [lam], grid_policy=grid_policy,
                                continuum_ok=continuum_ok, threads=threads)[0])


def counting_profile(spec: ManifoldSpec, pot: PotentialSpec, lams: Sequence[float],
                     grid_policy: Optional[GridPolicy] = None,
                     continuum_ok: bool = False,
                     threads: int = 1) -> np.ndarray:
    """N(lambda) for several lambdas at once (shared per-mode assemblies).

    Trapping input: every transverse mode contributes a finite Sturm count.
    Non-trapping input: the zero mode has essential spectrum in the limit and
    the truncated count diverges with r_max; requires continuum_ok=True.
    Modes with mu * Q_p(r0) + min V > max(lams) contribute nothing (Q_p is
    increasing) and are not assembled.
    """
    verdict = classify_potential(spec, pot)
    if not verdict.trapping and not continuum_ok:
        raise ValueError("counting function diverges with r_max for non-trapping input; "
                         "pass continuum_ok=True to count the truncated spectrum")
    for e, c in zip(spec.ends, pot.components):
        comp_verdict = verdict.reason(e.label)
        if comp_verdict in ("phi0-nonconstant", "theta0-nonclosed"):
            raise ValueError(
                f"end {e.label}: spectral requests need the normalized form "
                "(constant phi0, closed theta0); only classification applies")
    policy = grid_policy or GridPolicy()
    lam_in = np.asarray([float(v) for v in lams], dtype=float)
    lam_arr = np.unique(lam_in)
    lam_max = float(lam_arr[-1])
    V, Q, _ = cusp_potentials(spec)
    h = policy.h(lam_max)
    from .model import radial_coordinate
    r0f = radial_coordinate(spec, spec.truncation_x0)
    r0 = Fraction(math.ceil(r0f * 65536), 65536)
    q_r0 = float(Q(float(r0)))
    # exact lower bound of V: constant for p=1, positive for p<1 (c0_eff > 0)
    v_min = ((spec.n - 1) / 2.0) ** 2 if spec.p == 1 else 0.0

    jobs = []
    for e, c in zip(spec.ends, pot.components):
        modes = mode_spectrum(e, c.flux, max((lam_max - v_min) / q_r0, 0.0),
                              label=e.label)
        for mu, mult, _ in modes.entries:
            jobs.append((mu, mult))
    jobs.sort()

    def run(job):
        mu, mult = job
        L = policy.mode_length(spec, lam_max, mu, float(r0))
        steps = max(8, int(math.ceil(L / float(h))))
        grid = Grid(r0=r0, r_max=r0 + steps * h, h=h)
        op = assemble(spec, mu, grid)
        return mult * _sturm_kernel(op.diag, lam_arr, 1.0 / float(h) ** 2)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    total = np.zeros(len(lam_arr), dtype=np.int64)
    for part in parts:
        total += part
    return total[np.searchsorted(lam_arr, lam_in)]


def weighted_resolvent_norm(op: RadialOperator, z: complex, s_weight: float,
                            tol: float = 1e-8, max_iter: int = 2000) -> float:
    """Operator norm of W_s (H - z)^{-1} W_s, W_s = L(r)^{-s}, by power iteration."""
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("z must have nonzero imaginary part")
    if not (0.5 < s_weight < 1.5):
        raise ValueError("s_weight must lie in (1/2, 3/2)")
    m = op.size
    W = op.weight(s_weight)
    ab = np.zeros((3, m), dtype=complex)
    ab[0, 1:] = op.offdiag
    ab[1, :] = op.diag - z
    ab[2, :-1] = op.offdiag
    abH = np.zeros((3, m), dtype=complex)
    abH[0, 1:] = np.conj(op.offdiag)
    abH[1, :] = np.conj(op.diag - z)
    abH[2, :-1] = np.conj(op.offdiag)

    rng = np.random.default_rng(20240101)
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        u = W * scipy.linalg.solve_banded((1, 1), ab, W * v)
        u = W * scipy.linalg.solve_banded((1, 1), abH, W * u)
        nrm = np.linalg.norm(u)
        v = u / nrm
        if abs(nrm - prev) <= tol * nrm:
            return math.sqrt(nrm)
        prev = nrm
    raise RuntimeError("power iteration did not converge")


def horn_ground_state(spec: ManifoldSpec, eps: Fraction, npoints: int = 800) -> float:
    """Ground state of the x-coordinate horn model on (0, eps], Dirichlet.

    For p > 1 the low-energy operator D*D + c0^2 x^{2-2p} (x-coordinates,
    measure x^{np-2} dx) is discretized in divergence form after the unitary
    to L^2(dx); its ground state blows up like eps^{2-2p} as eps -> 0.
    """
    if spec.p <= 1:
        raise ValueError("horn model is the p > 1 regime")
    n = spec.n
    p = float(spec.p)
    c0 = ((2 - n) * p - 1.0) / 2.0
    e = float(eps)
    hx = e / npoints
    x = hx * np.arange(1, npoints)          # interior nodes
    xm = hx * (np.arange(npoints) + 0.5)    # midpoints, one per interval
    alpha = xm ** (2.0 - p) / hx
    beta = 0.5 * ((2.0 * p - 3.0) / 2.0) * xm ** (1.0 - p)
    lower = alpha + beta    # coefficient of phi_i in (B phi)_m
    upper = alpha - beta    # coefficient of phi_{i+1}
    diag = lower[1:] ** 2 + upper[:-1] ** 2 + c0 * c0 * x ** (2.0 - 2.0 * p)
    off = -(alpha[1:-1] ** 2 - beta[1:-1] ** 2)
    w = scipy.linalg.eigh_tridiagonal(diag, off, select="i",
                                      select_range=(0, 0), eigvals_only=True)
    return float(w[0])
