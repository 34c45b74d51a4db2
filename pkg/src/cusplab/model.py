"""Domain model for conformally cusp ends and vector-potential boundary data.

Geometry convention: the end is 0 < x <= x0 with metric x^(2p) (dx^2/x^4 + h0),
h0 flat on each boundary component. Circle lengths are stored as rational
multiples of 2*pi and torus Gram matrices as rational multiples of (2*pi)^2,
so transverse eigenvalues and flux-integrality tests stay in exact rational
arithmetic (see docs/config.md). Fluxes are holonomy classes already divided
by 2*pi: integrality of the flux vector is the non-trapping test.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple


class ConfigError(ValueError):
    """Configuration rejected; carries a location (line/col) or a field path."""

    def __init__(self, message, line=None, col=None, path=None):
        self.line = line
        self.col = col
        self.path = path
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "") + ": "
        elif path:
            where = f"{path}: "
        super().__init__(where + message)


def _frac(text, line=None, path=None):
    """Parse an exact rational written as 'p/q' or an integer string."""
    s = text.strip()
    m = re.fullmatch(r"([+-]?\d+)\s*(?:/\s*([+-]?\d+))?", s)
    if not m:
        raise ConfigError(f"expected a rational p/q, got {text!r}", line=line, path=path)
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ConfigError("zero denominator", line=line, path=path)
    return Fraction(num, den)


@dataclass(frozen=True)
class BoundaryComponent:
    """One boundary component: a circle (n=2 only) or a flat torus.

    length_2pi: circle circumference divided by 2*pi (circles only).
    gram_2pi:   Gram matrix of the lattice generators divided by (2*pi)^2
                (tori only), symmetric positive definite, exact rationals.
    """

    kind: str  # "circle" | "torus"
    label: str
    length_2pi: Optional[Fraction] = None
    gram_2pi: Optional[Tuple[Tuple[Fraction, ...], ...]] = None

    def __post_init__(self):
        if self.kind == "circle":
            if self.length_2pi is None or self.length_2pi <= 0:
                raise ConfigError("circle needs a positive length",
                                  path=f"end.{self.label}.length")
        elif self.kind == "torus":
            g = self.gram_2pi
            if g is None:
                raise ConfigError("torus needs a gram matrix",
                                  path=f"end.{self.label}.gram")
            d = len(g)
            if any(len(row) != d for row in g):
                raise ConfigError("gram matrix not square",
                                  path=f"end.{self.label}.gram")
            for i in range(d):
                for j in range(d):
                    if g[i][j] != g[j][i]:
                        raise ConfigError("gram matrix not symmetric",
                                          path=f"end.{self.label}.gram")
            # positive definiteness via leading principal minors, exact.
            for k in range(1, d + 1):
                if _minor_det(g, k) <= 0:
                    raise ConfigError("not positive definite",
                                      path=f"end.{self.label}.gram")
        else:
            raise ConfigError(f"unknown end kind {self.kind!r}",
                              path=f"end.{self.label}.kind")

    @property
    def cross_dim(self):
        return 1 if self.kind == "circle" else len(self.gram_2pi)

    @property
    def b1(self):
        """First Betti number of the component."""
        return self.cross_dim

    def volume(self):
        """Riemannian volume of (M_alpha, h0) as a float."""
        if self.kind == "circle":
            return 2.0 * math.pi * float(self.length_2pi)
        d = len(self.gram_2pi)
        det = _minor_det(self.gram_2pi, d)
        return (2.0 * math.pi) ** d * math.sqrt(float(det))


def _minor_det(g, k):
    """Exact determinant of the leading k x k block (fraction-free expansion)."""
    rows = [list(row[:k]) for row in g[:k]]
    det = Fraction(1)
    for i in range(k):
        piv = None
        for r in range(i, k):
            if rows[r][i] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != i:
            rows[i], rows[piv] = rows[piv], rows[i]
            det = -det
        det *= rows[i][i]
        for r in range(i + 1, k):
            f = rows[r][i] / rows[i][i]
            for c in range(i, k):
                rows[r][c] -= f * rows[i][c]
    return det


@dataclass(frozen=True)
class ManifoldSpec:
    """Dimension, cusp exponent, boundary components, and the end cutoff x0."""

    n: int
    p: Fraction
    ends: Tuple[BoundaryComponent, ...]
    truncation_x0: Fraction
    core_volume: Fraction = Fraction(0)

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("dimension n must be >= 2", path="n")
        if self.p <= 0:
            raise ConfigError("exponent p must be positive", path="p")
        if self.truncation_x0 <= 0:
            raise ConfigError("x0 must be positive", path="x0")
        if not self.ends:
            raise ConfigError("at least one boundary component required", path="ends")
        for e in self.ends:
            if e.cross_dim != self.n - 1:
                raise ConfigError(
                    f"cross-section dimension {e.cross_dim} != n-1 = {self.n - 1}",
                    path=f"end.{e.label}")
            if e.kind == "circle" and self.n != 2:
                raise ConfigError("circle ends only in dimension 2",
                                  path=f"end.{e.label}.kind")

    @property
    def complete(self):
        """The metric is complete iff p <= 1; p > 1 is the (incomplete) horn regime."""
        return self.p <= 1

    def end(self, label):
        for e in self.ends:
            if e.label == label:
                return e
        raise KeyError(label)


@dataclass(frozen=True)
class ComponentPotential:
    """Boundary data of the vector potential on one component.

    phi0_samples holds exact samples of phi(0) on the component; a single
    sample means the constant function. flux is the holonomy class [theta0]/2pi
    in the integer basis of H^1 (length b1). closed says whether theta0 is
    closed; non-closed components are classified but never given mode spectra.
    """

    phi0_samples: Tuple[Fraction, ...]
    flux: Tuple[Fraction, ...]
    closed: bool = True

    @property
    def phi0_constant(self):
        return len(set(self.phi0_samples)) == 1

    @property
    def flux_integral(self):
        return all(a.denominator == 1 for a in self.flux)


@dataclass(frozen=True)
class PotentialSpec:
    """Per-component boundary data, keyed in the order of ManifoldSpec.ends."""

    components: Tuple[ComponentPotential, ...]

    def component(self, i):
        return self.components[i]


def validate_pair(spec: ManifoldSpec, pot: PotentialSpec):
    """Cross-checks between the manifold and the potential."""
    if len(pot.components) != len(spec.ends):
        raise ConfigError(
            f"{len(pot.components)} potential components for {len(spec.ends)} ends",
            path="ends")
    for e, c in zip(spec.ends, pot.components):
        if len(c.flux) != e.b1:
            raise ConfigError(
                f"flux length {len(c.flux)} != b1 = {e.b1}",
                path=f"end.{e.label}.flux")
        if not c.phi0_samples:
            raise ConfigError("phi0 needs at least one sample",
                              path=f"end.{e.label}.phi0")


@dataclass(frozen=True)
class Grid:
    """Uniform radial grid on [r0, r_max] with Dirichlet ends.

    The operator acts on the (r_max - r0)/h - 1 interior nodes. All three
    fields are exact rationals; node coordinates are floats.
    """

    r0: Fraction
    r_max: Fraction
    h: Fraction

    def __post_init__(self):
        if self.r_max <= self.r0:
            raise ValueError("r_max must exceed r0")
        if self.h <= 0:
            raise ValueError("h must be positive")
        steps = (self.r_max - self.r0) / self.h
        if steps.denominator != 1 or steps < 8:
            raise ValueError("(r_max - r0)/h must be an integer >= 8")

    @property
    def steps(self):
        return int((self.r_max - self.r0) / self.h)

    @property
    def n_interior(self):
        return self.steps - 1

    def nodes(self):
        import numpy as np
        return float(self.r0) + float(self.h) * np.arange(1, self.steps)


# -- config grammar ---------------------------------------------------------

_KEY_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_SECTION_RE = re.compile(r"^\[end\.([A-Za-z_][A-Za-z0-9_-]*)\]$")


def _parse_bool(text, line):
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}", line=line)


def _parse_matrix(text, line, path):
    """Bracketed row lists of rationals: [[1, 0], [0, 1]]."""
    s = text.strip()
    if not (s.startswith("[[") and s.endswith("]]")):
        raise ConfigError("matrix must look like [[a, b], [c, d]]", line=line, path=path)
    rows = []
    body = s[1:-1].strip()
    depth = 0
    cur = ""
    parts = []
    for ch in body:
        if ch == "[":
            depth += 1
            if depth == 1:
                cur = ""
                continue
        if ch == "]":
            depth -= 1
            if depth == 0:
                parts.append(cur)
                continue
        if depth >= 1:
            cur += ch
    for part in parts:
        row = tuple(_frac(t, line=line, path=path) for t in part.split(",") if t.strip())
        rows.append(row)
    if not rows:
        raise ConfigError("empty matrix", line=line, path=path)
    return tuple(rows)


def _parse_phi0(text, line, path):
    s = text.strip()
    m = re.fullmatch(r"samples\s*\((.*)\)", s)
    if m:
        vals = tuple(_frac(t, line=line, path=path) for t in m.group(1).split(",") if t.strip())
        if not vals:
            raise ConfigError("samples(...) needs at least one value", line=line, path=path)
        return vals
    return (_frac(s, line=line, path=path),)


def require_normalized(spec: ManifoldSpec, pot: PotentialSpec):
    """Refuse spectral requests on components outside the normalized form
    (constant phi0 and closed theta0); those are classification-only."""
    validate_pair(spec, pot)
    for e, c in zip(spec.ends, pot.components):
        if not c.phi0_constant:
            raise ValueError(
                f"end {e.label}: spectral requests need constant phi0 "
                "(non-constant components are classification-only)")
        if not c.closed:
            raise ValueError(
                f"end {e.label}: spectral requests need closed theta0 "
                "(non-closed components are classification-only)")


def parse_spec(text: str):
    """Parse a configuration document into a validated (ManifoldSpec, PotentialSpec).

    Grammar: `key = value` lines, `[end.<label>]` section headers, `#` comments.
    Rationals are written p/q; lengths are in units of 2*pi, Gram matrices in
    units of (2*pi)^2; see docs/config.md. Defaults (core_volume=0, phi0=0,
    flux=0, closed=true) are applied here and echoed by serialize_spec.
    """
    top = {}
    sections = []  # (label, dict, line)
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = _SECTION_RE.match(line)
            if not m:
                raise ConfigError("bad section header (expected [end.<label>])",
                                  line=lineno, col=1)
            label = m.group(1)
            if any(lbl == label for lbl, _, _ in sections):
                raise ConfigError(f"duplicate end label {label!r}", line=lineno)
            current = {}
            sections.append((label, current, lineno))
            continue
        m = _KEY_RE.match(line)
        if not m:
            col = len(raw) - len(raw.lstrip()) + 1
            raise ConfigError(f"expected key = value, got {line!r}", line=lineno, col=col)
        key, val = m.group(1), m.group(2).strip()
        target = top if current is None else current
        if key in target:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        target[key] = (val, lineno)
    return _build_specs(top, sections)


def _build_specs(top, sections):
    def need(d, key, where):
        if key not in d:
            raise ConfigError(f"missing required key {key!r}", path=where)
        return d[key]

    nval, nline = need(top, "n", "n")
    n_f = _frac(nval, line=nline, path="n")
    if n_f.denominator != 1:
        raise ConfigError("n must be an integer", line=nline, path="n")
    n = int(n_f)
    pval, pline = need(top, "p", "p")
    p = _frac(pval, line=pline, path="p")
    x0val, x0line = need(top, "x0", "x0")
    x0 = _frac(x0val, line=x0line, path="x0")
    core = Fraction(0)
    if "core_volume" in top:
        core = _frac(top["core_volume"][0], line=top["core_volume"][1], path="core_volume")
    known_top = {"n", "p", "x0", "core_volume"}
    for k in top:
        if k not in known_top:
            raise ConfigError(f"unknown key {k!r}", line=top[k][1], path=k)

    if not sections:
        raise ConfigError("no [end.<label>] sections", path="ends")

    ends = []
    pots = []
    for label, sec, secline in sections:
        where = f"end.{label}"
        kind_val, kind_line = need(sec, "kind", f"{where}.kind")
        kind = kind_val.strip().lower()
        if kind == "circle":
            lval, lline = need(sec, "length", f"{where}.length")
            comp = BoundaryComponent(kind="circle", label=label,
                                     length_2pi=_frac(lval, line=lline, path=f"{where}.length"))
        elif kind == "torus":
            gval, gline = need(sec, "gram", f"{where}.gram")
            comp = BoundaryComponent(kind="torus", label=label,
                                     gram_2pi=_parse_matrix(gval, gline, f"{where}.gram"))
        else:
            raise ConfigError(f"unknown kind {kind_val!r}", line=kind_line,
                              path=f"{where}.kind")
        b1 = comp.b1
        if "flux" in sec:
            fval, fline = sec["flux"]
            flux = tuple(_frac(t, line=fline, path=f"{where}.flux")
                         for t in fval.split(",") if t.strip())
        else:
            flux = tuple(Fraction(0) for _ in range(b1))
        if len(flux) != b1:
            raise ConfigError(f"flux length {len(flux)} != b1 = {b1}",
                              path=f"{where}.flux")
        if "phi0" in sec:
            phi0 = _parse_phi0(sec["phi0"][0], sec["phi0"][1], f"{where}.phi0")
        else:
            phi0 = (Fraction(0),)
        closed = True
        if "closed" in sec:
            closed = _parse_bool(sec["closed"][0], sec["closed"][1])
        known = {"kind", "length", "gram", "flux", "phi0", "closed"}
        for k in sec:
            if k not in known:
                raise ConfigError(f"unknown key {k!r}", line=sec[k][1], path=f"{where}.{k}")
        ends.append(comp)
        pots.append(ComponentPotential(phi0_samples=phi0, flux=flux, closed=closed))

    spec = ManifoldSpec(n=n, p=p, ends=tuple(ends), truncation_x0=x0, core_volume=core)
    pot = PotentialSpec(components=tuple(pots))
    validate_pair(spec, pot)
    return spec, pot


def serialize_spec(spec: ManifoldSpec, pot: PotentialSpec) -> str:
    """Canonical config text; parse(serialize(...)) is the identity."""
    out = [f"n = {spec.n}", f"p = {spec.p}", f"x0 = {spec.truncation_x0}",
           f"core_volume = {spec.core_volume}"]
    for e, c in zip(spec.ends, pot.components):
        out.append("")
        out.append(f"[end.{e.label}]")
        out.append(f"kind = {e.kind}")
        if e.kind == "circle":
            out.append(f"length = {e.length_2pi}")
        else:
            rows = ", ".join("[" + ", ".join(str(v) for v in row) + "]"
                             for row in e.gram_2pi)
            out.append(f"gram = [{rows}]")
        out.append("flux = " + ", ".join(str(a) for a in c.flux))
        if len(c.phi0_samples) == 1:
            out.append(f"phi0 = {c.phi0_samples[0]}")
        else:
            out.append("phi0 = samples(" + ", ".join(str(v) for v in c.phi0_samples) + ")")
        out.append(f"closed = {'true' if c.closed else 'false'}")
    return "\n".join(out) + "\n"


# -- exact geometric quantities ---------------------------------------------

INFINITE = float("inf")


def end_volume(spec: ManifoldSpec, component: BoundaryComponent):
    """Volume of the end (0, x0] x M_alpha in the metric g_p.

    The volume element is x^(np-2) dx vol_h0, so the radial integral is
    x0^(np-1)/(np-1) for np > 1 and divergent otherwise (returns inf).
    """
    if component not in spec.ends:
        raise ValueError("component does not belong to spec")
    np1 = spec.n * spec.p - 1
    if np1 <= 0:
        return INFINITE
    radial = spec.truncation_x0 ** np1 / np1 if spec.truncation_x0 ** np1 else Fraction(0)
    return component.volume() * float(radial)


def radial_coordinate(spec: ManifoldSpec, x) -> float:
    """Geodesic-length coordinate r = L(x): -ln x for p=1, x^(p-1)/(1-p) for p<1.

    Strictly decreasing in x; r(x0) is the left endpoint of radial grids.
    """
    x = Fraction(x)
    if not (0 < x <= spec.truncation_x0):
        raise ValueError("x must lie in (0, x0]")
    if spec.p == 1:
        return -math.log(float(x))
    if spec.p < 1:
        return float(x) ** (float(spec.p) - 1.0) / float(1 - spec.p)
    raise ValueError("radial coordinate defined for p <= 1 (p > 1 is the horn regime)")
