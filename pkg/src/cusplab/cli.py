"""Command-line front end.

Subcommands bind the pipeline end to end: classify, modes, spectrum, weyl,
threshold, scan-coupling, mourre, holder, zeta, examples. The config file is
the single source of truth; flags override only documented scalar knobs.
Reports are deterministic (sorted keys, 17-significant-digit floats, LF) and
cached under --cache-dir keyed by (schema version, config digest, command,
overrides). Exit codes: 0 ok, 1 invalid config or unwritable path, 2 usage,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import shutil
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, model, radial, report, topology, transverse
from .report import SCHEMA_VERSION

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

COMMANDS = ("classify", "modes", "spectrum", "weyl", "threshold",
            "scan-coupling", "mourre", "holder", "zeta", "examples")


def _config_digest(canonical: str, command: str, overrides: dict) -> str:
    text = SCHEMA_VERSION + "\0" + command + "\0" + canonical + "\0"
    text += "\0".join(f"{k}={overrides[k]}" for k in sorted(overrides))
    return hashlib.sha256(text.encode()).hexdigest()


def _parse_fraction_list(text):
    return [Fraction(t.strip()) for t in text.split(",") if t.strip()]


def _parse_float_list(text):
    return [float(t.strip()) for t in text.split(",") if t.strip()]


class _Runner:
    """Loads the config, runs one command, writes artifacts and the manifest."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.cache_dir = Path(args.cache_dir) if args.cache_dir else self.out / ".cache"
        cfg_path = Path(args.config)
        try:
            text = cfg_path.read_text()
        except OSError as exc:
            raise model.ConfigError(f"cannot read config: {exc}")
        self.spec, self.pot = model.parse_spec(text)
        self.canonical = model.serialize_spec(self.spec, self.pot)

    def overrides(self):
        skip = {"config", "out", "format", "cache_dir", "no_cache", "threads", "command", "func"}
        out = {}
        for k, v in sorted(vars(self.args).items()):
            if k not in skip and v is not None:
                out[k] = str(v)
        return out

    def run(self, command, produce):
        overrides = self.overrides()
        digest = _config_digest(self.canonical, command, overrides)
        self.out.mkdir(parents=True, exist_ok=True)
        entry = self.cache_dir / digest
        t0 = time.monotonic()
        cached = False
        if not self.args.no_cache and (entry / "meta.json").exists():
            meta = (entry / "meta.json").read_text()
            if f'"schema_version": "{SCHEMA_VERSION}"' in meta:
                for f in sorted(entry.iterdir()):
                    if f.name != "meta.json":
                        shutil.copyfile(f, self.out / f.name)
                cached = True
        if not cached:
            files = produce()
            if not self.args.no_cache:
                entry.mkdir(parents=True, exist_ok=True)
                for name in files:
                    shutil.copyfile(self.out / name, entry / name)
                report.write_json(entry / "meta.json", {"command": command,
                                                        "digest": digest})
        manifest = {
            "command": command,
            "config_digest": digest,
            "overrides": overrides,
            "artifacts": sorted(p.name for p in self.out.iterdir()
                                if p.name not in ("manifest.json", ".cache")),
            "cache_hit": cached,
            "wall_time_s": time.monotonic() - t0,
        }
        report.write_json(self.out / "manifest.json", manifest)
        return EXIT_OK


def _verdict_payload(verdict):
    return {
        "components": [
            {"label": lbl, "verdict": "Trapping" if t else "NonTrapping",
             "reason": reason}
            for lbl, t, reason in verdict.components
        ],
        "trapping": verdict.trapping,
        "maximal_non_trapping": verdict.maximal_non_trapping,
    }


def cmd_classify(runner):
    def produce():
        verdict = topology.classify_potential(runner.spec, runner.pot)
        payload = _verdict_payload(verdict)
        payload["kernel_dimension"] = transverse.kernel_dimension(runner.spec, runner.pot)
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "classify.json", payload)
            files.append("classify.json")
        if runner.args.format in ("csv", "both"):
            report.write_csv(runner.out / "classify.csv",
                             ["label", "verdict", "reason"],
                             [(c["label"], c["verdict"], c["reason"])
                              for c in payload["components"]])
            files.append("classify.csv")
        return files
    return runner.run("classify", produce)


def cmd_modes(runner):
    def produce():
        model.require_normalized(runner.spec, runner.pot)
        mu_max = runner.args.mu_max
        files = []
        summary = {"mu_max": mu_max, "ends": []}
        for e, c in zip(runner.spec.ends, runner.pot.components):
            ms = transverse.mode_spectrum(e, c.flux, mu_max, label=e.label)
            rows = [(mu, mult, " ".join(str(i) for i in idx[0]))
                    for mu, mult, idx in ms.entries]
            name = f"modes_{e.label}.csv"
            if runner.args.format in ("csv", "both"):
                report.write_csv(runner.out / name, ["mu", "multiplicity", "k"], rows)
                files.append(name)
            summary["ends"].append({
                "label": e.label,
                "holonomy": [str(a) for a in c.flux],
                "count": ms.total_multiplicity(),
                "lowest": ms.entries[0][0] if ms.entries else None,
                "zero_mode": bool(ms.entries and ms.entries[0][0] == 0.0),
            })
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "modes.json", summary)
            files.append("modes.json")
        return files
    return runner.run("modes", produce)


def cmd_spectrum(runner):
    def produce():
        model.require_normalized(runner.spec, runner.pot)
        spec = runner.spec
        lam_max = runner.args.lambda_max
        policy = radial.GridPolicy(
            r_max_override=Fraction(runner.args.r_max) if runner.args.r_max else None)
        grid = radial.default_grid(spec, lam_max, policy)
        op = radial.assemble(spec, runner.args.mu, grid)
        evs = radial.eigenvalues_below(op, lam_max, runner.args.tol)
        payload = {
            "mode_mu": runner.args.mu,
            "lambda_max": lam_max,
            "grid": {"r0": str(grid.r0), "r_max": str(grid.r_max), "h": str(grid.h)},
            "warn_coarse": op.warn_coarse,
            "eigenvalues": evs,
        }
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "spectrum.json", payload)
            files.append("spectrum.json")
        if runner.args.format in ("csv", "both"):
            report.write_csv(runner.out / "spectrum.csv", ["index", "lambda"],
                             [(j + 1, v) for j, v in enumerate(evs)])
            files.append("spectrum.csv")
        return files
    return runner.run("spectrum", produce)


def cmd_weyl(runner):
    def produce():
        spec, pot = runner.spec, runner.pot
        pred = analysis.weyl_constants(spec, pot)
        lam_min = runner.args.lambda_min
        lam_max = runner.args.lambda_max
        lams = np.linspace(lam_min, lam_max, runner.args.samples)
        N = radial.counting_profile(spec, pot, list(lams),
                                    threads=runner.args.threads)
        fit = analysis.weyl_fit(list(zip(lams, N.astype(float))), pred)
        payload = {
            "regime": pred.regime,
            "law": pred.law,
            "constant": pred.constant,
            "constant_corrected": pred.constant_corrected,
            "zeta_value": pred.zeta_value,
            "zeta_argument": pred.zeta_argument,
            "zeta_argument_corrected": pred.zeta_argument_corrected,
            "volumes": {k: v for k, v in pred.volumes},
            "fit": fit,
            "lambda_grid": list(map(float, lams)),
            "counts": [int(v) for v in N],
        }
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "weyl.json", payload)
            files.append("weyl.json")
        if runner.args.format in ("csv", "both"):
            rows = [(float(l), int(n), pred.evaluate(l),
                     float(n) / pred.evaluate(l)) for l, n in zip(lams, N)]
            report.write_csv(runner.out / "weyl.csv",
                             ["lambda", "N", "predicted", "ratio"], rows)
            files.append("weyl.csv")
        return files
    return runner.run("weyl", produce)


def cmd_threshold(runner):
    def produce():
        schedule = _parse_float_list(runner.args.schedule)
        est = analysis.threshold_estimate(runner.spec, runner.pot, schedule)
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "threshold.json", est)
            files.append("threshold.json")
        if runner.args.format in ("csv", "both"):
            report.write_csv(runner.out / "threshold.csv",
                             ["r_len", "ground_state"],
                             list(zip(est["schedule"], est["ground_states"])))
            files.append("threshold.csv")
        return files
    return runner.run("threshold", produce)


def cmd_scan_coupling(runner):
    def produce():
        base = Fraction(runner.args.base_flux)
        gs = _parse_fraction_list(runner.args.g_grid)
        rows = analysis.coupling_scan(runner.spec, base, gs)
        payload = {
            "base_flux": base,
            "rows": [{**r, "g": r["g"], "flux": r["flux"]} for r in rows],
        }
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "coupling.json", payload)
            files.append("coupling.json")
        if runner.args.format in ("csv", "both"):
            report.write_csv(
                runner.out / "coupling.csv",
                ["g", "flux", "trapping", "reason", "zero_mode",
                 "ground_state", "spacing_ratio"],
                [(r["g"], r["flux"], r["trapping"], r["reason"], r["zero_mode"],
                  r["ground_state"], r["spacing_ratio"]) for r in rows])
            files.append("coupling.csv")
        return files
    return runner.run("scan-coupling", produce)


def cmd_mourre(runner):
    def produce():
        lo, hi = _parse_float_list(runner.args.window)
        r_values = [math.inf if t.strip() in ("inf", "Infinity") else float(t)
                    for t in runner.args.r_values.split(",") if t.strip()]
        model.require_normalized(runner.spec, runner.pot)
        if transverse.kernel_dimension(runner.spec, runner.pot) < 1:
            raise ValueError("the probe needs a non-trapping zero mode "
                             "(give some component an integral flux)")
        grid = radial.default_grid(runner.spec, lam_max=hi + 2.0,
                                   policy=radial.GridPolicy(h_override=Fraction(1, 20)),
                                   length=runner.args.box)
        reports = []
        for R in r_values:
            rep = analysis.mourre_probe(runner.spec, R, (lo, hi), grid)
            reports.append({
                "R": rep.R, "window": list(rep.window),
                "min_projected_eigenvalue": rep.min_projected_eigenvalue,
                "localization_fraction": rep.localization_fraction,
                "epsilon_R": rep.epsilon_R,
                "symmetry_defect": rep.symmetry_defect,
                "symmetry_defect_raw": rep.symmetry_defect_raw,
                "packet_floor": rep.packet_floor,
                "remainder_norm": rep.remainder_norm,
                "window_dimension": rep.window_dimension,
                "cluster_flag": rep.cluster_flag,
            })
        payload = {"probes": reports}
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "mourre.json", payload)
            files.append("mourre.json")
        if runner.args.format in ("csv", "both"):
            report.write_csv(
                runner.out / "mourre.csv",
                ["R", "min_projected_eigenvalue", "packet_floor",
                 "remainder_norm", "epsilon_R", "localization_fraction"],
                [(r["R"], r["min_projected_eigenvalue"], r["packet_floor"],
                  r["remainder_norm"], r["epsilon_R"],
                  r["localization_fraction"]) for r in reports])
            files.append("mourre.csv")
        return files
    return runner.run("mourre", produce)


def cmd_holder(runner):
    def produce():
        lo, hi = _parse_float_list(runner.args.window)
        schedule = _parse_float_list(runner.args.schedule)
        res = analysis.holder_probe(runner.spec, runner.args.s, (lo, hi),
                                    pot=runner.pot, schedule=schedule)
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "holder.json", res)
            files.append("holder.json")
        if runner.args.format in ("csv", "both") and res.get("pairs"):
            report.write_csv(runner.out / "holder.csv",
                             ["dz", "norm_difference"], res["pairs"])
            files.append("holder.csv")
        return files
    return runner.run("holder", produce)


def cmd_zeta(runner):
    def produce():
        model.require_normalized(runner.spec, runner.pot)
        s = runner.args.s
        tol = runner.args.tol
        ends = []
        total = 0.0
        for e, c in zip(runner.spec.ends, runner.pot.components):
            val, detail = transverse.spectral_zeta(e, c.flux, s, tol,
                                                   return_detail=True)
            total += val
            ends.append({"label": e.label, "value": val,
                         "radius": detail["radius"],
                         "tail_bound": detail["tail_bound"],
                         "terms": detail["terms"]})
        payload = {"s": s, "tol": tol, "value": total, "ends": ends}
        files = []
        if runner.args.format in ("json", "both"):
            report.write_json(runner.out / "zeta.json", payload)
            files.append("zeta.json")
        if runner.args.format in ("csv", "both"):
            report.write_csv(runner.out / "zeta.csv",
                             ["label", "value", "terms"],
                             [(r["label"], r["value"], r["terms"]) for r in ends])
            files.append("zeta.csv")
        return files
    return runner.run("zeta", produce)


EXAMPLE_CONFIGS = {
    # a compactly supported field on a one-cusp surface is trapping exactly
    # when its class is non-integral; flux = class/(2 pi)
    "compact_support_trapping.cfg": """\
# one-cusp surface, compactly supported field with non-integral class
n = 2
p = 1
x0 = 1/10

[end.cusp]
kind = circle
length = 1
flux = 1/2
""",
    "nonconstant_phi0.cfg": """\
# A = f dx/x^2 with f non-constant on the boundary circle: trapping
n = 2
p = 1
x0 = 1/10

[end.cusp]
kind = circle
length = 1
flux = 0
phi0 = samples(0, 1/2, 1)
""",
    "ab_two_cusps_trapping.cfg": """\
# two cusps: the same (zero) field with both holonomies non-integral
n = 2
p = 1
x0 = 1/10

[end.a]
kind = circle
length = 1
flux = 1/2

[end.b]
kind = circle
length = 1
flux = 1/2
""",
    "ab_two_cusps_nontrapping.cfg": """\
# two cusps: integral holonomy on one end gives a non-trapping potential
n = 2
p = 1
x0 = 1/10

[end.a]
kind = circle
length = 1
flux = 0

[end.b]
kind = circle
length = 1
flux = 1/2
""",
    "ab_one_cusp_integral.cfg": """\
# one cusp, integral class: only non-trapping potentials
n = 2
p = 1
x0 = 1/10

[end.cusp]
kind = circle
length = 1
flux = 1
""",
    "coupling_s1.cfg": """\
# coupling scenario: scan g against base flux 1/2 (group 2Z)
n = 2
p = 1
x0 = 1/10

[end.cusp]
kind = circle
length = 1
flux = 1/2
""",
    "nontrap_p1.cfg": """\
# non-trapping reference: integer flux, zero mode carries [1/4, inf)
n = 2
p = 1
x0 = 1/10

[end.cusp]
kind = circle
length = 1
flux = 0
""",
    "weyl_trap_p_half.cfg": """\
# critical regime p = 1/n
n = 2
p = 1/2
x0 = 1/10

[end.cusp]
kind = circle
length = 1
flux = 1/2
""",
    "weyl_trap_p_third.cfg": """\
# below-critical regime p < 1/n
n = 2
p = 1/3
x0 = 1/10

[end.cusp]
kind = circle
length = 1
flux = 1/2
""",
    "horn_p2.cfg": """\
# metric horn (incomplete, p > 1): empty essential spectrum
n = 2
p = 2
x0 = 1/10

[end.horn]
kind = circle
length = 1
flux = 1/2
""",
    "torus_3d.cfg": """\
# three-dimensional cusp with a flat torus cross-section
n = 3
p = 1
x0 = 1/10

[end.t]
kind = torus
gram = [[1, 0], [0, 1]]
flux = 1/2, 0
""",
}


def cmd_examples(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(EXAMPLE_CONFIGS):
        (out / name).write_text(EXAMPLE_CONFIGS[name], newline="\n")
    sys.stdout.write("\n".join(sorted(EXAMPLE_CONFIGS)) + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cusplab",
        description="spectral laboratory for magnetic Laplacians on cusp ends")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True)
        p.add_argument("--out", default="./out")
        p.add_argument("--format", choices=("json", "csv", "both"), default="both")
        p.add_argument("--cache-dir", dest="cache_dir", default=None)
        p.add_argument("--no-cache", dest="no_cache", action="store_true")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("classify", help="trapping verdicts per component")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("modes", help="transverse mode spectra")
    common(p)
    p.add_argument("--mu-max", dest="mu_max", type=float, default=100.0)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("spectrum", help="radial eigenvalues of one mode")
    common(p)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--lambda-max", dest="lambda_max", type=float, default=4.0)
    p.add_argument("--r-max", dest="r_max", default=None,
                   help="override grid length (rational)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("weyl", help="counting function vs the growth law")
    common(p)
    p.add_argument("--lambda-min", dest="lambda_min", type=float, default=1e3)
    p.add_argument("--lambda-max", dest="lambda_max", type=float, default=1e4)
    p.add_argument("--samples", type=int, default=10)
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("threshold", help="essential-spectrum threshold estimate")
    common(p)
    p.add_argument("--schedule", default="40,80,160")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("scan-coupling", help="coupling-constant scan")
    common(p)
    p.add_argument("--base-flux", dest="base_flux", default="1/2")
    p.add_argument("--g-grid", dest="g_grid", default="0,1/3,1/2,1,3/2,2,5/2,3,4")
    p.set_defaults(func=cmd_scan_coupling)

    p = sub.add_parser("mourre", help="positive-commutator probe")
    common(p)
    p.add_argument("--window", default="0.5,1.0")
    p.add_argument("--r-values", dest="r_values", default="2,4,8,inf")
    p.add_argument("--box", type=float, default=60.0)
    p.set_defaults(func=cmd_mourre)

    p = sub.add_parser("holder", help="weighted-resolvent Holder probe")
    common(p)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--window", default="0.5,1.0")
    p.add_argument("--schedule", default="40,80,160")
    p.set_defaults(func=cmd_holder)

    p = sub.add_parser("zeta", help="boundary spectral zeta")
    common(p)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("examples", help="write the canned example configs")
    p.add_argument("--out", default="./out")
    p.set_defaults(func=None)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "examples":
        return cmd_examples(args)
    try:
        runner = _Runner(args)
    except model.ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    try:
        return args.func(runner)
    except model.ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
