"""Command surface: function registry + run configuration + figure data emission.

Data emission only (CSV plus a JSON manifest); no plot rendering.  Every
output embeds the configuration hash and the working precision so identical
configurations produce bit-identical files.

Exit codes: 0 ok; 2 the requested approximant does not exist (the nearest
existing order is reported); 3 the working precision was insufficient
(a NonConvergence propagated).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import mpmath as mp
import numpy as np

from . import registry
from .chebseries import (QuadratureNonConvergence, cheb_coeffs, partial_sum_zeros,
                         rho0_estimate)
from .diagnostics import (default_rate_prediction, interpolation_measure,
                          pole_measure, rate_at)
from .faber import Ellipse
from .numerics import NonConvergence, set_precision
from .pade import NotRepresentable, build_chebpade, reports_to_csv_rows, sweep
from .potential import (CompactSpec, balayage, predicted_arc, solve_equilibrium,
                        stahl_equilibrium_measure)

FIGURE_DEFAULTS = {
    1: ("sqrt2", {"a": 0.5 + 0.5j}),
    2: ("fig2", {"a": 0.5 + 0.5j, "b": -0.4 + 0.7j, "c": -2.0}),
    3: ("fig3", {"a": 0.5 + 0.5j, "b": -0.4 + 0.7j, "c": 0.8}),
    4: ("fig3", {"a": 0.6 + 0.4j, "b": -0.5 + 0.6j, "c": 1.2}),
}


@dataclass
class RunConfig:
    """Run parameters; serialized verbatim into every output for reproducibility."""

    fn: str = "sqrt2"
    params: dict = field(default_factory=dict)
    precision: int = 200
    N_coeffs: int = 120
    n: int = 10
    n_max: int = 16
    eps_disk: float = 1e-10
    equilibrium_grid: int = 400
    interp_grid: int = 100000
    s_degree: int = 100            # partial-sum degree for figures
    f_degree: int = 50             # approximant order for figures
    z_points: tuple = ()
    out: str = "out"
    figure: int = 0

    def validate(self):
        for name in ("precision", "N_coeffs", "n", "n_max", "equilibrium_grid",
                     "interp_grid", "s_degree", "f_degree"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.eps_disk <= 0:
            raise ValueError("eps_disk must be positive")

    def canonical(self) -> str:
        d = asdict(self)
        d["params"] = {k: str(v) for k, v in sorted(self.params.items())}
        d["z_points"] = [str(z) for z in self.z_points]
        return json.dumps(d, sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _parse_scalar(text: str):
    text = text.strip().replace("i", "j")
    try:
        v = complex(text)
    except ValueError:
        return text
    return v.real if v.imag == 0 else v


def parse_params(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ValueError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_scalar(v)
    return out


def _nstr(x, digits=None) -> str:
    digits = digits or mp.mp.dps
    return mp.nstr(mp.mpf(x) if mp.mpc(x).imag == 0 else mp.mpc(x), digits)


class OutputWriter:
    """Collects CSV files and writes the manifest with content hashes."""

    def __init__(self, config: RunConfig, command: str):
        self.config = config
        self.command = command
        self.dir = Path(config.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = {}

    def write_csv(self, name: str, header, rows):
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["# config_hash", self.config.config_hash(),
                        "precision", str(self.config.precision)])
            w.writerow(header)
            w.writerows(rows)
        self.files[name] = hashlib.sha256(path.read_bytes()).hexdigest()

    def finish(self, extra: dict | None = None):
        manifest = {
            "command": self.command,
            "config": json.loads(self.config.canonical()),
            "config_hash": self.config.config_hash(),
            "precision": self.config.precision,
            "files": self.files,
        }
        if extra:
            manifest.update(extra)
        path = self.dir / "manifest.json"
        path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        return manifest


def _function(cfg: RunConfig):
    return registry.get(cfg.fn, **cfg.params)


def cmd_coeffs(cfg: RunConfig) -> int:
    f = _function(cfg)
    s = cheb_coeffs(f, cfg.N_coeffs)
    out = OutputWriter(cfg, "coeffs")
    rows = [(k, _nstr(c), repr(float(c))) for k, c in enumerate(s.coeffs)]
    out.write_csv("coeffs.csv", ("k", "a_k", "a_k_float"), rows)
    extra = {}
    try:
        est = rho0_estimate(s)
        extra["rho0_estimate"] = float(est.value if not est.superexponential
                                       else mp.inf)
        extra["superexponential"] = est.superexponential
    except Exception:
        pass
    out.finish(extra)
    return 0


def cmd_approx(cfg: RunConfig) -> int:
    f = _function(cfg)
    out = OutputWriter(cfg, "approx")
    series = cheb_coeffs(f, 2 * cfg.n + 64)
    try:
        ap = build_chebpade(f, cfg.n, series=series, eps_disk=cfg.eps_disk,
                            grid=cfg.interp_grid)
    except NotRepresentable:
        nearest = None
        for dn in range(1, max(cfg.n, 4)):
            for cand in (cfg.n - dn, cfg.n + dn):
                if cand < 1:
                    continue
                try:
                    series2 = cheb_coeffs(f, 2 * cand + 64)
                    build_chebpade(f, cand, series=series2, eps_disk=cfg.eps_disk,
                                   interp=False)
                    nearest = cand
                    break
                except NotRepresentable:
                    continue
            if nearest is not None:
                break
        out.finish({"exists": False, "requested_n": cfg.n,
                    "nearest_existing_n": nearest})
        print(f"F_{cfg.n} does not exist; nearest existing order: {nearest}",
              file=sys.stderr)
        return 2
    from .pade import ApproximationReport
    rep = ApproximationReport(n=cfg.n, exists=True, defect=ap.defect,
                              sup_error=ap.sup_error, poles=tuple(ap.poles()),
                              interpolation_points=ap.interpolation_points,
                              approximant=ap)
    rows = reports_to_csv_rows([rep], digits=cfg.precision)
    out.write_csv("approx.csv", rows[0], rows[1:])
    out.finish({"exists": True, "n": cfg.n,
                "interpolation_count": len(ap.interpolation_points),
                "matching_gap": None if ap.matching_gap is None
                else float(ap.matching_gap)})
    return 0


def _default_z_points(f) -> tuple:
    if "markov_support" in f.extra:
        return (1.5j, 2j, 5.0)
    return (2.0, 1.5j)


def cmd_rates(cfg: RunConfig) -> int:
    f = _function(cfg)
    out = OutputWriter(cfg, "rates")
    reports = sweep(f, cfg.n_max, eps_disk=cfg.eps_disk, interp=False)
    zs = cfg.z_points or _default_z_points(f)
    rows = []
    for z in zs:
        est = rate_at(f, z, reports)
        rows.append((str(z), repr(est.slope), repr(est.prediction),
                     repr(est.relative_gap), est.exact))
    out.write_csv("rates.csv", ("z", "slope", "prediction", "relative_gap",
                                "exact"), rows)
    out.finish({"existing_n": [r.n for r in reports if r.exists]})
    return 0


def cmd_measures(cfg: RunConfig) -> int:
    f = _function(cfg)
    out = OutputWriter(cfg, "measures")
    reports = sweep(f, cfg.n, n_min=cfg.n, eps_disk=cfg.eps_disk,
                    interp=True)
    rep = reports[0]
    if not rep.exists:
        out.finish({"exists": False})
        return 2
    rows = []

    def add(kind, meas):
        for p, w in zip(meas.points, meas.weights):
            p = mp.mpc(p)
            rows.append((kind, _nstr(p.real), _nstr(p.imag), _nstr(w)))

    add("interpolation", interpolation_measure(rep))
    add("pole", pole_measure(rep))
    if "markov_support" in f.extra:
        c, d = f.extra["markov_support"]
        K = CompactSpec.interval(c, d)
        eq = solve_equilibrium(K, 1.0, cfg.equilibrium_grid)
        add("lambda_reference", eq.measure)
        add("balayage_reference", balayage(eq.measure_at(2048), K))
    elif len(f.branch_points) == 2:
        add("lambda_reference", stahl_equilibrium_measure(f))
    out.write_csv("measures.csv", ("kind", "re", "im", "weight"), rows)
    out.finish({"n": cfg.n})
    return 0


def cmd_figure(cfg: RunConfig) -> int:
    fig = cfg.figure
    if fig not in FIGURE_DEFAULTS:
        raise ValueError("figure must be one of 1..4")
    name, params = FIGURE_DEFAULTS[fig]
    if cfg.params:
        params = {**params, **cfg.params}
        # figure parameters are not printed in the paper's captions; defaults
        # (and any overrides) are artifact choices recorded in the manifest
    f = registry.get(name, **params)
    out = OutputWriter(cfg, f"figure{fig}")
    sN, fN = cfg.s_degree, cfg.f_degree
    series = cheb_coeffs(f, max(sN, 2 * fN + 64))
    rows = []

    def add(kind, pts):
        for z in pts:
            z = mp.mpc(z)
            rows.append((_nstr(z.real), _nstr(z.imag), repr(float(z.real)),
                         repr(float(z.imag)), kind))

    add("partial_sum", partial_sum_zeros(series, sN))
    exists_n = None
    try:
        ap = build_chebpade(f, fN, series=series, eps_disk=cfg.eps_disk,
                            interp=False)
        exists_n = fN
    except NotRepresentable:
        ap = None
        for cand in range(fN - 1, max(fN - 6, 0), -1):
            try:
                ap = build_chebpade(f, cand, series=series,
                                    eps_disk=cfg.eps_disk, interp=False)
                exists_n = cand
                break
            except NotRepresentable:
                continue
    code = 0
    if ap is not None:
        add("pade_pole", [p for p, m in ap.poles() for _ in range(m)])
        add("pade_zero", [z for z, m in ap.rational.zeros() for _ in range(m)])
        if exists_n != fN:
            code = 2
    else:
        code = 2
    out.write_csv(f"fig{fig}_zeros.csv", ("re", "im", "re_float", "im_float",
                                          "source"), rows)

    est = rho0_estimate(series)
    rho0 = est.value
    ell = Ellipse(rho0)
    erows = [(repr(float(mp.re(z))), repr(float(mp.im(z))))
             for z in ell.boundary_points(400)]
    out.write_csv(f"fig{fig}_ellipse.csv", ("re", "im"), erows)
    if len(f.branch_points) == 2:
        arc = predicted_arc(f, 201)
        arows = [(repr(v.real), repr(v.imag)) for v in arc.data]
        out.write_csv(f"fig{fig}_arc.csv", ("re", "im"), arows)
    out.finish({"figure": fig, "fn": name,
                "params_are_artifact_choices": True,
                "params": {k: str(v) for k, v in params.items()},
                "rho0": float(rho0), "s_degree": sN,
                "f_degree_requested": fN, "f_degree_used": exists_n})
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chebpade",
        description="Nonlinear Chebyshev-Pade approximation and its "
                    "potential-theoretic diagnostics (data emission only).")
    ap.add_argument("--config", help="JSON file with RunConfig fields")
    ap.add_argument("--fn", help="registry function id "
                    f"({', '.join(registry.list_functions())})")
    ap.add_argument("--param", action="append", metavar="k=v",
                    help="function parameter, repeatable (complex: 0.5+0.5i)")
    ap.add_argument("--precision", type=int, help="working decimal digits")
    ap.add_argument("--N", type=int, dest="N_coeffs", help="coefficient count")
    ap.add_argument("--n", type=int, help="approximant order")
    ap.add_argument("--nmax", type=int, dest="n_max", help="sweep upper order")
    ap.add_argument("--eps-disk", type=float, dest="eps_disk")
    ap.add_argument("--equilibrium-grid", type=int, dest="equilibrium_grid")
    ap.add_argument("--interp-grid", type=int, dest="interp_grid")
    ap.add_argument("--s-degree", type=int, dest="s_degree")
    ap.add_argument("--f-degree", type=int, dest="f_degree")
    ap.add_argument("--z", action="append", dest="z_points",
                    help="evaluation point for rates, repeatable")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--figure", type=int, choices=(1, 2, 3, 4))
    ap.add_argument("command", choices=("coeffs", "approx", "rates",
                                        "measures", "figure"))
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        data = json.loads(Path(args.config).read_text())
        for k, v in data.items():
            if not hasattr(cfg, k):
                raise ValueError(f"unknown config field {k!r}")
            if k == "params":
                v = {kk: _parse_scalar(str(vv)) for kk, vv in v.items()}
            if k == "z_points":
                v = tuple(_parse_scalar(str(x)) for x in v)
            setattr(cfg, k, v)
    for k in ("fn", "precision", "N_coeffs", "n", "n_max", "eps_disk",
              "equilibrium_grid", "interp_grid", "s_degree", "f_degree",
              "out", "figure"):
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    if args.param:
        cfg.params = {**cfg.params, **parse_params(args.param)}
    if args.z_points:
        cfg.z_points = tuple(_parse_scalar(z) for z in args.z_points)
    cfg.validate()
    return cfg


COMMANDS = {
    "coeffs": cmd_coeffs,
    "approx": cmd_approx,
    "rates": cmd_rates,
    "measures": cmd_measures,
    "figure": cmd_figure,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    set_precision(cfg.precision)
    try:
        return COMMANDS[args.command](cfg)
    except (NonConvergence, QuadratureNonConvergence) as exc:
        print(f"precision insufficient: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
