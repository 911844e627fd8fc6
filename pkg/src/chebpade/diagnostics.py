"""Asymptotic verification: rate fits, limit distributions, capacity probes.

The convergence statements under test are capacity statements, so everything
here is built to tolerate exceptional n: fits run over the subsequence where
the approximant exists and drop the worst 10% of residual outliers (spurious
pole neighborhoods), and measure comparisons use a 1-Wasserstein distance of
projected CDFs (x-coordinate on the interval, phi-angle on arcs/ellipses),
which metrizes weak convergence on these one-dimensional supports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath as mp
import numpy as np

from .chebseries import FunctionSpec
from .numerics import tol_half
from .pade import ApproximationReport
from .potential import (CompactSpec, DiscreteMeasure, _phi_np,
                        green_potential_interval_mp, solve_equilibrium,
                        theoretical_rate_two_branch)


class TooFewSamples(RuntimeError):
    """Not enough existing approximants in the requested range for a fit."""


@dataclass
class RateEstimate:
    z: complex
    slope: float
    prediction: float
    relative_gap: float
    n_used: tuple = ()
    exact: bool = False


def default_rate_prediction(f: FunctionSpec, z, theta: float = 1.0,
                            grid_size: int = 400):
    """Predicted exponent 2 G_F^lam(z) for the function's singularity type.

    Markov functions use the equilibrium solver on their support interval;
    conjugate two-branch-point functions use the closed-form segment Green
    function.
    """
    if "markov_support" in f.extra:
        c, d = f.extra["markov_support"]
        K = CompactSpec.interval(c, d)
        eq = solve_equilibrium(K, theta, grid_size)
        lam = eq.measure_at(4096)
        return float(2 * green_potential_interval_mp(lam, K, mp.mpc(z)))
    if len(f.branch_points) == 2:
        return float(theoretical_rate_two_branch(f, z))
    raise ValueError(f"no closed-form prediction for {f.name!r}")


def rate_at(f: FunctionSpec, z, reports: Sequence[ApproximationReport],
            n_range: tuple | None = None, prediction: float | None = None,
            drop_fraction: float = 0.1) -> RateEstimate:
    """Least-squares slope of -log|f(z) - F_n(z)| against n, with prediction.

    Uses the existing subsequence inside n_range (>= 8 points required),
    drops the worst ``drop_fraction`` of fit outliers once, and refits.
    When the error underflows (rational f reproduced exactly) the estimate
    is flagged exact instead of fitted.
    """
    z = mp.mpc(z)
    fz = mp.mpc(f.evaluator(z))
    floor = abs(fz) * mp.mpf(10) ** (-mp.mp.dps + 20) + mp.mpf(10) ** (-mp.mp.dps + 20)
    ns, ys = [], []
    exact = False
    for r in reports:
        if not r.exists or r.approximant is None:
            continue
        if n_range is not None and not (n_range[0] <= r.n <= n_range[1]):
            continue
        err = abs(fz - r.approximant.rational(z))
        if err <= floor:
            exact = True
            continue
        ns.append(r.n)
        ys.append(float(-mp.log(err)))
    if exact and len(ns) < 8:
        if prediction is None:
            try:
                prediction = default_rate_prediction(f, z)
            except ValueError:
                prediction = float("nan")
        return RateEstimate(complex(z), float("inf"), prediction, 0.0,
                            tuple(ns), True)
    if len(ns) < 8:
        raise TooFewSamples(f"only {len(ns)} usable approximants near z={z}")
    ns_a = np.array(ns, dtype=float)
    ys_a = np.array(ys, dtype=float)
    slope, icpt = np.polyfit(ns_a, ys_a, 1)
    resid = np.abs(ys_a - (slope * ns_a + icpt))
    keep = resid.argsort()[: max(8, int(np.ceil(len(ns_a) * (1 - drop_fraction))))]
    keep.sort()
    slope = float(np.polyfit(ns_a[keep], ys_a[keep], 1)[0])
    if prediction is None:
        prediction = default_rate_prediction(f, z)
    gap = abs(slope - prediction) / abs(prediction) if prediction else float("nan")
    return RateEstimate(complex(z), slope, float(prediction), float(gap),
                        tuple(int(n) for n in ns_a[keep]))


# ---------------------------------------------------------------------------
# counting measures and their comparison


def interpolation_measure(report: ApproximationReport) -> DiscreteMeasure:
    """Normalized counting measure over the interpolation points of F_n."""
    ap = report.approximant
    if ap is None or not report.exists:
        raise ValueError(f"F_{report.n} does not exist")
    if ap.exact or not ap.interpolation_points:
        raise ValueError("f - F_n is identically zero; the interpolation "
                         "measure is undefined")
    return DiscreteMeasure.counting(ap.interpolation_points)


def pole_measure(report: ApproximationReport) -> DiscreteMeasure:
    """Normalized counting measure (with multiplicity) over the poles of F_n."""
    if not report.exists or not report.poles:
        raise ValueError(f"no poles recorded for n={report.n}")
    pts = []
    for p, m in report.poles:
        pts.extend([p] * m)
    return DiscreteMeasure.counting(pts)


def _project(points: np.ndarray, projection: str) -> np.ndarray:
    if projection == "x":
        return points.real
    if projection == "phi-angle":
        return np.angle(_phi_np(points))
    raise ValueError(f"unknown projection {projection!r}")


def wasserstein_projected(mu: DiscreteMeasure, nu: DiscreteMeasure,
                          projection: str = "x") -> float:
    """1-Wasserstein distance of the projected one-dimensional distributions.

    Computed as the integral of |F_mu - F_nu| over the merged support of the
    projected CDFs.
    """
    xm = _project(mu.points_np, projection)
    xn = _project(nu.points_np, projection)
    wm = mu.weights_np / mu.weights_np.sum()
    wn = nu.weights_np / nu.weights_np.sum()
    xs = np.concatenate([xm, xn])
    ws = np.concatenate([wm, -wn])
    order = np.argsort(xs, kind="stable")
    xs, ws = xs[order], ws[order]
    cdf_diff = np.cumsum(ws)[:-1]
    gaps = np.diff(xs)
    return float(np.abs(cdf_diff * gaps).sum())


# ---------------------------------------------------------------------------
# Jentzsch-Szego clustering


@dataclass
class ClusteringResult:
    fraction: float
    cdf_gap: float
    n_zeros: int
    delta: float


def ellipse_clustering(zeros: Sequence, rho0, delta=None) -> ClusteringResult:
    """Fraction of zeros with | |phi(z)| - rho0 | <= delta, plus angle uniformity.

    delta defaults to 0.1*rho0.  The angular part compares the empirical
    distribution of arg phi(z) with the uniform law (the equilibrium measure
    of the ellipse is uniform in the phi-angle) through the max CDF gap.
    """
    if not len(zeros):
        raise ValueError("no zeros given")
    rho0 = float(rho0)
    if delta is None:
        delta = 0.1 * rho0
    zs = np.array([complex(z) for z in zeros])
    on_E = (np.abs(zs.imag) < 1e-14) & (np.abs(zs.real) <= 1)
    mods = np.where(on_E, 1.0, np.abs(_phi_np(zs)))
    frac = float((np.abs(mods - rho0) <= delta).mean())
    ang = np.sort(np.angle(np.where(on_E, zs.real + 1e-300j, _phi_np(zs))))
    n = len(ang)
    u = (ang + np.pi) / (2 * np.pi)
    i = np.arange(1, n + 1)
    gap = float(np.maximum(i / n - u, u - (i - 1) / n).max())
    return ClusteringResult(frac, gap, n, float(delta))


# ---------------------------------------------------------------------------
# two-sided capacity bound probe


def capacity_convergence_probe(f: FunctionSpec, region: tuple,
                               reports: Sequence[ApproximationReport],
                               eps: float, exponent_fn, grid: tuple = (30, 30),
                               avoid=None) -> list:
    """Per-n fraction of grid points violating the two-sided rate bound.

    For each existing F_n and each grid point z in the rectangle ``region``
    (excluding a neighborhood of E and, optionally, of a predicted arc),
    checks e^{-n(R(z)+eps)} <= |f - F_n|(z) <= e^{-n(R(z)-eps)} with
    R = exponent_fn the predicted exponent.  Convergence in capacity shows
    as the violating fraction tending to zero; rows are dicts with the
    violating points kept for geometric post-mortems.
    """
    x0, x1, y0, y1 = region
    nx, ny = grid
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    pts = []
    for x in xs:
        for y in ys:
            z = complex(x, y)
            if abs(z.imag) < 0.05 and abs(z.real) <= 1.05:
                continue
            if avoid is not None and avoid(z):
                continue
            pts.append(z)
    rates = [float(exponent_fn(z)) for z in pts]
    out = []
    for r in reports:
        if not r.exists or r.approximant is None:
            continue
        viol = []
        for z, R in zip(pts, rates):
            err = abs(mp.mpc(f.evaluator(mp.mpc(z))) - r.approximant.rational(mp.mpc(z)))
            lo = mp.e ** (-(R + eps) * r.n)
            hi = mp.e ** (-(R - eps) * r.n)
            if not (lo <= err <= hi):
                viol.append(z)
        out.append({"n": r.n, "fraction": len(viol) / len(pts),
                    "violations": viol, "checked": len(pts)})
    return out
