"""Diagonal Pade approximants at w = 0 and the nonlinear Chebyshev-Pade pipeline.

The classical [n/n] approximant of a power series t is computed from the
Hankel system for the denominator (full pivoting, extended precision); a rank
breakdown is the Pade block structure, handled by hopping down to the
numerically nonsingular representative and recording the defect.  The
nonlinear Chebyshev-Pade approximant F_n of a function f holomorphic on
[-1, 1] is then assembled through the Faber route:

    cheb_coeffs -> faber_forward -> pade_nn -> pole gate -> map_rational

F_n exists (for this n) precisely when the w-plane approximant has no pole in
the closed unit disk; otherwise the construction proceeds along a
subsequence of n and the sweep records the gap.  When F_n exists its first
2n+1 Chebyshev coefficients reproduce those of f, which is verified here by
independent quadrature, and f - F_n changes sign at >= 2n+1 points of
(-1, 1), which are extracted as the interpolation points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

from .chebseries import (ChebSeries, FunctionSpec, QuadratureNonConvergence,
                         chebyshev_quadrature, clenshaw)
from .faber import PowerSeries, faber_forward, map_rational
from .numerics import (Poly, RankDeficient, RationalFunction, cluster_roots,
                       poly_roots, solve_linear, tol_half, tol_third)


class NotRepresentable(RuntimeError):
    """No nonlinear Chebyshev-Pade approximant at this n (pole in the disk)."""

    def __init__(self, n: int, message: str = ""):
        self.n = n
        super().__init__(message or f"F_{n} does not exist")


class DegenerateBlockWarning(UserWarning):
    """The Hankel system was rank deficient; a block representative was used."""


class NearBoundaryWarning(UserWarning):
    """A w-plane pole hugs the unit circle; existence is declined."""


@dataclass(frozen=True)
class PadeApproximant:
    """[n/n]-type approximant P/Q of a power series, Q(0) = 1.

    ``reduced_degree`` is the degree of the block representative actually
    solved for; ``contact`` is the numerically verified order of (Q t - P),
    and ``defect`` = max(0, 2n+1 - contact).
    """

    num: Poly
    den: Poly
    n: int
    reduced_degree: int
    contact: int
    defect: int

    def __call__(self, w):
        return self.num(w) / self.den(w)

    def rational(self) -> RationalFunction:
        return RationalFunction(self.num, self.den, "w")


def _hankel_solve(t: Sequence, m: int):
    """Denominator coefficients q_0..q_m (q_0 = 1) of the [m/m] approximant.

    Rows are the conditions (Q t)_k = 0 for k = m+1..2m; columns index
    q_1..q_m, so A[i][j] = t_{m+1+i-(j+1)}.
    """
    A = [[t[m + i - j - 1] for j in range(m)] for i in range(1, m + 1)]
    b = [-t[m + i] for i in range(1, m + 1)]
    sol = solve_linear(A, b)
    return [mp.mpf(1)] + list(sol.x)


def order_residuals(p: PadeApproximant, t: PowerSeries, upto: int) -> list:
    """Coefficients of (Q t - P) up to the given index (convolution oracle)."""
    q = p.den.coeffs
    out = []
    for k in range(upto + 1):
        acc = mp.mpc(0)
        for j, qj in enumerate(q):
            if 0 <= k - j <= t.N:
                acc += qj * t.coeffs[k - j]
        if k <= p.num.degree:
            acc -= p.num.coeffs[k]
        out.append(acc)
    return out


def pade_nn(t: PowerSeries, n: int) -> PadeApproximant:
    """Diagonal Pade approximant of order n of the series t at w = 0.

    Solves the Hankel system for Q by full pivoting; on rank breakdown hops
    to the reduced (numerically nonsingular) block representative, emitting
    DegenerateBlockWarning and recording the defect.  Normalization Q(0)=1.
    """
    if t.N < 2 * n:
        raise ValueError(f"need at least 2n+1 = {2 * n + 1} coefficients, have {t.N + 1}")
    ts = list(t.coeffs)
    m = n
    q = None
    while m > 0:
        try:
            q = _hankel_solve(ts, m)
            break
        except RankDeficient as rd:
            m = rd.rank
    if m == 0 or q is None:
        # fully degenerate Hankel: the representative is the truncated series
        q, m = [mp.mpf(1)], 0
        P = Poly(tuple(ts[: n + 1]), "w")
        Q = Poly(tuple(q), "w")
    else:
        Q = Poly(tuple(q), "w")
        pc = []
        for k in range(m + 1):
            acc = mp.mpc(0)
            for j in range(min(k, m) + 1):
                acc += q[j] * ts[k - j]
            pc.append(acc)
        P = Poly(tuple(pc), "w")
    # measure the achieved order of contact on the stored series
    scale = max(max(abs(c) for c in ts), mp.mpf(1)) * max(abs(c) for c in q)
    thresh = scale * tol_half()
    contact = 2 * n + 1
    probe = PadeApproximant(P, Q, n, m, 0, 0)
    for k, r in enumerate(order_residuals(probe, t, 2 * n)):
        if abs(r) > thresh:
            contact = k
            break
    defect = max(0, 2 * n + 1 - contact)
    if m < n or defect > 0:
        warnings.warn(f"degenerate Pade block at n={n}: representative degree "
                      f"{m}, contact {contact}, defect {defect}",
                      DegenerateBlockWarning)
    return PadeApproximant(P, Q, n, m, contact, defect)


def exists_nonlinear_apc(p: PadeApproximant, eps_disk=None) -> bool:
    """Existence gate: every pole of the w-plane approximant off the closed disk.

    True iff all roots of Q have modulus >= 1 + eps_disk.  Poles with modulus
    inside [1 - eps_disk, 1 + eps_disk) trigger a NearBoundaryWarning (the
    transplant would be ill-conditioned) and the gate declines.
    """
    if eps_disk is None:
        eps_disk = mp.mpf("1e-10")
    eps_disk = mp.mpf(eps_disk)
    if p.den.degree < 1:
        return True
    ok = True
    for w0 in poly_roots(p.den):
        aw = abs(w0)
        if aw < 1 + eps_disk:
            ok = False
            if aw >= 1 - eps_disk:
                warnings.warn(f"pole at |w| = {mp.nstr(aw, 10)} hugs the unit "
                              "circle", NearBoundaryWarning)
    return ok


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class ChebPadeApproximant:
    """Nonlinear Chebyshev-Pade approximant F_n with its verification data."""

    rational: RationalFunction
    n: int
    exists: bool = True
    defect: int = 0
    interpolation_points: tuple = ()
    matching_gap: mp.mpf = None
    verified: bool = False
    exact: bool = False                     # f - F_n below noise floor on E
    sup_error: mp.mpf = None
    fn_series: ChebSeries = None            # Chebyshev coefficients of F_n
    error_coeffs: tuple = ()                # a_k(f) - a_k(F_n)

    def __call__(self, z):
        return self.rational(z)

    def poles(self):
        return self.rational.poles()


def _cheb_deriv(coeffs: Sequence) -> list:
    """Primed-convention coefficients of the derivative of a Chebyshev series."""
    n = len(coeffs) - 1
    out = [mp.mpf(0)] * (n + 1)
    for k in range(n, 0, -1):
        out[k - 1] = (out[k + 1] if k + 1 <= n else mp.mpf(0)) + 2 * k * coeffs[k]
    return out[:n] if n >= 1 else [mp.mpf(0)]


def _interpolation_points(err: Sequence, grid: int, rel_touch: mp.mpf):
    """Sign changes (plus even-order touches) of a Chebyshev error series.

    The scan runs on a uniform grid over (-1, 1) using the tail-normalized
    series in double precision; each bracket is then polished in extended
    precision by Newton steps (bisection fallback) to ~1e-30.
    """
    scale = max(abs(c) for c in err)
    if scale == 0:
        return (), True
    en = np.array([float(c / scale) for c in err])
    en_cheb = en.copy()
    en_cheb[0] *= 0.5                      # numpy chebval uses the unprimed sum
    xs = np.linspace(-1.0, 1.0, grid + 2)[1:-1]
    vals = np.polynomial.chebyshev.chebval(xs, en_cheb)
    sgn = np.sign(vals)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]

    coeffs = [c / scale for c in err]
    dcoeffs = _cheb_deriv(coeffs)
    target = mp.mpf("1e-30")
    pts = []
    for i in idx:
        a, b = mp.mpf(xs[i]), mp.mpf(xs[i + 1])
        fa = clenshaw(coeffs, a)
        x = (a + b) / 2
        for _ in range(120):
            fx = clenshaw(coeffs, x)
            dfx = clenshaw(dcoeffs, x) if len(dcoeffs) > 1 else mp.mpf(dcoeffs[0]) / 2
            if dfx != 0:
                step = fx / dfx
                xn = x - step
            else:
                xn = a - 1  # force bisection
            if not (a < xn < b):
                if fa * fx <= 0:
                    b = x
                else:
                    a, fa = x, fx
                xn = (a + b) / 2
            if abs(xn - x) <= target:
                x = xn
                break
            x = xn
        pts.append(x)

    # even-order touches: grid minima of |e| far below the error scale
    av = np.abs(vals)
    emax = av.max() if len(av) else 0.0
    if emax > 0:
        touch_cut = float(rel_touch) * emax
        near_change = np.zeros(len(xs), dtype=bool)
        for i in idx:
            near_change[max(0, i - 2): i + 4] = True
        for i in range(1, len(xs) - 1):
            if (not near_change[i] and av[i] <= touch_cut
                    and av[i] <= av[i - 1] and av[i] <= av[i + 1]):
                pts.extend([mp.mpf(xs[i])] * 2)
    return tuple(sorted(pts)), False


def build_chebpade(f: FunctionSpec, n: int, series: ChebSeries | None = None,
                   eps_disk=None, tail: int = 64, interp: bool = True,
                   grid: int = 100000) -> ChebPadeApproximant:
    """Construct and verify the nonlinear Chebyshev-Pade approximant F_n of f.

    Raises NotRepresentable(n) when the w-plane approximant has a pole in the
    closed unit disk (existence fails at this n; sweeps continue on the
    remaining subsequence).  On success the matching conditions
    |a_k(F_n) - a_k(f)|, k <= 2n, are verified by quadrature against
    10^(-precision/3), and the interpolation points are extracted from the
    sign changes of f - F_n.
    """
    from .chebseries import cheb_coeffs  # local import: avoids cycle at module load

    need = 2 * n + tail
    if series is None or series.N < 2 * n:
        series = cheb_coeffs(f, need)
    t = faber_forward(series)
    pa = pade_nn(t, n)
    if not exists_nonlinear_apc(pa, eps_disk):
        raise NotRepresentable(n)
    Fz = map_rational(pa.rational())

    # defensive: the transplant cannot put a pole on E if the gate passed
    for z0, _ in Fz.poles():
        if abs(z0.imag) < mp.mpf("1e-30") and -1 <= z0.real <= 1:
            raise NotRepresentable(n, f"pole on the interval at {mp.nstr(z0, 8)}")

    kmax = min(series.N, need)
    approx = ChebPadeApproximant(rational=Fz, n=n, defect=pa.defect)
    try:
        fn_coeffs, _ = chebyshev_quadrature(lambda x: Fz(x), kmax)
    except (QuadratureNonConvergence, ValueError) as exc:
        warnings.warn(f"verification quadrature failed at n={n}: {exc}",
                      RuntimeWarning)
        return approx
    approx.fn_series = ChebSeries(tuple(fn_coeffs))
    gap = max(abs(series.coeffs[k] - fn_coeffs[k]) for k in range(2 * n + 1))
    approx.matching_gap = gap
    approx.verified = gap <= tol_third()

    err = tuple(series.coeffs[k] - fn_coeffs[k] for k in range(kmax + 1))
    approx.error_coeffs = err
    scale = max(abs(c) for c in err)
    noise = max(max(abs(c) for c in series.coeffs), mp.mpf(1)) \
        * mp.mpf(10) ** (-mp.mp.dps + 40)
    if scale <= noise:
        # f is reproduced exactly; the error series is quadrature noise
        approx.exact = True
        approx.sup_error = mp.mpf(0)
        return approx
    if scale > 0:
        en = np.array([float(c / scale) for c in err])
        en[0] *= 0.5
        xs = np.cos(np.linspace(0, np.pi, 4096))
        approx.sup_error = scale * mp.mpf(float(
            np.abs(np.polynomial.chebyshev.chebval(xs, en)).max()))
    else:
        approx.sup_error = mp.mpf(0)
    if interp:
        rel = mp.mpf(10) ** (-(mp.mp.dps // 4))
        pts, exact = _interpolation_points(err, grid, rel)
        approx.interpolation_points = pts
        approx.exact = exact
        if exact:
            approx.sup_error = mp.mpf(0)
    return approx


def orthogonality_residuals(f: FunctionSpec, approx: ChebPadeApproximant,
                            kmax: int) -> list:
    """Quadrature values of int (f - F_n) T_k dtau, k = 0..kmax.

    Direct doubling quadrature on the pointwise difference (independent of
    the matching verification); with dtau = dx/sqrt(1-x^2) the integrals are
    (pi/2) times the primed-convention coefficients of the error.
    """
    if kmax < 2 * approx.n:
        raise ValueError("kmax must reach 2n")
    Fz = approx.rational

    def g(x):
        return mp.mpc(f.evaluator(x)) - Fz(x)

    coeffs, _ = chebyshev_quadrature(g, kmax, require_real=True)
    return [c * mp.pi / 2 for c in coeffs]


# ---------------------------------------------------------------------------
# sweeps and reports


@dataclass
class ApproximationReport:
    """Per-n record emitted by a sweep."""

    n: int
    exists: bool
    defect: int = 0
    sup_error: mp.mpf = None
    poles: tuple = ()                        # (location, multiplicity) pairs
    interpolation_points: tuple = ()
    approximant: ChebPadeApproximant = field(default=None, repr=False)


def sweep(f: FunctionSpec, n_max: int, n_min: int = 1,
          series: ChebSeries | None = None, eps_disk=None, tail: int = 64,
          interp: bool = True, progress=None) -> list:
    """Run build_chebpade over n = n_min..n_max, recording gaps and moving on."""
    from .chebseries import cheb_coeffs

    if series is None:
        series = cheb_coeffs(f, 2 * n_max + tail)
    out = []
    for n in range(n_min, n_max + 1):
        try:
            ap = build_chebpade(f, n, series=series, eps_disk=eps_disk,
                                tail=min(tail, series.N - 2 * n), interp=interp)
            out.append(ApproximationReport(
                n=n, exists=True, defect=ap.defect, sup_error=ap.sup_error,
                poles=tuple(ap.poles()),
                interpolation_points=ap.interpolation_points, approximant=ap))
        except NotRepresentable:
            out.append(ApproximationReport(n=n, exists=False))
        if progress is not None:
            progress(out[-1])
    return out


def reports_to_csv_rows(reports: Sequence[ApproximationReport], digits: int = 30):
    """Rows (n, exists, defect, sup_error_on_E, poles, interpolation_points)."""
    rows = [("n", "exists", "defect", "sup_error_on_E", "poles",
             "interpolation_points")]
    for r in reports:
        poles = ";".join(f"{mp.nstr(p.real, digits)}"
                         f"{'+' if p.imag >= 0 else '-'}"
                         f"{mp.nstr(abs(p.imag), digits)}j*{m}"
                         for p, m in r.poles)
        pts = ";".join(mp.nstr(x, digits) for x in r.interpolation_points)
        sup = "" if r.sup_error is None else mp.nstr(r.sup_error, digits)
        rows.append((str(r.n), str(int(r.exists)), str(r.defect), sup, poles, pts))
    return rows
