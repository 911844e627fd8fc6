"""Fourier-Chebyshev expansions of functions holomorphic on E = [-1, 1].

Coefficient convention (owned here, consumed everywhere else): a series is
stored in the primed cosine convention

    f(x) = a_0/2 + sum_{k>=1} a_k T_k(x),    a_k = (2/pi) int f(x) T_k(x) dtau,

with dtau = dx / sqrt(1 - x^2) and T_k the classical (unnormalized) Chebyshev
polynomials.  The uniform formula a_k = (2/pi)*int f T_k dtau holds for k = 0
as well, which is why this convention is the least error-prone one to carry
across module boundaries.  Conversion to the orthonormal-with-dtau convention
(factors sqrt(pi), sqrt(pi/2)) is provided by ``to_orthonormal_coeffs`` /
``from_orthonormal_coeffs`` and happens nowhere else.

Coefficients are computed by Chebyshev-extremum quadrature (a DCT-I), with
the node count doubled until two successive passes agree; the extremum grid
is nested under doubling so function values are reused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import mpmath as mp
import numpy as np

from .numerics import (Poly, cheb_to_monomial, is_zero, poly_roots,
                       cluster_roots, tol_half)

MAX_QUAD_NODES = 2 ** 20
MAX_DOUBLINGS = 20


class QuadratureNonConvergence(RuntimeError):
    """Node doubling failed to stabilize the coefficients.

    Signals a singularity on or too near [-1, 1]."""


class InsufficientDecay(RuntimeError):
    """Too few usable coefficients to estimate the holomorphy index."""


@dataclass
class FunctionSpec:
    """A test function: evaluator plus declared singularity data.

    The evaluator maps complex -> complex at working precision and must be
    real on [-1, 1] (up to 10^(-precision/2)).  ``branch_points`` is the set
    of declared branch points, required to be symmetric under conjugation;
    ``branch_note`` documents the branch/cut choice in words.
    """

    name: str
    evaluator: Callable
    branch_points: tuple = ()
    poles: tuple = ()
    branch_note: str = ""
    extra: dict = field(default_factory=dict)
    _node_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = [mp.mpc(b) for b in self.branch_points]
        for b in pts:
            if not any(abs(mp.conj(b) - c) <= 1e-10 * (1 + abs(b)) for c in pts):
                raise ValueError(f"branch points of {self.name!r} are not "
                                 "symmetric under conjugation")

    def __call__(self, z):
        return self.evaluator(z)


@dataclass
class ChebSeries:
    """Truncated Chebyshev expansion in the primed cosine convention.

    Treated as immutable after construction.  All coefficients are real mpf;
    ``quad_error`` records the agreement level of the last two quadrature
    passes (the accuracy contract of cheb_coeffs).
    """

    coeffs: tuple
    convention: str = "cosine-primed"
    precision: int = 0
    quad_error: mp.mpf = None

    def __post_init__(self):
        self.coeffs = tuple(mp.mpf(c) for c in self.coeffs)
        if self.precision == 0:
            self.precision = mp.mp.dps

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __call__(self, x):
        return clenshaw(self.coeffs, x)

    def truncated(self, n: int) -> "ChebSeries":
        return ChebSeries(self.coeffs[: n + 1], self.convention, self.precision,
                          self.quad_error)

    def rho0(self):
        return rho0_estimate(self).value

    def to_json(self) -> dict:
        return {
            "convention": self.convention,
            "precision": self.precision,
            "coeffs": [mp.nstr(c, self.precision, strip_zeros=False)
                       for c in self.coeffs],
        }

    @staticmethod
    def from_json(data: dict) -> "ChebSeries":
        return ChebSeries(tuple(mp.mpf(s) for s in data["coeffs"]),
                          data["convention"], data["precision"])


def to_orthonormal_coeffs(s: ChebSeries) -> tuple:
    """Coefficients against the dtau-orthonormal family (1/sqrt(pi), sqrt(2/pi) T_k)."""
    out = [mp.sqrt(mp.pi) * s.coeffs[0] / 2]
    half = mp.sqrt(mp.pi / 2)
    out.extend(half * c for c in s.coeffs[1:])
    return tuple(out)


def from_orthonormal_coeffs(coeffs: Sequence, precision: int = 0) -> ChebSeries:
    cs = [2 * mp.mpf(coeffs[0]) / mp.sqrt(mp.pi)]
    half = mp.sqrt(mp.pi / 2)
    cs.extend(mp.mpf(c) / half for c in coeffs[1:])
    return ChebSeries(tuple(cs), precision=precision)


def clenshaw(coeffs: Sequence, x):
    """Evaluate a0/2 + sum a_k T_k(x) by the backward recurrence."""
    n = len(coeffs) - 1
    if n == 0:
        return mp.mpf(coeffs[0]) / 2 if not isinstance(x, mp.mpc) else mp.mpc(coeffs[0]) / 2
    b1 = mp.mpc(0)
    b2 = mp.mpc(0)
    two_x = 2 * mp.mpc(x)
    for k in range(n, 0, -1):
        b1, b2 = coeffs[k] + two_x * b1 - b2, b1
    val = mp.mpc(coeffs[0]) / 2 + mp.mpc(x) * b1 - b2
    if isinstance(x, (int, float, mp.mpf)) or (isinstance(x, mp.mpc) and x.imag == 0):
        return val.real
    return val


# ---------------------------------------------------------------------------
# quadrature


def _node_values(eval_fn, M: int, cache: dict | None):
    """Values at the Chebyshev extrema cos(j*pi/M), j = 0..M (nested in M)."""
    vals = []
    for j in range(M + 1):
        if cache is not None:
            g = math.gcd(j, M)
            key = (j // g, M // g)
            v = cache.get(key)
            if v is None:
                v = eval_fn(mp.cospi(mp.mpf(j) / M))
                cache[key] = v
        else:
            v = eval_fn(mp.cospi(mp.mpf(j) / M))
        vals.append(v)
    return vals


def _dct1(vals, N: int):
    """Coefficients a_k, k = 0..N, of the degree-M interpolant through vals."""
    M = len(vals) - 1
    table = [mp.cospi(mp.mpf(t) / M) for t in range(2 * M)]
    out = []
    for k in range(N + 1):
        acc = vals[0] / 2 + vals[M] * (mp.mpf(-1) ** (k % 2)) / 2
        kj = 0
        for j in range(1, M):
            kj += k
            if kj >= 2 * M:
                kj -= 2 * M
            acc += vals[j] * table[kj]
        out.append(acc * 2 / M)
    return out


def chebyshev_quadrature(eval_fn, N: int, tol=None, cache: dict | None = None,
                         start_nodes: int | None = None, require_real: bool = True):
    """Chebyshev coefficients of eval_fn by node doubling until stable.

    Returns (coeffs, achieved_agreement).  Raises QuadratureNonConvergence
    after MAX_DOUBLINGS doublings (or past 2^20 nodes), which in practice
    means a singularity sits on or too near the interval.
    """
    if tol is None:
        tol = tol_half()
    M = start_nodes or max(64, 1 << (max(N, 1) - 1).bit_length())
    vals = _node_values(eval_fn, M, cache)
    prev = _dct1(vals, N)
    for _ in range(MAX_DOUBLINGS):
        M *= 2
        if M > MAX_QUAD_NODES:
            break
        vals = _node_values(eval_fn, M, cache)
        cur = _dct1(vals, N)
        scale = max(mp.mpf(1), max(abs(c) for c in cur))
        err = max(abs(a - b) for a, b in zip(prev, cur))
        if err <= tol * scale:
            if require_real:
                bad = max(abs(mp.mpc(c).imag) for c in cur)
                if bad > tol * scale:
                    raise ValueError(f"quadrature produced non-real coefficients "
                                     f"(max imag {mp.nstr(bad, 5)}); the function is "
                                     "not real on [-1, 1]")
                cur = [mp.mpc(c).real for c in cur]
            return cur, err
        prev = cur
    raise QuadratureNonConvergence(
        f"coefficients did not stabilize after {MAX_DOUBLINGS} doublings "
        f"(N={N}); singularity on or too near [-1, 1]?")


def cheb_coeffs(f: FunctionSpec, N: int, precision: int | None = None) -> ChebSeries:
    """Fourier-Chebyshev coefficients a_0..a_N of f, primed cosine convention."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if precision is not None:
        mp.mp.dps = precision

    def ev(x):
        v = mp.mpc(f.evaluator(x))
        return v

    cache = f._node_cache.setdefault(mp.mp.dps, {})
    coeffs, err = chebyshev_quadrature(ev, N, cache=cache)
    return ChebSeries(tuple(coeffs), precision=mp.mp.dps, quad_error=err)


def cheb_coeffs_fixed(eval_fn, N: int, nodes: int):
    """One-shot DCT at a fixed node count; test oracle, no doubling contract."""
    vals = _node_values(eval_fn, nodes, None)
    return _dct1(vals, N)


# ---------------------------------------------------------------------------
# partial sums


class ChebPartialSum:
    """Partial sum S_n as a z-plane polynomial in Chebyshev form.

    Evaluates by the Clenshaw backward recurrence; expands to the monomial
    basis only on demand (to_poly).
    """

    def __init__(self, coeffs: Sequence):
        self.coeffs = tuple(mp.mpf(c) for c in coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return clenshaw(self.coeffs, x)

    def to_poly(self) -> Poly:
        return Poly(cheb_to_monomial(self.coeffs, "z").coeffs, "z")


def partial_sum(s: ChebSeries, n: int) -> ChebPartialSum:
    if n > s.N:
        raise ValueError(f"partial sum degree {n} exceeds stored N={s.N}")
    return ChebPartialSum(s.coeffs[: n + 1])


def partial_sum_zeros(s: ChebSeries, n: int) -> list:
    """All n zeros of S_n in the plane.

    Seeds come from the scaled palindromic transplant p(w) = w^n S_n(Zh(w))
    solved in double precision (the Chebyshev-basis companion form in the
    Joukowski variable), then the monomial form of S_n is polished to working
    precision with poly_roots.
    """
    if n > s.N:
        raise ValueError(f"n={n} exceeds stored N={s.N}")
    a = list(s.coeffs[: n + 1])
    amax = max(abs(c) for c in a)
    if amax == 0 or abs(a[n]) <= mp.mpf(10) ** (-mp.mp.dps + 10) * amax:
        raise ValueError(f"leading coefficient a_{n} is negligible; "
                         "pick a different n")
    # balance radius: for geometrically decaying coefficients this is ~ rho0
    rho = (amax / abs(a[n])) ** (mp.mpf(1) / n)
    rho = max(rho, mp.mpf(1))
    pw = [mp.mpf(0)] * (2 * n + 1)
    pw[n] += a[0] / 2
    for k in range(1, n + 1):
        pw[n + k] += a[k] / 2
        pw[n - k] += a[k] / 2
    scaled = [c * rho ** j for j, c in enumerate(pw)]
    smax = max(abs(c) for c in scaled)
    arr = np.array([float(c / smax) for c in scaled][::-1])
    zw = np.roots(arr)                     # zeta roots
    zs = []
    for zeta in zw:
        w = mp.mpc(zeta) * rho
        if abs(w) == 0:
            continue
        zs.append((w + 1 / w) / 2)
    seeds = _pair_down(zs, n)
    p = cheb_to_monomial(a, "z")
    return poly_roots(p, seeds=seeds)


def _pair_down(points: list, n: int) -> list:
    """Collapse the 2n Joukowski-doubled roots to n seed points."""
    pts = sorted(points, key=lambda z: (mp.re(z), mp.im(z)))
    used = [False] * len(pts)
    seeds = []
    for i, p in enumerate(pts):
        if used[i]:
            continue
        used[i] = True
        best, bestd = None, None
        for j in range(i + 1, len(pts)):
            if used[j]:
                continue
            d = abs(pts[j] - p)
            if bestd is None or d < bestd:
                best, bestd = j, d
        if best is not None:
            used[best] = True
            seeds.append((p + pts[best]) / 2)
        else:
            seeds.append(p)
    if len(seeds) > n:
        seeds = seeds[:n]
    while len(seeds) < n:
        seeds.append(seeds[-1] + mp.mpf("0.01"))
    return seeds


# ---------------------------------------------------------------------------
# holomorphy index


class Rho0Estimate(NamedTuple):
    value: mp.mpf
    superexponential: bool


def decay_radius(coeffs: Sequence) -> Rho0Estimate:
    """Fit 1/R = limsup |c_k|^(1/k) from the tail decay of a coefficient list.

    Least-squares slope of log|c_k| against k over the last half of the
    usable coefficients (those above 10^(-precision+10)).  A systematically
    steepening slope flags superexponential decay (no finite singularity).
    """
    floor = mp.mpf(10) ** (-mp.mp.dps + 10)
    pts = [(k, float(mp.log(abs(c), 10)))
           for k, c in enumerate(coeffs) if abs(c) > floor]
    if len(pts) < 10:
        raise InsufficientDecay(f"only {len(pts)} usable coefficients")
    half = pts[len(pts) // 2:]
    ks = np.array([p[0] for p in half], dtype=float)
    ys = np.array([p[1] for p in half], dtype=float)
    slope = np.polyfit(ks, ys, 1)[0]
    value = mp.mpf(10) ** (-mp.mpf(slope))
    superexp = False
    if len(half) >= 8:
        quad = np.polyfit(ks, ys, 2)[0]
        span = ks[-1] - ks[0]
        # curvature of log|c_k| that dominates the window means the decay is
        # steepening, not geometric
        if quad < 0 and abs(quad) * (span / 2) ** 2 > 2.0:
            superexp = True
    return Rho0Estimate(value, superexp)


def rho0_estimate(s: ChebSeries) -> Rho0Estimate:
    """Holomorphy index rho0 of the expanded function, from coefficient decay."""
    return decay_radius(s.coeffs)
