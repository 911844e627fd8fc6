"""Extended-precision numerical substrate: scalars, polynomials, linear solves, roots.

Everything downstream works over mpmath arbitrary-precision reals/complexes.
The working precision (decimal digits) is a global run parameter, default 200;
it is deliberately generous because the Hankel systems behind degree-n Pade
approximants have condition numbers growing geometrically in n.

Conventions used throughout the package:

* polynomials store coefficients from degree 0 upward (monomial basis),
* every polynomial carries a plane tag, ``'z'`` for objects living over the
  interval [-1, 1] and ``'w'`` for objects living over the unit disk,
* comparisons against zero always go through an explicit tolerance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import mpmath as mp
import numpy as np

DEFAULT_PRECISION = 200
MIN_PRECISION = 32

_ROOT_ITER_BUDGET = 200


class NonConvergence(RuntimeError):
    """Iteration failed to reach the requested tolerance.

    Usually a sign of ill-conditioning; the caller should raise the working
    precision rather than loosen the tolerance.
    """


class RankDeficient(RuntimeError):
    """A pivot fell below the rank threshold during elimination.

    For Hankel/Pade systems this signals block structure rather than failure;
    ``rank`` is the number of pivots accepted before the breakdown.
    """

    def __init__(self, rank: int, message: str | None = None):
        self.rank = rank
        super().__init__(message or f"numerical rank {rank}")


def set_precision(digits: int) -> None:
    """Set the global working precision in decimal digits (>= 32)."""
    if digits < MIN_PRECISION:
        raise ValueError(f"precision must be >= {MIN_PRECISION} digits, got {digits}")
    mp.mp.dps = digits


def precision() -> int:
    """Current working precision in decimal digits."""
    return mp.mp.dps


class working_precision:
    """Context manager that temporarily switches the working precision."""

    def __init__(self, digits: int):
        if digits < MIN_PRECISION:
            raise ValueError(f"precision must be >= {MIN_PRECISION} digits, got {digits}")
        self.digits = digits
        self._saved = None

    def __enter__(self):
        self._saved = mp.mp.dps
        mp.mp.dps = self.digits
        return self

    def __exit__(self, *exc):
        mp.mp.dps = self._saved
        return False


def tol_half() -> mp.mpf:
    """10^(-precision/2), the package-wide 'numerically zero' threshold."""
    return mp.mpf(10) ** (-(mp.mp.dps // 2))


def tol_third() -> mp.mpf:
    """10^(-precision/3), used for end-to-end pipeline verifications."""
    return mp.mpf(10) ** (-(mp.mp.dps // 3))


def is_zero(x, tol=None) -> bool:
    """Tolerance comparison against zero (never exact equality)."""
    if tol is None:
        tol = tol_half()
    return abs(x) <= tol


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Poly:
    """Polynomial c0 + c1 x + ... + cd x^d over mpmath complexes.

    ``plane`` records which coordinate the variable lives in ('z' or 'w').
    Trailing coefficients below 10^(-precision/2) relative to the largest one
    are trimmed at construction, so the leading coefficient of a nonzero
    polynomial is always meaningful.
    """

    coeffs: tuple
    plane: str = "z"

    def __post_init__(self):
        cs = [mp.mpc(c) for c in self.coeffs] or [mp.mpc(0)]
        scale = max(abs(c) for c in cs)
        if scale > 0:
            cut = scale * tol_half()
            while len(cs) > 1 and abs(cs[-1]) <= cut:
                cs.pop()
        else:
            cs = [mp.mpc(0)]
        object.__setattr__(self, "coeffs", tuple(cs))

    # -- basic queries ------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self, tol=None) -> bool:
        return all(is_zero(c, tol) for c in self.coeffs)

    def is_real(self, tol=None) -> bool:
        if tol is None:
            scale = max(abs(c) for c in self.coeffs)
            tol = scale * tol_third()
        return all(abs(c.imag) <= tol for c in self.coeffs)

    def __call__(self, x):
        """Horner evaluation."""
        acc = mp.mpc(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_scale(self, x) -> mp.mpf:
        """sum |c_k| |x|^k, the natural backward-error scale at x."""
        ax = abs(mp.mpc(x))
        acc = mp.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * ax + abs(c)
        return acc

    # -- arithmetic ---------------------------------------------------------

    def _like(self, coeffs) -> "Poly":
        return Poly(tuple(coeffs), self.plane)

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        out = [mp.mpc(0)] * n
        for i, c in enumerate(a):
            out[i] += c
        for i, c in enumerate(b):
            out[i] += c
        return self._like(out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        out = [mp.mpc(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca == 0:
                continue
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return self._like(out)

    def scale(self, s) -> "Poly":
        return self._like([c * s for c in self.coeffs])

    def deriv(self) -> "Poly":
        if self.degree == 0:
            return self._like([mp.mpc(0)])
        return self._like([k * c for k, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "Poly":
        lead = self.coeffs[-1]
        if is_zero(lead):
            raise ZeroDivisionError("cannot normalize a (numerically) zero polynomial")
        return self.scale(1 / lead)

    def deflate(self, root) -> "Poly":
        """Synthetic division by (x - root); the remainder is discarded.

        Runs top-down for |root| <= 1 and bottom-up otherwise: each direction
        is stable only when the per-step factor (root, resp. 1/root) does not
        amplify, and large spurious roots do occur in Pade denominators.
        """
        root = mp.mpc(root)
        n = self.degree
        if n < 1:
            return self._like([mp.mpc(0)])
        if abs(root) <= 1:
            out = []
            acc = mp.mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * root + c
                out.append(acc)
            return self._like(out[::-1][1:])
        # backward recurrence: d_0 = -c_0/r, d_k = (d_{k-1} - c_k)/r
        out = [-self.coeffs[0] / root]
        for k in range(1, n):
            out.append((out[k - 1] - self.coeffs[k]) / root)
        return self._like(out)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        """Polynomial long division: self = q*other + r with deg r < deg other."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        dn, dd = self.degree, other.degree
        if dn < dd:
            return self._like([mp.mpc(0)]), self
        q = [mp.mpc(0)] * (dn - dd + 1)
        lead = other.coeffs[-1]
        for k in range(dn - dd, -1, -1):
            f = rem[dd + k] / lead
            q[k] = f
            for j, c in enumerate(other.coeffs):
                rem[j + k] -= f * c
        return self._like(q), self._like(rem[:dd] if dd > 0 else [mp.mpc(0)])

    def taylor_at(self, x0) -> tuple:
        """Coefficients of self(x0 + h) as a polynomial in h (repeated deflation)."""
        cur = list(self.coeffs)
        out = []
        for _ in range(len(self.coeffs)):
            acc = mp.mpc(0)
            new = []
            for c in reversed(cur):
                acc = acc * x0 + c
                new.append(acc)
            new = new[::-1]
            out.append(new[0])
            cur = new[1:]
            if not cur:
                break
        return tuple(out)

    def realified(self, tol=None) -> "Poly":
        """Drop imaginary parts that are negligible; raise if they are not."""
        scale = max(abs(c) for c in self.coeffs)
        if tol is None:
            tol = scale * tol_third()
        bad = max((abs(c.imag) for c in self.coeffs), default=mp.mpf(0))
        if bad > tol:
            raise ValueError(f"polynomial is not numerically real (max imag {mp.nstr(bad, 5)})")
        return self._like([mp.mpc(c.real) for c in self.coeffs])

    @staticmethod
    def from_roots(roots: Iterable, plane: str = "z", lead=1) -> "Poly":
        out = [mp.mpc(lead)]
        for r in roots:
            r = mp.mpc(r)
            # multiply by (x - r): new[i] = old[i-1] - r*old[i]
            new = [mp.mpc(0)] * (len(out) + 1)
            for i, c in enumerate(out):
                new[i + 1] += c
                new[i] -= r * c
            out = new
        return Poly(tuple(out), plane)


def cheb_to_monomial(series_coeffs: Sequence, plane: str = "z") -> Poly:
    """Expand a primed-convention Chebyshev series a0/2 + sum a_k T_k to monomials.

    Fine at extended precision; the 2^k coefficient growth that makes this a
    bad idea in double precision is harmless here.
    """
    a = [mp.mpf(c) if not isinstance(c, mp.mpc) else c for c in series_coeffs]
    n = len(a) - 1
    acc = [mp.mpc(0)] * (max(n, 1) + 1)
    tkm1 = [mp.mpc(1)]            # T_0
    tk = [mp.mpc(0), mp.mpc(1)]   # T_1
    for i, c in enumerate(tkm1):
        acc[i] += a[0] / 2 * c
    if n >= 1:
        for i, c in enumerate(tk):
            acc[i] += a[1] * c
    for k in range(2, n + 1):
        # T_{k} = 2 x T_{k-1} - T_{k-2}
        tkp1 = [mp.mpc(0)] * (k + 1)
        for i, c in enumerate(tk):
            tkp1[i + 1] += 2 * c
        for i, c in enumerate(tkm1):
            tkp1[i] -= c
        for i, c in enumerate(tkp1):
            acc[i] += a[k] * c
        tkm1, tk = tk, tkp1
    return Poly(tuple(acc), plane)


# ---------------------------------------------------------------------------
# root finding


def _initial_roots(p: Poly) -> list:
    """Machine-precision seed roots from a scale-balanced companion matrix."""
    d = p.degree
    c0, cd = abs(p.coeffs[0]), abs(p.coeffs[-1])
    if c0 > 0 and cd > 0:
        r = mp.mpf(abs(c0 / cd)) ** (mp.mpf(1) / d)
        r = min(max(r, mp.mpf("1e-8")), mp.mpf("1e8"))
    else:
        r = mp.mpf(1)
    scaled = [c * r ** k for k, c in enumerate(p.coeffs)]
    scale = max(abs(c) for c in scaled)
    try:
        arr = np.array([complex(c / scale) for c in scaled][::-1])
        if not np.all(np.isfinite(arr)) or abs(arr[0]) == 0:
            raise ValueError
        seeds = np.roots(arr)
        if len(seeds) != d or not np.all(np.isfinite(seeds)):
            raise ValueError
        return [mp.mpc(s) * r for s in seeds]
    except (ValueError, np.linalg.LinAlgError):
        # fall back to a circle of radius r, slightly detuned off symmetry axes
        return [r * mp.expjpi(mp.mpf(2 * k + 1) / d + mp.mpf("0.137"))
                for k in range(d)]


def poly_roots(p: Poly, tol=None, seeds: Sequence | None = None,
               max_iter: int = _ROOT_ITER_BUDGET) -> list:
    """All degree(p) roots of p, with multiplicity, at working precision.

    Machine-precision companion-matrix seeds (or caller-supplied ``seeds``)
    followed by simultaneous Aberth-Ehrlich polishing in extended precision.
    Accepts a root r when |p(r)| <= tol * (sum |c_k| |r|^k); raises
    NonConvergence otherwise, which normally means the precision is too low
    for the conditioning of p.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    if tol is None:
        tol = tol_half()
    tol = mp.mpf(tol)
    z = [mp.mpc(s) for s in (seeds if seeds is not None else _initial_roots(p))]
    if len(z) != p.degree:
        raise ValueError(f"need {p.degree} seeds, got {len(z)}")
    dp = p.deriv()
    tiny = mp.mpf(10) ** (-mp.mp.dps + 8)
    stall = tol * mp.mpf("1e-3")
    for _ in range(max_iter):
        vals = [p(zi) for zi in z]
        move = mp.mpf(0)
        new = list(z)
        for i, zi in enumerate(z):
            if vals[i] == 0:
                continue
            dpi = dp(zi)
            if dpi == 0:
                new[i] = zi + tiny * (1 + abs(zi))
                move = max(move, tiny)
                continue
            wi = vals[i] / dpi
            s = mp.mpc(0)
            for j, zj in enumerate(z):
                if j != i:
                    dz = zi - zj
                    if dz == 0:
                        dz = tiny * (1 + abs(zi))
                    s += 1 / dz
            denom = 1 - wi * s
            delta = wi if abs(denom) < tiny else wi / denom
            new[i] = zi - delta
            move = max(move, abs(delta) / (1 + abs(zi)))
        z = new
        if move <= tiny:
            break
        if move <= stall and all(abs(p(zi)) <= tol * p.eval_scale(zi) * mp.mpf("1e-2")
                                 for zi in z):
            break
    bad = [zi for zi in z if abs(p(zi)) > tol * p.eval_scale(zi)]
    if bad:
        raise NonConvergence(
            f"{len(bad)} of {p.degree} roots failed |p(r)| <= tol*scale "
            f"(worst residual {mp.nstr(max(abs(p(b)) for b in bad), 5)}); "
            "raise the working precision")
    return z


def cluster_roots(roots: Sequence, tol=None) -> list:
    """Group nearly coincident roots into (center, multiplicity) pairs."""
    if tol is None:
        tol = mp.mpf(10) ** (-(mp.mp.dps // 4))
    tol = mp.mpf(tol)
    remaining = [mp.mpc(r) for r in roots]
    clusters = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        changed = True
        while changed:
            changed = False
            center = sum(members) / len(members)
            keep = []
            for r in remaining:
                if abs(r - center) <= tol * (1 + abs(center)):
                    members.append(r)
                    changed = True
                else:
                    keep.append(r)
            remaining = keep
        center = sum(members) / len(members)
        clusters.append((center, len(members)))
    return clusters


# ---------------------------------------------------------------------------
# linear algebra


class LinearSolution(NamedTuple):
    x: list
    rank: int
    residual: mp.mpf


def solve_linear(A: Sequence[Sequence], b: Sequence) -> LinearSolution:
    """Solve Ax = b by Gaussian elimination with full pivoting.

    Raises RankDeficient(rank) as soon as the pivot magnitude drops below
    10^(-precision/2) times the largest pivot seen; for the Pade/Hankel
    systems in this package that is block structure, not failure.
    """
    n = len(A)
    if n == 0 or any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("solve_linear needs a square system matching b")
    M = [[mp.mpc(v) for v in row] for row in A]
    rhs = [mp.mpc(v) for v in b]
    colperm = list(range(n))
    thresh_ratio = tol_half()
    pivmax = mp.mpf(0)
    for k in range(n):
        piv, pi, pj = mp.mpf(-1), k, k
        for i in range(k, n):
            for j in range(k, n):
                m = abs(M[i][j])
                if m > piv:
                    piv, pi, pj = m, i, j
        pivmax = max(pivmax, piv)
        if piv <= thresh_ratio * pivmax:
            raise RankDeficient(k)
        if pi != k:
            M[k], M[pi] = M[pi], M[k]
            rhs[k], rhs[pi] = rhs[pi], rhs[k]
        if pj != k:
            for row in M:
                row[k], row[pj] = row[pj], row[k]
            colperm[k], colperm[pj] = colperm[pj], colperm[k]
        pk = M[k][k]
        for i in range(k + 1, n):
            f = M[i][k] / pk
            if f == 0:
                continue
            M[i][k] = mp.mpc(0)
            for j in range(k + 1, n):
                M[i][j] -= f * M[k][j]
            rhs[i] -= f * rhs[k]
    y = [mp.mpc(0)] * n
    for k in range(n - 1, -1, -1):
        acc = rhs[k]
        for j in range(k + 1, n):
            acc -= M[k][j] * y[j]
        y[k] = acc / M[k][k]
    x = [mp.mpc(0)] * n
    for k in range(n):
        x[colperm[k]] = y[k]
    resid = mp.mpf(0)
    bnorm = max((abs(v) for v in b), default=mp.mpf(0))
    for i in range(n):
        acc = -mp.mpc(b[i])
        for j in range(n):
            acc += mp.mpc(A[i][j]) * x[j]
        resid = max(resid, abs(acc))
    if bnorm > 0 and resid > tol_half() * bnorm:
        warnings.warn(f"solve_linear residual {mp.nstr(resid, 5)} exceeds "
                      f"10^(-p/2)*|b|; system is ill-conditioned", RuntimeWarning)
    return LinearSolution(x, n, resid)


# ---------------------------------------------------------------------------
# rational functions


@dataclass(frozen=True)
class RationalFunction:
    """Ratio of two polynomials tagged with the plane they live in."""

    num: Poly
    den: Poly
    plane: str = "z"

    def __post_init__(self):
        if self.num.plane != self.plane or self.den.plane != self.plane:
            object.__setattr__(self, "num", Poly(self.num.coeffs, self.plane))
            object.__setattr__(self, "den", Poly(self.den.coeffs, self.plane))

    @property
    def degrees(self) -> tuple[int, int]:
        return (self.num.degree, self.den.degree)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def poles(self, tol=None) -> list:
        """(location, multiplicity) pairs from the denominator roots."""
        if self.den.degree < 1:
            return []
        return cluster_roots(poly_roots(self.den, tol=tol))

    def zeros(self, tol=None) -> list:
        if self.num.degree < 1:
            return []
        return cluster_roots(poly_roots(self.num, tol=tol))

    def realified(self, tol=None) -> "RationalFunction":
        return RationalFunction(self.num.realified(tol), self.den.realified(tol), self.plane)

    def normalized(self) -> "RationalFunction":
        """Scale so the denominator is monic."""
        lead = self.den.coeffs[-1]
        return RationalFunction(self.num.scale(1 / lead), self.den.scale(1 / lead), self.plane)
