"""Joukowski / Faber transplant machinery for E = [-1, 1].

The exterior conformal map is phi(z) = z + sqrt(z^2 - 1) with the branch
phi(z) ~ 2z at infinity, and its inverse is psi(w) = (w + 1/w)/2.  The Faber
polynomials of the interval are F_0 = 1 and F_k = 2 T_k for k >= 1, and the
Faber operator U sends sum c_k F_k(z) to the power series sum c_k w^k.

Convention ownership: the factor relating T_k and F_k lives only in this
module.  A ChebSeries in the primed cosine convention (a_0/2 + sum a_k T_k)
has the Faber expansion with c_k = a_k/2 uniformly in k, so

    faber_forward:  t_k = a_k / 2        faber_inverse:  a_k = 2 t_k.

Rational functions transplant by partial fractions: the key closed form is

    U^{-1}[ 1/(w - w0) ](z) = psi'(w0) / (z - psi(w0)),      |w0| > 1,

and higher-order poles follow by differentiating in w0, which is done here
exactly through a small Laurent-polynomial recurrence (no numerical
differentiation).  The contour-integral inversion formula is retained as a
cross-check oracle (faber_inverse_contour).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath as mp

from .chebseries import ChebSeries, decay_radius
from .numerics import (Poly, RationalFunction, cheb_to_monomial, cluster_roots,
                       poly_roots, tol_half, tol_third)


class BranchAmbiguity(ValueError):
    """phi(x) for x strictly inside (-1, 1) needs an explicit side."""


class RadiusTooSmall(ValueError):
    """Power series has estimated radius of convergence <= 1."""


class PoleOnUnitCircle(ValueError):
    """A pole sits (numerically) on |w| = 1; the Faber correspondence is undefined."""


def phi(z, side: str | None = None):
    """phi(z) = z + sqrt(z^2-1), exterior branch (|phi| > 1 off E, ~2z at infinity).

    For x strictly inside (-1, 1) the two boundary values differ; pass
    side='+' or side='-' to select the limit from the upper/lower half plane.
    """
    z = mp.mpc(z)
    if z.imag == 0 and -1 < z.real < 1:
        if side is None:
            raise BranchAmbiguity(
                "phi is ambiguous on (-1, 1); pass side='+' or side='-'")
        x = z.real
        s = mp.sqrt(1 - x ** 2)
        return mp.mpc(x, s) if side == "+" else mp.mpc(x, -s)
    # sqrt(z-1)*sqrt(z+1) realizes the branch cut exactly on [-1, 1]
    return z + mp.sqrt(z - 1) * mp.sqrt(z + 1)


def psi(w):
    """Joukowski map psi(w) = (w + 1/w)/2."""
    w = mp.mpc(w)
    if w == 0:
        raise ZeroDivisionError("psi is singular at w = 0")
    return (w + 1 / w) / 2


def psi_prime(w):
    w = mp.mpc(w)
    return (1 - w ** -2) / 2


class ConformalPair(NamedTuple):
    """The (phi, psi) pair for the interval, packaged for callers."""
    phi: object
    psi: object


CONFORMAL_PAIR = ConformalPair(phi, psi)


@dataclass(frozen=True)
class Ellipse:
    """Canonical ellipse Gamma_rho = {z : |phi(z)| = rho}, foci +-1."""

    rho: mp.mpf

    def __post_init__(self):
        object.__setattr__(self, "rho", mp.mpf(self.rho))
        if self.rho <= 1:
            raise ValueError("ellipse index rho must be > 1")

    @property
    def semi_major(self):
        return (self.rho + 1 / self.rho) / 2

    @property
    def semi_minor(self):
        return (self.rho - 1 / self.rho) / 2

    def boundary_points(self, n: int) -> list:
        """n points psi(rho * e^{i theta}) around the ellipse."""
        return [psi(self.rho * mp.expjpi(2 * mp.mpf(k) / n)) for k in range(n)]

    def phi_modulus(self, z):
        """|phi(z)|, extended by 1 on the interval itself."""
        z = mp.mpc(z)
        if z.imag == 0 and -1 <= z.real <= 1:
            return mp.mpf(1)
        return abs(phi(z))

    def contains(self, z) -> bool:
        return self.phi_modulus(z) < self.rho


# ---------------------------------------------------------------------------
# power series in the w-plane


@dataclass
class PowerSeries:
    """Taylor coefficients at w = 0 of the transplanted function."""

    coeffs: tuple
    precision: int = 0

    def __post_init__(self):
        self.coeffs = tuple(mp.mpf(c) if mp.mpc(c).imag == 0 else mp.mpc(c)
                            for c in self.coeffs)
        if self.precision == 0:
            self.precision = mp.mp.dps

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __call__(self, w):
        acc = mp.mpc(0)
        for c in reversed(self.coeffs):
            acc = acc * w + c
        return acc

    def radius_estimate(self):
        """Estimated radius of convergence, 1/limsup |t_k|^{1/k}."""
        return decay_radius(self.coeffs)


def faber_forward(s: ChebSeries) -> PowerSeries:
    """U(f): Chebyshev series (primed convention) -> power series, t_k = a_k/2."""
    return PowerSeries(tuple(c / 2 for c in s.coeffs), precision=s.precision)


def faber_inverse(t: PowerSeries, target_len: int | None = None) -> ChebSeries:
    """U^{-1}: power series -> Chebyshev series, a_k = 2 t_k.

    Raises RadiusTooSmall when the ratio test indicates R0 <= 1, in which
    case the image would not be holomorphic on the interval.
    """
    n = t.N if target_len is None else min(target_len, t.N)
    if t.N >= 20:
        est = t.radius_estimate()
        if not est.superexponential and est.value <= 1:
            raise RadiusTooSmall(
                f"estimated radius {mp.nstr(est.value, 6)} <= 1")
    coeffs = []
    for c in t.coeffs[: n + 1]:
        c = mp.mpc(c)
        if abs(c.imag) > tol_half() * (1 + abs(c)):
            raise ValueError("power series is not real; cannot form a real "
                             "Chebyshev series")
        coeffs.append(2 * c.real)
    return ChebSeries(tuple(coeffs), precision=t.precision)


def faber_inverse_contour(tilde_f, z, rho, nodes: int = 256):
    """Inversion by the contour integral (1/2pi i) oint f~(phi(t))/(t - z) dt.

    Trapezoidal rule over the canonical ellipse Gamma_rho; kept as a low-degree
    cross-check oracle for the coefficient/partial-fraction routes.
    """
    z = mp.mpc(z)
    acc = mp.mpc(0)
    for k in range(nodes):
        u = rho * mp.expjpi(2 * mp.mpf(k) / nodes)   # w on |w| = rho
        t = psi(u)
        dt = psi_prime(u) * u * 2 * mp.pi * mp.mpc(0, 1) / nodes
        acc += tilde_f(phi(t)) / (t - z) * dt
    return acc / (2 * mp.pi * mp.mpc(0, 1))


# ---------------------------------------------------------------------------
# rational transplant (Lemma-3 route)


def _laurent_mul(a: dict, b: dict) -> dict:
    out = {}
    for pa, ca in a.items():
        for pb, cb in b.items():
            out[pa + pb] = out.get(pa + pb, Fraction(0)) + ca * cb
    return out


def _laurent_diff(a: dict) -> dict:
    return {p - 1: p * c for p, c in a.items() if p != 0}


def _laurent_eval(a: dict, u):
    return sum(mp.mpc(c.numerator) / c.denominator * u ** p for p, c in a.items())


_PSI_PRIME = {0: Fraction(1, 2), -2: Fraction(-1, 2)}


def _inverse_pole_basis(max_mult: int) -> list:
    """Coefficient functions C_i^{(m)}(u) with

        U^{-1}[(w - u)^{-m}] = (1/(m-1)!) sum_i C_i^{(m)}(u) (z - psi(u))^{-i}.

    Derived by differentiating psi'(u)/(z - psi(u)) in u; each derivative acts
    on the basis G_i = (z - psi(u))^{-i} as G_i' = i psi'(u) G_{i+1}, so the
    coefficients stay Laurent polynomials in u with rational coefficients.
    """
    levels = []
    cur = {1: dict(_PSI_PRIME)}
    levels.append(cur)
    for _ in range(1, max_mult):
        nxt = {}
        for i, ci in cur.items():
            d = _laurent_diff(ci)
            if d:
                acc = nxt.setdefault(i, {})
                for p, c in d.items():
                    acc[p] = acc.get(p, Fraction(0)) + c
            prod = _laurent_mul(ci, _PSI_PRIME)
            acc = nxt.setdefault(i + 1, {})
            for p, c in prod.items():
                acc[p] = acc.get(p, Fraction(0)) + i * c
        cur = nxt
        levels.append(cur)
    return levels


def _series_inverse(d: Sequence, length: int) -> list:
    """Reciprocal of a power series with d[0] != 0, to the given length."""
    inv = [1 / mp.mpc(d[0])]
    for k in range(1, length):
        acc = mp.mpc(0)
        for j in range(1, min(k, len(d) - 1) + 1):
            acc += d[j] * inv[k - j]
        inv.append(-acc / d[0])
    return inv


def map_rational(r: RationalFunction, eps_circle=None) -> RationalFunction:
    """U^{-1} of a w-plane rational function, as an explicit z-plane rational.

    Each pole w0 (all must satisfy |w0| > 1 modulo eps_circle) maps to a pole
    of the same multiplicity at psi(w0); the polynomial part maps through the
    Faber polynomials.  Raises PoleOnUnitCircle when a pole hugs |w| = 1.
    """
    if r.plane != "w":
        raise ValueError("map_rational expects a w-plane rational function")
    if eps_circle is None:
        eps_circle = mp.mpf("1e-20")
    was_real = r.num.is_real() and r.den.is_real()

    bpart, rem = r.num.divmod(r.den)
    if r.den.degree == 0:
        poles = []
    else:
        roots = poly_roots(r.den)
        poles = cluster_roots(roots)
    for w0, _ in poles:
        if abs(abs(w0) - 1) <= eps_circle:
            raise PoleOnUnitCircle(f"pole at {mp.nstr(w0, 8)} sits on the unit circle")

    # polynomial part: U^{-1}(w^k) = F_k(z) = 2T_k (k>=1), 1 (k=0)
    poly_z = cheb_to_monomial([2 * c for c in bpart.coeffs], "z")

    max_mult = max((m for _, m in poles), default=0)
    basis = _inverse_pole_basis(max_mult) if max_mult else []

    lead = r.den.coeffs[-1]
    pieces = []          # (numerator Poly in (z - z0) powers, z0, mult)
    for w0, mult in poles:
        z0 = psi(w0)
        denrest = Poly(r.den.coeffs, "w")
        for _ in range(mult):
            denrest = denrest.deflate(w0)
        nsh = list(rem.taylor_at(w0)[:mult])
        nsh += [mp.mpc(0)] * (mult - len(nsh))
        dsh = list(denrest.taylor_at(w0)[:mult])
        dsh += [mp.mpc(0)] * (mult - len(dsh))
        inv = _series_inverse(dsh, mult)
        # A_m = coefficient of (w-w0)^{mult-m} in (w-w0)^{mult} * r(w)
        amc = []
        for i in range(mult):
            acc = mp.mpc(0)
            for j in range(i + 1):
                acc += nsh[j] * inv[i - j]
            amc.append(acc)
        A = {m: amc[mult - m] for m in range(1, mult + 1)}
        # beta_i = sum_{m>=i} A_m / (m-1)! * C_i^{(m)}(w0)
        beta = [mp.mpc(0)] * (mult + 1)
        fact = mp.mpf(1)
        for m in range(1, mult + 1):
            if m > 1:
                fact *= (m - 1)
            if A[m] == 0:
                continue
            for i, ci in basis[m - 1].items():
                beta[i] += A[m] / fact * _laurent_eval(ci, w0)
        # numerator over (z - z0)^mult:  sum_i beta_i (z - z0)^{mult - i}
        numj = Poly((mp.mpc(0),), "z")
        power = Poly((mp.mpc(1),), "z")
        powers = [power]
        lin = Poly((-z0, mp.mpc(1)), "z")
        for _ in range(mult):
            power = power * lin
            powers.append(power)
        for i in range(1, mult + 1):
            if beta[i] != 0:
                numj = numj + powers[mult - i].scale(beta[i])
        pieces.append((numj, z0, mult))

    qz = Poly((mp.mpc(1),), "z")
    for _, z0, mult in pieces:
        lin = Poly((-z0, mp.mpc(1)), "z")
        for _ in range(mult):
            qz = qz * lin
    total = poly_z * qz
    for numj, z0, mult in pieces:
        cof = Poly(qz.coeffs, "z")
        for _ in range(mult):
            cof = cof.deflate(z0)
        total = total + numj * cof
    out = RationalFunction(total, qz, "z")
    if was_real:
        try:
            out = out.realified()
        except ValueError:
            pass
    return out
