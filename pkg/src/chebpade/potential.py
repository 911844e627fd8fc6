"""Logarithmic/Green potential theory around E = [-1, 1].

Closed forms in Joukowski coordinates:

    g_E(z, inf) = log|phi(z)|,
    g_E(z, t)   = log| (1 - conj(xi) zeta) / (zeta - xi) |,

with zeta = 1/phi(z), xi = 1/phi(t); intervals [c, d] (and straight complex
segments) transplant through the affine map u -> (2u - c - d)/(d - c).

The mixed Green-logarithmic equilibrium problem on E,

    theta V^lam(x) + G_K^lam(x) = w(theta)   on E,   lam in M_1(E),

is solved spectrally: writing d lam = u(phi) dphi / pi with x = cos(phi) and
u = 1 + sum a_m cos(m phi), the logarithmic potential is exact,
V^lam(cos phi) = log 2 + sum (a_m/m) cos(m phi), and only the smooth regular
part h_K = g_K + log|x - t| needs quadrature.  This module runs at moderate
precision: the closed-form kernels are cheap at any precision, while the
dense collocation and the discrete energies run in float64 because the
bottleneck is discretization error, not rounding.

Discrete energies follow the double-sum convention with the self-interaction
term log(1/delta_i), delta_i the local half-spacing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import mpmath as mp
import numpy as np

from .chebseries import FunctionSpec
from .faber import phi, psi


class NonPositiveDensity(RuntimeError):
    """Equilibrium solver produced a significantly negative density."""


class DomainError(ValueError):
    """Evaluation point lies on the excluded set (arc F or interval E)."""


# ---------------------------------------------------------------------------
# measures and compacts


@dataclass
class DiscreteMeasure:
    """Weighted point set representing a (usually unit) positive measure.

    Weights are kept in extended precision so unit mass holds to 1e-30;
    float views (points_np / weights_np) back the numpy kernels.  ``meta``
    optionally carries the smooth parametrization the measure was sampled
    from (used for spectrally exact potentials on the measure's own support).
    """

    points: tuple
    weights: tuple
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.points = tuple(mp.mpf(p) if mp.mpc(p).imag == 0 else mp.mpc(p)
                            for p in self.points)
        ws = [mp.mpf(w) for w in self.weights]
        if any(w < -mp.mpf("1e-12") for w in ws):
            raise ValueError("measure weights must be nonnegative")
        self.weights = tuple(max(w, mp.mpf(0)) for w in ws)

    @property
    def mass(self):
        return mp.fsum(self.weights)

    def normalized(self) -> "DiscreteMeasure":
        m = self.mass
        return DiscreteMeasure(self.points, tuple(w / m for w in self.weights),
                               dict(self.meta))

    @property
    def points_np(self) -> np.ndarray:
        return np.array([complex(p) for p in self.points])

    @property
    def weights_np(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def is_real_supported(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.points_np.imag) <= tol))

    @staticmethod
    def counting(points: Sequence) -> "DiscreteMeasure":
        n = len(points)
        return DiscreteMeasure(tuple(points), (mp.mpf(1) / n,) * n)


@dataclass(frozen=True)
class CompactSpec:
    """Admissible compact K disjoint from E: interval, union, or arc-polyline.

    kinds: 'interval' with data (c, d); 'interval-union' with data
    ((c1,d1), ...); 'arc' with data a tuple of polyline vertices.  Arcs are
    supported for potential evaluation (BEM) only; the equilibrium solver
    needs the closed-form interval kernel.
    """

    kind: str
    data: tuple
    conjugate_symmetric: bool = True

    @staticmethod
    def interval(c, d) -> "CompactSpec":
        c, d = float(c), float(d)
        if not c < d:
            raise ValueError("need c < d")
        if not (c > 1 or d < -1):
            raise ValueError("interval K must be disjoint from [-1, 1]")
        return CompactSpec("interval", (c, d))

    @staticmethod
    def union(*intervals) -> "CompactSpec":
        ivs = tuple((float(c), float(d)) for c, d in intervals)
        for c, d in ivs:
            if not (c > 1 or d < -1):
                raise ValueError("every component must be disjoint from [-1, 1]")
        sym = all(any(abs(c + d2) < 1e-12 and abs(d + c2) < 1e-12
                      for c2, d2 in ivs) or c > 1 or d < -1 for c, d in ivs)
        return CompactSpec("interval-union", ivs, sym)

    @staticmethod
    def arc(vertices: Sequence) -> "CompactSpec":
        vs = tuple(complex(v) for v in vertices)
        if len(vs) < 2:
            raise ValueError("an arc needs at least two vertices")
        for a, b in zip(vs[:-1], vs[1:]):
            for t in np.linspace(0.0, 1.0, 8):
                p = a + t * (b - a)
                if abs(p.imag) < 1e-12 and -1 <= p.real <= 1:
                    raise ValueError("arc crosses the interval [-1, 1]")
        sym = np.allclose(sorted(np.conj(vs), key=lambda z: (z.real, z.imag)),
                          sorted(vs, key=lambda z: (z.real, z.imag)), atol=1e-10)
        return CompactSpec("arc", vs, bool(sym))

    def panels(self, n: int) -> np.ndarray:
        """Panel endpoints along the compact, cos-graded toward endpoints."""
        if self.kind == "interval":
            c, d = self.data
            tau = 0.5 * (1 - np.cos(np.linspace(0, np.pi, n + 1)))
            return (c + (d - c) * tau).astype(complex)
        if self.kind == "arc":
            vs = np.array(self.data)
            seg = np.abs(np.diff(vs))
            cum = np.concatenate([[0.0], np.cumsum(seg)])
            total = cum[-1]
            tau = 0.5 * (1 - np.cos(np.linspace(0, np.pi, n + 1))) * total
            return np.interp(tau, cum, vs.real) + 1j * np.interp(tau, cum, vs.imag)
        raise NotImplementedError(f"panels for kind {self.kind!r}")

    def contains_point(self, x, tol: float = 1e-12) -> bool:
        if self.kind == "interval":
            c, d = self.data
            return abs(complex(x).imag) <= tol and c - tol <= complex(x).real <= d + tol
        if self.kind == "interval-union":
            return any(abs(complex(x).imag) <= tol
                       and c - tol <= complex(x).real <= d + tol
                       for c, d in self.data)
        return False


# ---------------------------------------------------------------------------
# Green functions (closed forms)


def _on_interval(z, c=-1.0, d=1.0, tol=None) -> bool:
    z = mp.mpc(z)
    if tol is None:
        tol = mp.mpf(10) ** (-mp.mp.dps // 2)
    return abs(z.imag) <= tol and c <= z.real <= d


def green_E_inf(z):
    """g_E(z, infinity) = log|z + sqrt(z^2-1)|, zero on E."""
    if _on_interval(z):
        return mp.mpf(0)
    return mp.log(abs(phi(z)))


def green_E(z, t):
    """Green function of the complement of E with pole at t (Joukowski form)."""
    if _on_interval(z) or _on_interval(t):
        return mp.mpf(0)
    zeta = 1 / phi(z)
    xi = 1 / phi(t)
    return mp.log(abs((1 - mp.conj(xi) * zeta) / (zeta - xi)))


def _affine(u, c, d):
    return (2 * mp.mpc(u) - c - d) / (mp.mpc(d) - c)


def green_interval_complement(z, t, interval):
    """Green function of the complement of [c, d] (or a complex segment) at pole t."""
    c, d = interval
    zu, tu = _affine(z, c, d), _affine(t, c, d)
    if _on_interval(zu) or _on_interval(tu):
        return mp.mpf(0)
    zeta = 1 / phi(zu)
    xi = 1 / phi(tu)
    return mp.log(abs((1 - mp.conj(xi) * zeta) / (zeta - xi)))


def green_interval_inf(z, interval):
    """g_[c,d](z, infinity) via the affine transplant."""
    c, d = interval
    zu = _affine(z, c, d)
    if _on_interval(zu):
        return mp.mpf(0)
    return mp.log(abs(phi(zu)))


# float64 vectorized twins used by the dense solvers


def _phi_np(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return z + np.sqrt(z - 1) * np.sqrt(z + 1)


def _green_E_np(z: np.ndarray, t: np.ndarray) -> np.ndarray:
    zeta = 1.0 / _phi_np(z)
    xi = 1.0 / _phi_np(t)
    return np.log(np.abs((1 - np.conj(xi) * zeta) / (zeta - xi)))


def _green_interval_np(z, t, c, d) -> np.ndarray:
    s = lambda u: (2 * np.asarray(u, dtype=complex) - c - d) / (d - c)
    return _green_E_np(s(z), s(t))


def _h_interval_diag_np(x: np.ndarray, c: float, d: float) -> np.ndarray:
    """h_K(x, x) = lim [g_K(x,t) + log|x-t|] for K = [c, d], x real off K."""
    s = (2 * np.asarray(x, dtype=float) - c - d) / (d - c)
    u = _phi_np(s)
    zeta = (1.0 / u).real
    dzdx = (2.0 / (d - c)) / (np.abs(u) * np.abs(np.sqrt(s - 1 + 0j) * np.sqrt(s + 1 + 0j)))
    return np.log(1 - zeta ** 2) - np.log(dzdx)


def _h_E_diag_np(t: np.ndarray) -> np.ndarray:
    """h_E(t, t) for real t outside [-1, 1]."""
    u = _phi_np(np.asarray(t, dtype=float))
    zeta = (1.0 / u).real
    dzdx = 1.0 / (np.abs(u) * np.abs(np.sqrt(t - 1 + 0j) * np.sqrt(t + 1 + 0j)))
    return np.log(1 - zeta ** 2) - np.log(dzdx)


# ---------------------------------------------------------------------------
# equilibrium problem on E


class EquilibriumResult(NamedTuple):
    measure: DiscreteMeasure
    w: float
    coeffs: np.ndarray          # cosine coefficients a_1.. of the density
    residual: float
    theta: float
    K: CompactSpec

    def measure_at(self, grid: int) -> DiscreteMeasure:
        """Resample the solved density on a finer cos-midpoint grid."""
        return _measure_from_cos_density(self.coeffs, grid)


def _cos_modes(phis: np.ndarray, n_modes: int) -> np.ndarray:
    m = np.arange(1, n_modes + 1)
    return np.cos(np.outer(phis, m))


def _measure_from_cos_density(a: np.ndarray, grid: int) -> DiscreteMeasure:
    phis = (np.arange(grid) + 0.5) * np.pi / grid
    u = 1.0 + _cos_modes(phis, len(a)) @ a
    u = np.maximum(u, 0.0)
    pts = np.cos(phis)
    w = u / u.sum()
    meas = DiscreteMeasure(tuple(mp.mpf(float(p)) for p in pts),
                           tuple(mp.mpf(float(x)) for x in w))
    meas.meta.update({"family": "cos-density-E", "coeffs": np.array(a),
                      "phis": phis, "density": u})
    return meas.normalized()


def solve_equilibrium(K: CompactSpec, theta, grid_size: int = 400) -> EquilibriumResult:
    """Equilibrium measure lam(theta) on E for the mixed potential problem.

    Collocation on a Chebyshev-point grid on E (cos of uniform midpoints in
    phi) with the logarithmic part handled exactly in the cosine basis and
    the smooth Green remainder by staggered midpoint quadrature.  Positivity
    of the density is enforced; the returned residual is the equilibrium
    relation checked on a finer verification grid.
    """
    if K.kind != "interval":
        raise NotImplementedError("equilibrium solver needs an interval compact")
    theta = float(theta)
    if theta < 0:
        raise ValueError("theta must be >= 0")
    c, d = K.data
    M = int(grid_size)
    n_modes = M - 1
    phis = (np.arange(M) + 0.5) * np.pi / M
    xs = np.cos(phis)
    M2 = 2 * M
    psis = (np.arange(M2) + 0.5) * np.pi / M2
    ys = np.cos(psis)

    # regular part of the Green kernel on E x E (collocation x quadrature)
    H = (_green_interval_np(xs[:, None], ys[None, :], c, d)
         + np.log(np.abs(xs[:, None] - ys[None, :]))) / M2
    Cq = _cos_modes(psis, n_modes)
    A = np.empty((M, M))
    m = np.arange(1, n_modes + 1)
    A[:, :n_modes] = (theta + 1) * _cos_modes(phis, n_modes) / m + H @ Cq
    A[:, n_modes] = -1.0
    b = -((theta + 1) * np.log(2.0) + H.sum(axis=1))
    sol = np.linalg.solve(A, b)
    a, w = sol[:n_modes], float(sol[n_modes])

    dens = 1.0 + _cos_modes(phis, n_modes) @ a
    if dens.min() < -1e-8:
        raise NonPositiveDensity(
            f"density minimum {dens.min():.3e}; grid too coarse")

    # verify the equilibrium relation on a finer grid
    Mv = 10 * M
    phiv = (np.arange(Mv) + 0.5) * np.pi / Mv
    xv = np.cos(phiv)
    M3 = 4 * M
    psif = (np.arange(M3) + 0.5) * np.pi / M3
    yf = np.cos(psif)
    uf = 1.0 + _cos_modes(psif, n_modes) @ a
    Vlog = np.log(2.0) + _cos_modes(phiv, n_modes) @ (a / m)
    Hv = (_green_interval_np(xv[:, None], yf[None, :], c, d)
          + np.log(np.abs(xv[:, None] - yf[None, :]))) @ uf / M3
    resid = float(np.abs((theta + 1) * Vlog + Hv - w).max())

    meas = _measure_from_cos_density(a, M)
    return EquilibriumResult(meas, w, a, resid, theta, K)


# ---------------------------------------------------------------------------
# balayage


def _disk_harmonic_weights(u: complex, psis: np.ndarray) -> np.ndarray:
    """Harmonic-measure density of C \\ [-1,1] seen from psi(u)^{-1}-image...

    Density (with respect to d psi on [0, pi], already including both sheet
    contributions) of the balayage of the point mass at the z-point with
    phi(z) = u, |u| > 1, onto [-1, 1]:

        P(psi) = (|u|^2 - 1)/(2 pi) * [ |u - e^{i psi}|^{-2} + |u - e^{-i psi}|^{-2} ].
    """
    au2 = abs(u) ** 2
    e = np.exp(1j * psis)
    return (au2 - 1) / (2 * np.pi) * (1.0 / np.abs(u - e) ** 2
                                      + 1.0 / np.abs(u - np.conj(e)) ** 2)


def balayage(mu: DiscreteMeasure, K: CompactSpec, grid_size: int = 1024) -> DiscreteMeasure:
    """Sweep mu out of the complement of K onto K, preserving total mass.

    For an interval K the harmonic-measure density is closed form through the
    Joukowski transplant; the output measure is sampled on a Chebyshev
    (cos-midpoint) grid of K and carries its smooth psi-density in ``meta``.
    Points of mu already on K stay untouched (their mass is re-deposited
    at the nearest grid point).
    """
    if K.kind != "interval":
        return _bem_balayage_measure(mu, K, grid_size)
    c, d = K.data
    if all(K.contains_point(p) for p in mu.points):
        return mu
    M = int(grid_size)
    psis = (np.arange(M) + 0.5) * np.pi / M
    tgt = 0.5 * (c + d) + 0.5 * (d - c) * np.cos(psis)
    dens = np.zeros(M)
    mass_mp = mu.mass
    for p, wt in zip(mu.points, mu.weights):
        wtf = float(wt)
        if K.contains_point(p):
            j = int(np.argmin(np.abs(tgt - complex(p).real)))
            dens[j] += wtf * M / np.pi
            continue
        s = (2 * complex(p) - c - d) / (d - c)
        u = complex(_phi_np(np.array([s]))[0])
        dens += wtf * _disk_harmonic_weights(u, psis)
    w = dens * np.pi / M
    out = DiscreteMeasure(tuple(mp.mpf(float(t)) for t in tgt),
                          tuple(mp.mpf(float(x)) for x in w))
    out.meta.update({"family": "cos-density-interval", "interval": (c, d),
                     "psis": psis, "density": dens * np.pi / M * M})
    out = out.normalized()
    out.meta["mass_target"] = mass_mp
    return out


# ---------------------------------------------------------------------------
# potentials of discrete measures


def log_potential(mu: DiscreteMeasure, z) -> float:
    """V^mu(z) = sum w_i log 1/|z - x_i| (z off the support)."""
    zp = complex(z)
    return float(-(mu.weights_np * np.log(np.abs(zp - mu.points_np))).sum())


def log_potential_np(mu: DiscreteMeasure, zs: np.ndarray) -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    return -np.log(np.abs(zs[:, None] - mu.points_np[None, :])) @ mu.weights_np


def log_potential_on_support(mu: DiscreteMeasure, targets_psi: np.ndarray | None = None):
    """V^mu on mu's own interval, spectrally exact for cos-density measures.

    Requires meta from solve_equilibrium / balayage; expands the smooth
    psi-density in cosines so the log kernel integrates in closed form.
    Returns (points, values).
    """
    meta = mu.meta
    fam = meta.get("family")
    if fam == "cos-density-E":
        cd = (-1.0, 1.0)
        dens = meta["density"]
    elif fam == "cos-density-interval":
        cd = meta["interval"]
        dens = meta["density"]
    else:
        raise ValueError("measure carries no smooth density parametrization")
    M = len(dens)
    psis = (np.arange(M) + 0.5) * np.pi / M
    mass = float(dens.sum() / M)
    # cosine coefficients: dens(psi) = mass + sum B_m cos(m psi), d nu = dens dpsi/pi,
    # so int T_m d nu = B_m/2 and the log kernel integrates term by term:
    # V(x(psi0)) = mass [log 2 + log(2/(d-c))] + sum (B_m/m) cos(m psi0)
    modes = min(M - 1, 400)
    B = 2.0 / M * (_cos_modes(psis, modes).T @ dens)
    if targets_psi is None:
        targets_psi = psis
    c, d = cd
    mvec = np.arange(1, modes + 1)
    vals = mass * (np.log(2.0) + np.log(2.0 / (d - c))) \
        + _cos_modes(targets_psi, modes) @ (B / mvec)
    pts = 0.5 * (c + d) + 0.5 * (d - c) * np.cos(targets_psi)
    return pts, vals


def green_potential_interval(mu: DiscreteMeasure, K: CompactSpec, z) -> float:
    """G_K^mu(z) = sum w_i g_K(z, x_i) for an interval K (float kernel)."""
    c, d = K.data
    g = _green_interval_np(np.array([complex(z)]), mu.points_np[None, :], c, d)
    return float((g[0] * mu.weights_np).sum())


def green_potential_interval_mp(mu: DiscreteMeasure, K: CompactSpec, z):
    """Same in extended precision (for rate predictions)."""
    return mp.fsum(w * green_interval_complement(z, p, K.data)
                   for p, w in zip(mu.points, mu.weights))


# ---------------------------------------------------------------------------
# discrete energies


def _half_spacings(x: np.ndarray) -> np.ndarray:
    """Local half-spacing delta_i of a sorted real point set."""
    d = np.empty_like(x)
    if len(x) == 1:
        return np.array([1.0])
    d[1:-1] = (x[2:] - x[:-2]) / 4.0
    d[0] = (x[1] - x[0]) / 2.0
    d[-1] = (x[-1] - x[-2]) / 2.0
    return np.abs(d)


def _double_sum(x: np.ndarray, w: np.ndarray, offdiag, diag: np.ndarray,
                chunk: int = 2048) -> float:
    """sum_{i != j} w_i w_j K(x_i, x_j) + sum_i w_i^2 diag_i, symmetric kernel."""
    total = 0.0
    n = len(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i0 in range(0, n, chunk):
            i1 = min(i0 + chunk, n)
            B = offdiag(x[i0:i1, None], x[None, i0:])
            for r in range(i1 - i0):
                B[r, : r + 1] = 0.0          # keep strictly upper pairs once
            total += 2.0 * float((w[i0:i1, None] * (w[None, i0:] * B)).sum())
    total += float((w ** 2 * diag).sum())
    return total


def _log_energy(x: np.ndarray, w: np.ndarray) -> float:
    delta = _half_spacings(x)
    return _double_sum(x, w, lambda a, b: -np.log(np.abs(a - b)), -np.log(delta))


def _coarsen(mu: DiscreteMeasure, cap: int):
    """Every-kth thinning (weights re-aggregated) for smooth-kernel sums."""
    x = mu.points_np.real
    w = mu.weights_np
    n = len(x)
    if n <= cap:
        return x, w
    k = int(np.ceil(n / cap))
    m = (n // k) * k
    xs = x[:m].reshape(-1, k)
    ws = w[:m].reshape(-1, k)
    wc = ws.sum(axis=1)
    xc = (xs * ws).sum(axis=1) / np.where(wc > 0, wc, 1)
    if m < n:
        wtail = w[m:].sum()
        xc = np.append(xc, (x[m:] * w[m:]).sum() / max(wtail, 1e-300))
        wc = np.append(wc, wtail)
    return xc, wc


_SMOOTH_CAP = 3000


def energy(K: CompactSpec | None, mu: DiscreteMeasure, theta) -> float:
    """Mixed energy J(K, mu; theta) = iint (theta log 1/|x-t| + g_K(x,t)) dmu dmu.

    Discrete double sums; the log-kernel diagonal uses log(1/delta_i) with
    delta_i the local half-spacing, and the Green-kernel diagonal adds the
    closed-form regular part h_K(x_i, x_i), which is exactly the split
    g_K = log 1/|x-t| + h_K summed term by term.  Since h_K is smooth its
    double sum is resolution independent (midpoint rule of an analytic
    integral) and is evaluated on a thinned point set; the singular log part
    always runs at the measure's full resolution.  Pass K=None for the pure
    logarithmic energy.
    """
    if not mu.is_real_supported():
        raise NotImplementedError("discrete energies expect measures on the line")
    order = np.argsort(mu.points_np.real)
    x = mu.points_np.real[order]
    w = mu.weights_np[order]
    theta = float(theta)
    total = 0.0
    Ilog = _log_energy(x, w)
    if theta != 0.0:
        total += theta * Ilog
    if K is not None:
        if K.kind != "interval":
            raise NotImplementedError("green energy needs an interval compact")
        c, d = K.data
        xc, wc = _coarsen(mu, _SMOOTH_CAP)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = _green_interval_np(xc[:, None], xc[None, :], c, d) \
                + np.log(np.abs(xc[:, None] - xc[None, :]))
        np.fill_diagonal(h, _h_interval_diag_np(xc, c, d))
        total += Ilog + float((wc[:, None] * wc[None, :] * h).sum())
    return total


def energy_phi(K: CompactSpec, mu: DiscreteMeasure) -> float:
    """J_phi(K, mu) = iint [log 1/|z-t| + g_E(z,t)] dmu dmu + 2 int g_E(z,inf) dmu.

    mu lives on K; the external field is phi(z) = g_E(z, infinity).  Split
    and discretized exactly like ``energy``.
    """
    if not mu.is_real_supported():
        raise NotImplementedError("discrete energies expect measures on the line")
    order = np.argsort(mu.points_np.real)
    x = mu.points_np.real[order]
    w = mu.weights_np[order]
    Ilog = _log_energy(x, w)
    xc, wc = _coarsen(mu, _SMOOTH_CAP)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = _green_E_np(xc[:, None], xc[None, :]) \
            + np.log(np.abs(xc[:, None] - xc[None, :]))
    np.fill_diagonal(h, _h_E_diag_np(xc))
    total = 2.0 * Ilog + float((wc[:, None] * wc[None, :] * h).sum())
    total += 2.0 * float((w * np.log(np.abs(_phi_np(x)))).sum())
    return total


def robin_constant_E() -> float:
    """gamma_E = log 2, the Robin constant of [-1, 1]."""
    return float(np.log(2.0))


def condenser_capacity_agm(c: float, d: float):
    """Condenser capacity C(E, [c,d]) by conformal reduction and AGM.

    Transplant to the unit disk (the interval maps to a radial-ish slit),
    symmetrize the slit by a disk automorphism, then compose Grotzsch-ring
    moduli; complete elliptic integrals are evaluated through the AGM, so
    the whole computation is one fast iteration.  The equilibrium constant
    of the theta=0 problem is w(0) = 1/C.
    """
    v1 = 1 / phi(mp.mpf(d))
    v2 = 1 / phi(mp.mpf(c))
    v1, v2 = (v1.real, v2.real) if v1.real < v2.real else (v2.real, v1.real)
    # disk automorphism (v-a)/(1-av) sending [v1,v2] to a symmetric [-s,s]
    # a solves a^2(v1+v2) - 2a(1+v1v2) + (v1+v2) = 0
    p = v1 + v2
    q = 1 + v1 * v2
    a = (q - mp.sqrt(q ** 2 - p ** 2)) / p
    s = abs((v2 - a) / (1 - a * v2))
    r = s ** 2
    # cap(unit circle, [-s,s]) = 2 * cap(unit circle, [0, s^2]) = 2*2pi/mu(s^2),
    # mu(r) = (pi/2) K(sqrt(1-r^2))/K(r);   C = cap_Dirichlet / (2 pi)^... -> 2/mu
    Kr = mp.pi / (2 * mp.agm(1, mp.sqrt(1 - r ** 2)))
    Krp = mp.pi / (2 * mp.agm(1, r))
    mu_r = (mp.pi / 2) * Krp / Kr
    return 2 / mu_r


# ---------------------------------------------------------------------------
# boundary-element machinery for arcs (and interval unions)


def _panel_mean_log(z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mean over the panel [a, b] of log 1/|z - t| (exact straight-panel integral).

    With zeta the target in panel coordinates, the antiderivative of
    log(zeta - s) integrates to zeta(log zeta - 1) - (zeta-ell)(log(zeta-ell) - 1);
    only the real part is used so branch jumps of the complex log are harmless.
    """
    e = b - a
    ell = np.abs(e)
    zeta = (z - a) / (e / ell)
    # nudge targets off the panel endpoints (z log z -> 0, but 0*inf is nan)
    zeta = np.where(np.abs(zeta) < 1e-300, 1e-300, zeta)
    zeta = np.where(np.abs(zeta - ell) < 1e-300, zeta + 1e-300 * 1j, zeta)
    t0 = zeta * (np.log(zeta) - 1)
    t1 = (zeta - ell) * (np.log(zeta - ell) - 1)
    return -(t0 - t1).real / ell


def _bem_sweep(mu: DiscreteMeasure, panels: np.ndarray):
    """Single-layer (piecewise-constant) balayage of mu onto a panel chain.

    Solves V^nu = V^mu + const on the chain with nu(chain) = mass(mu).
    Returns (midpoints, panel masses, const).
    """
    a, b = panels[:-1], panels[1:]
    mid = 0.5 * (a + b)
    n = len(mid)
    A = np.empty((n + 1, n + 1))
    A[:n, :n] = _panel_mean_log(mid[:, None], a[None, :], b[None, :])
    A[:n, n] = -1.0
    A[n, :n] = 1.0
    A[n, n] = 0.0
    rhs = np.empty(n + 1)
    rhs[:n] = log_potential_np(mu, mid)
    rhs[n] = float(mu.mass)
    sol = np.linalg.solve(A, rhs)
    return mid, sol[:n], float(sol[n])


def _bem_balayage_measure(mu: DiscreteMeasure, K: CompactSpec,
                          grid_size: int) -> DiscreteMeasure:
    panels = K.panels(grid_size)
    mid, m, c0 = _bem_sweep(mu, panels)
    m = np.maximum(m, 0.0)
    out = DiscreteMeasure(tuple(mp.mpc(p) if abs(p.imag) > 1e-14 else mp.mpf(p.real)
                                for p in mid),
                          tuple(mp.mpf(float(x)) for x in m)).normalized()
    out.meta.update({"family": "bem", "panels": panels})
    return out


class GreenPotentialBEM:
    """Green potential G_F^mu(z) of a measure mu w.r.t. an arbitrary arc F.

    G = V^mu - V^nu + c, with nu the BEM balayage of mu onto F; G vanishes
    on F and tends to c = c_F at infinity.
    """

    def __init__(self, mu: DiscreteMeasure, F: CompactSpec, panels: int = 600):
        self.mu = mu
        self.F = F
        self.panels = F.panels(panels)
        mid, m, c0 = _bem_sweep(mu, self.panels)
        self._mid, self._m, self.c_F = mid, m, c0

    def __call__(self, zs) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        vmu = log_potential_np(self.mu, zs)
        a, b = self.panels[:-1], self.panels[1:]
        vnu = _panel_mean_log(zs[:, None], a[None, :], b[None, :]) @ self._m
        return vmu - vnu + self.c_F


class _FineLayerGreen:
    """Green potential of a measure w.r.t. a polyline arc, sub-chord BEM.

    The balayage density is piecewise constant over ``panels`` coarse panels,
    but its potential is integrated over the caller's fine on-curve chords.
    The chord sagitta of a coarse panel displaces the charge layer off the
    true curve by ~kappa*l^2/8, which a finite difference at offset h reads
    as a spurious normal-derivative jump of size 2*delta*|dG/dn|/h; keeping
    the charge on the fine polyline makes that bias quadratically small.
    """

    def __init__(self, mu: DiscreteMeasure, verts: np.ndarray, panels: int):
        self.mu = mu
        self.verts = verts
        af, bf = verts[:-1], verts[1:]
        ell = np.abs(bf - af)
        cum = np.concatenate([[0.0], np.cumsum(ell)])
        total = cum[-1]
        n_p = min(panels, max(8, (len(verts) - 1) // 4))
        # panel boundaries on a cos-graded arclength partition, snapped to chords
        targets = 0.5 * (1 - np.cos(np.linspace(0, np.pi, n_p + 1))) * total
        bidx = np.unique(np.searchsorted(cum, targets))
        bidx[0], bidx[-1] = 0, len(verts) - 1
        self.chord_panel = np.searchsorted(bidx, np.arange(len(ell)), side="right") - 1
        n_p = len(bidx) - 1
        L = np.zeros(n_p)
        np.add.at(L, self.chord_panel, ell)
        # collocation at the fine vertex nearest each panel's arclength center
        centers = 0.5 * (cum[bidx[:-1]] + cum[bidx[1:]])
        cidx = np.searchsorted(cum, centers)
        colloc = verts[np.clip(cidx, 0, len(verts) - 1)]
        # mean-log of each fine chord at each collocation point, aggregated
        Mf = _panel_mean_log(colloc[:, None], af[None, :], bf[None, :]) * ell
        A = np.zeros((n_p + 1, n_p + 1))
        for k in range(n_p):
            sel = self.chord_panel == k
            A[:n_p, k] = Mf[:, sel].sum(axis=1) / L[k]
        A[:n_p, n_p] = -1.0
        A[n_p, :n_p] = 1.0
        rhs = np.empty(n_p + 1)
        rhs[:n_p] = log_potential_np(mu, colloc)
        rhs[n_p] = float(mu.mass)
        sol = np.linalg.solve(A, rhs)
        self.c_F = float(sol[n_p])
        self.sigma = sol[self.chord_panel] / L[self.chord_panel]  # per-chord density
        self._af, self._bf, self._ell = af, bf, ell

    def __call__(self, zs) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        vmu = log_potential_np(self.mu, zs)
        vnu = _panel_mean_log(zs[:, None], self._af[None, :], self._bf[None, :]) \
            @ (self.sigma * self._ell)
        return vmu - vnu + self.c_F


def s_property_residual(F: CompactSpec, lam: DiscreteMeasure, h: float = 1e-4,
                        n_samples: int = 60, panels: int = 800) -> float:
    """Max over interior arc points of |dG/dn_+ - dG/dn_-| for G = G_F^lam.

    Symmetric finite differences at offset h normal to the arc; the Green
    potential comes from the sub-chord boundary-element balayage, so the
    routine works for any polyline arc (including deliberately wrong ones).
    Evaluation points are the caller's own vertices (assumed to lie on the
    intended curve); supply several thousand vertices for arcs.
    """
    if F.kind == "interval":
        c, d = F.data
        F = CompactSpec.arc([complex(t) for t in np.linspace(c, d, 4 * panels + 1)])
    verts = np.array(F.data)
    if len(verts) < 64:
        fine = []
        for a, b in zip(verts[:-1], verts[1:]):
            fine.extend(a + np.linspace(0, 1, 64, endpoint=False) * (b - a))
        fine.append(verts[-1])
        verts = np.array(fine)
    G = _FineLayerGreen(lam, verts, panels)
    lo, hi = int(0.1 * (len(verts) - 1)), int(0.9 * (len(verts) - 1))
    sample_idx = np.unique(np.linspace(lo, hi, n_samples).astype(int))
    sample_idx = sample_idx[(sample_idx > 0) & (sample_idx < len(verts) - 1)]
    pts = verts[sample_idx]
    tang = verts[sample_idx + 1] - verts[sample_idx - 1]
    tang /= np.abs(tang)
    nrm = 1j * tang
    up = G(pts + h * nrm)
    dn = G(pts - h * nrm)
    return float(np.abs(up - dn).max() / h)


# ---------------------------------------------------------------------------
# the two-branch-point Stahl geometry (closed forms)


def _inverted_branch_segment(f: FunctionSpec):
    bs = [mp.mpc(b) for b in f.branch_points]
    if len(bs) != 2:
        raise ValueError("closed-form rate needs exactly two branch points")
    a = bs[0] if bs[0].imag > 0 else bs[1]
    if a.imag <= 0:
        raise ValueError("branch points must be a conjugate pair off the line")
    p = 1 / phi(a)
    return p, mp.conj(p)


def theoretical_rate_two_branch(f: FunctionSpec, z):
    """Predicted decay exponent 2 G_F^lam(z) for a two-branch-point function.

    In the inverted w-plane the Stahl compact of the transplanted series is
    the straight segment joining 1/phi(b) and its conjugate (the minimal
    capacity continuum for two points), so the Green potential is the
    segment Green function evaluated at 1/phi(z):

        rate(z) = 2 g_seg(1/phi(z), infinity),

    computed in closed form by an affine map onto [-1, 1].
    """
    p, pbar = _inverted_branch_segment(f)
    z = mp.mpc(z)
    if _on_interval(z):
        raise DomainError("z must lie off [-1, 1]")
    v = 1 / phi(z)
    s = (2 * v - p - pbar) / (p - pbar)
    if abs(s.imag) < mp.mpf("1e-12") and -1 - mp.mpf("1e-12") <= s.real <= 1 + mp.mpf("1e-12"):
        raise DomainError("z lies on the predicted arc F")
    return 2 * mp.log(abs(s + mp.sqrt(s - 1) * mp.sqrt(s + 1)))


def predicted_arc(f: FunctionSpec, n_points: int = 1601) -> CompactSpec:
    """The predicted stationary arc F = Zh(segment) joining the branch points.

    Vertices lie exactly on the curve (cos-graded along the segment so later
    panelizations resolve the endpoint density); that exactness is what the
    S-property finite differences need.
    """
    p, pbar = _inverted_branch_segment(f)
    if abs(p.real) < 1e-12:
        raise ValueError("segment passes through w = 0; arc runs through infinity")
    ts = 0.5 * (1 - np.cos(np.linspace(0.0, np.pi, n_points)))
    pts = [complex(psi(p + (pbar - p) * mp.mpf(float(t)))) for t in ts]
    return CompactSpec.arc(pts)


def stahl_equilibrium_measure(f: FunctionSpec, grid: int = 400) -> DiscreteMeasure:
    """Equilibrium measure lam_F on E from the transplanted closed form.

    In the two-sheeted picture the single harmonic function behind the
    construction restricts to G_F^lam(z) = g_seg(1/phi(z), inf) on the first
    sheet and to w_F - V^lam(z) = -g_seg(phi(z), inf) + const on the second,
    so the density of lam is the normal-derivative kink of the second-sheet
    expression W(z) = g_seg(phi(z), inf) across the interval:
    lam'(x) = (1/pi) dW/dy at x + i0.  W = Re log PHI(S(z)) is explicit and
    the derivative is taken analytically (PHI-compatible root branches).
    """
    p, pbar = _inverted_branch_segment(f)
    p, pbar = complex(p), complex(pbar)
    M = int(grid)
    phis = (np.arange(M) + 0.5) * np.pi / M
    xs = np.cos(phis)
    z = xs + 1e-30j                      # upper-side boundary values
    u = _phi_np(z)
    sqz = np.sqrt(z - 1) * np.sqrt(z + 1)
    s = (2 * u - p - pbar) / (p - pbar)
    sprime = (2.0 / (p - pbar)) * (u / sqz)
    sqs = np.sqrt(s - 1) * np.sqrt(s + 1)
    dens_x = np.imag(sprime / sqs) / np.pi
    if dens_x.max() <= 0:
        dens_x = -dens_x
    dens_psi = dens_x * np.sin(phis)     # w.r.t. dphi (x = cos phi)
    if dens_psi.min() < -1e-10:
        raise NonPositiveDensity("transplanted density came out negative")
    w = np.maximum(dens_psi, 0.0) * np.pi / M
    out = DiscreteMeasure(tuple(mp.mpf(float(x)) for x in xs),
                          tuple(mp.mpf(float(v2)) for v2 in w))
    mass = float(out.mass)
    if abs(mass - 1) > 1e-6:
        raise RuntimeError(f"transplanted measure mass {mass:.8f} far from 1")
    out.meta.update({"family": "cos-density-E", "phis": phis,
                     "density": dens_psi * np.pi / M * M, "mass_raw": mass})
    return out.normalized()


# ---------------------------------------------------------------------------
# vector equilibrium constants (the w = w1 + w2 decomposition)


class VectorConstants(NamedTuple):
    w1: float
    w2: float
    dev1: float               # constancy defect of (theta+1) V^lam - V^lamt on E
    dev2: float               # constancy defect of V^lamt - V^lam on K


def vector_constants(eq: EquilibriumResult, lam_tilde: DiscreteMeasure,
                     probes: int = 200) -> VectorConstants:
    """Constants of the 2x2 vector equilibrium problem built from (lam, lam~).

    w1 = (theta+1) V^lam - V^lam~ on E,  w2 = V^lam~ - V^lam on K, and the
    scalar constant satisfies w = w1 + w2.  Potentials on the measures' own
    supports are evaluated spectrally from the smooth densities.
    """
    theta = eq.theta
    lam = eq.measure
    c, d = eq.K.data
    a = eq.coeffs
    mvec = np.arange(1, len(a) + 1)

    phis = (np.arange(probes) + 0.5) * np.pi / probes
    xs = np.cos(phis)
    Vlam_E = np.log(2.0) + _cos_modes(phis, len(a)) @ (a / mvec)
    Vlt_E = log_potential_np(lam_tilde, xs)
    r1 = (theta + 1) * Vlam_E - Vlt_E
    w1, dev1 = float(r1.mean()), float(np.abs(r1 - r1.mean()).max())

    psis = (np.arange(probes) + 0.5) * np.pi / probes
    tK, Vlt_K = log_potential_on_support(lam_tilde, psis)
    lam_fine = eq.measure_at(8192)
    Vlam_K = log_potential_np(lam_fine, tK.astype(complex))
    r2 = Vlt_K - Vlam_K
    w2, dev2 = float(r2.mean()), float(np.abs(r2 - r2.mean()).max())
    return VectorConstants(w1, w2, dev1, dev2)
