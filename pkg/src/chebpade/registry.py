"""Built-in test function family.

Each builder returns a FunctionSpec that is real on [-1, 1] with a documented
branch choice; branch cuts are arranged to avoid the interval (vertical rays
through the conjugate branch-point pairs, or rays/segments on the real axis
outside [-1, 1]).
"""

from __future__ import annotations

import mpmath as mp

from .chebseries import FunctionSpec
from .faber import phi, psi


def _phi_any(z):
    """phi with an arbitrary (upper) side on the open interval; used only by
    evaluators whose value is side-independent there."""
    z = mp.mpc(z)
    if z.imag == 0 and -1 < z.real < 1:
        return phi(z, side="+")
    return phi(z)


def _log_cut_up(w):
    """log with the branch cut along the upward vertical ray from 0."""
    return mp.log(mp.mpc(0, 1) * w) - mp.mpc(0, mp.pi / 2)


def _log_cut_down(w):
    """log with the branch cut along the downward vertical ray from 0."""
    return mp.log(mp.mpc(0, -1) * w) + mp.mpc(0, mp.pi / 2)


def sqrt_pair(a=0.5 + 0.5j) -> FunctionSpec:
    """sqrt((z-a)(z-abar)), real positive on the real axis.

    With a = x0 + i y0 the product is (z-x0)^2 + y0^2, and the principal
    square root puts the cuts exactly on the vertical rays {x0 + it, |t| >= y0}.
    """
    a = mp.mpc(a)
    if a.imag <= 0:
        a = mp.conj(a)
    x0, y0 = a.real, a.imag

    def ev(z):
        z = mp.mpc(z)
        return mp.sqrt((z - x0) ** 2 + y0 ** 2)

    return FunctionSpec(
        name=f"sqrt2(a={complex(a)})", evaluator=ev,
        branch_points=(a, mp.conj(a)),
        branch_note="principal sqrt of (z-x0)^2+y0^2; cuts on the vertical "
                    "rays from a and conj(a) to +-i*inf; positive on R",
        extra={"family": "sqrt2", "a": a})


def cbrt_triple(b=-0.4 + 0.7j, c=-2.0) -> FunctionSpec:
    """cbrt((z-b)(z-bbar)(z-c)) with real c < -1, real positive on E."""
    b = mp.mpc(b)
    if b.imag <= 0:
        b = mp.conj(b)
    c = mp.mpf(c)
    if c >= -1:
        raise ValueError("the real branch point c must sit left of -1")
    xb, yb = b.real, b.imag

    def ev(z):
        z = mp.mpc(z)
        return mp.cbrt(((z - xb) ** 2 + yb ** 2) * (z - c))

    return FunctionSpec(
        name=f"cbrt3(b={complex(b)},c={float(c)})", evaluator=ev,
        branch_points=(b, mp.conj(b), c),
        branch_note="principal cube root; the cut is the preimage of the "
                    "negative reals, which meets the real axis only on "
                    f"(-inf, {float(c)}]",
        extra={"family": "cbrt3", "b": b, "c": c})


def log_pair(b=-0.4 + 0.7j) -> FunctionSpec:
    """(1/2i) log((z-b)/(z-bbar)) = arg(z - b) on the real axis.

    Taken as (1/2i)[log_up(z-b) - log_down(z-bbar)] with vertical-ray cuts,
    so the function is holomorphic across the interval and real there.
    """
    b = mp.mpc(b)
    if b.imag <= 0:
        b = mp.conj(b)

    def ev(z):
        z = mp.mpc(z)
        return (_log_cut_up(z - b) - _log_cut_down(z - mp.conj(b))) / mp.mpc(0, 2)

    return FunctionSpec(
        name=f"logratio(b={complex(b)})", evaluator=ev,
        branch_points=(b, mp.conj(b)),
        branch_note="log branches cut on vertical rays from b (up) and "
                    "conj(b) (down); equals arg(x-b) for real x",
        extra={"family": "logratio", "b": b})


def markov(c=2.0, d=3.0) -> FunctionSpec:
    """Markov function of Lebesgue measure on [c, d]: int_c^d dt/(z - t)."""
    c, d = mp.mpf(c), mp.mpf(d)
    if not (d > c > 1 or d < -1):
        raise ValueError("support [c, d] must be disjoint from [-1, 1]")

    def ev(z):
        z = mp.mpc(z)
        return mp.log(z - c) - mp.log(z - d)

    return FunctionSpec(
        name=f"markov([{float(c)},{float(d)}])", evaluator=ev,
        branch_points=(c, d),
        branch_note="log((z-c)/(z-d)) with the cut on [c, d] itself",
        extra={"family": "markov", "markov_support": (float(c), float(d))})


def sqrt_sum(*points) -> FunctionSpec:
    """Sum of sqrt-pair terms, one per conjugate pair of branch points."""
    specs = [sqrt_pair(p) for p in points]
    bps = tuple(b for s in specs for b in s.branch_points)

    def ev(z):
        return mp.fsum([s.evaluator(z) for s in specs])

    return FunctionSpec(
        name="sqrtsum(" + ",".join(str(complex(mp.mpc(p))) for p in points) + ")",
        evaluator=ev, branch_points=bps,
        branch_note="sum of principal-branch sqrt pairs, vertical-ray cuts",
        extra={"family": "sqrtsum", "points": tuple(mp.mpc(p) for p in points)})


def fig2_function(a=0.5 + 0.5j, b=-0.4 + 0.7j, c=-2.0) -> FunctionSpec:
    """sqrt pair plus cube-root triple (the Fig. 2 family)."""
    s1 = sqrt_pair(a)
    s2 = cbrt_triple(b, c)

    def ev(z):
        return s1.evaluator(z) + s2.evaluator(z)

    return FunctionSpec(
        name=f"fig2(a={complex(mp.mpc(a))},b={complex(mp.mpc(b))},c={float(c)})",
        evaluator=ev,
        branch_points=s1.branch_points + s2.branch_points,
        branch_note="sum of the sqrt2 and cbrt3 branches",
        extra={"family": "fig2"})


def fig3_function(a=0.5 + 0.5j, b=-0.4 + 0.7j, c=0.8) -> FunctionSpec:
    """Sum of three sqrt pairs; the third has purely imaginary branch points."""
    return sqrt_sum(a, b, complex(0, float(c)))


def rational_two_poles(p1=3.0, p2=-2.0) -> FunctionSpec:
    """f(x) = 1/(p1 - x) + 1/(x - p2): rational, holomorphic on E."""
    p1, p2 = mp.mpf(p1), mp.mpf(p2)

    def ev(z):
        z = mp.mpc(z)
        return 1 / (p1 - z) + 1 / (z - p2)

    return FunctionSpec(
        name=f"rational2({float(p1)},{float(p2)})", evaluator=ev,
        poles=(p1, p2),
        branch_note="rational; no branch points",
        extra={"family": "rational2"})


def synthetic_indisk(b_in=0.9, b_out=2.0, eps=0.5) -> FunctionSpec:
    """Function whose transplanted series is a sum of two geometric terms.

    U(f)(w) = 1/(1 - w/b_out) + eps/(1 - w/b_in) with |b_in| < 1, so the
    w-plane Pade denominators hold a pole inside the unit disk by
    construction and the nonlinear approximant existence gate must decline.
    In the z-plane f(z) = g(b_out, z) + eps*g(b_in, z) with
    g(b, z) = b/(b - phi(z)) + 1/(b*phi(z) - 1), holomorphic on E with real
    poles at psi(b_out) and psi(b_in), both off the interval.
    """
    b_in, b_out, eps = mp.mpf(b_in), mp.mpf(b_out), mp.mpf(eps)
    if not 0 < b_in < 1:
        raise ValueError("b_in must sit inside the unit disk")
    if abs(b_out) <= 1:
        raise ValueError("b_out must sit outside the unit disk")

    def g(b, z):
        u = _phi_any(z)
        return b / (b - u) + 1 / (b * u - 1)

    def ev(z):
        z = mp.mpc(z)
        return g(b_out, z) + eps * g(b_in, z)

    return FunctionSpec(
        name=f"synthetic_indisk({float(b_in)},{float(b_out)},{float(eps)})",
        evaluator=ev,
        poles=(psi(b_out), psi(b_in)),
        branch_note="rational in phi(z); poles at psi(b_out), psi(b_in)",
        extra={"family": "synthetic_indisk", "b_in": b_in, "b_out": b_out,
               "eps": eps,
               "w_poles": (b_out, b_in)})


REGISTRY = {
    "sqrt2": sqrt_pair,
    "cbrt3": cbrt_triple,
    "logratio": log_pair,
    "markov": markov,
    "sqrtsum": sqrt_sum,
    "fig2": fig2_function,
    "fig3": fig3_function,
    "rational2": rational_two_poles,
    "synthetic_indisk": synthetic_indisk,
}


def get(name: str, **params) -> FunctionSpec:
    if name not in REGISTRY:
        raise KeyError(f"unknown function {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name](**params)


def list_functions() -> list:
    return sorted(REGISTRY)
