"""Nonlinear Chebyshev-Pade approximation on [-1, 1] via the Faber operator.

Extended-precision construction of diagonal rational approximants matching
the first 2n+1 Chebyshev coefficients of a function holomorphic on [-1, 1],
together with the potential-theory machinery (mixed Green-logarithmic
equilibrium measures, balayage, interval Green functions) needed to verify
their geometric convergence rates and the limit distributions of poles,
zeros and interpolation points.
"""

from .numerics import (DEFAULT_PRECISION, NonConvergence, Poly,
                       RationalFunction, RankDeficient, poly_roots,
                       set_precision, solve_linear, working_precision)
from .chebseries import (ChebSeries, FunctionSpec, InsufficientDecay,
                         QuadratureNonConvergence, cheb_coeffs, partial_sum,
                         partial_sum_zeros, rho0_estimate)
from .faber import (Ellipse, PoleOnUnitCircle, PowerSeries, RadiusTooSmall,
                    faber_forward, faber_inverse, map_rational, phi, psi)
from .pade import (ChebPadeApproximant, NotRepresentable, PadeApproximant,
                   build_chebpade, exists_nonlinear_apc, orthogonality_residuals,
                   pade_nn, sweep)
from .potential import (CompactSpec, DiscreteMeasure, balayage, energy,
                        energy_phi, green_E, green_E_inf,
                        green_interval_complement, s_property_residual,
                        solve_equilibrium, theoretical_rate_two_branch)
from .diagnostics import (capacity_convergence_probe, ellipse_clustering,
                          interpolation_measure, pole_measure, rate_at,
                          wasserstein_projected)
from . import registry

__version__ = "0.1.0"
