"""Symplectic geometry, metaplectic propagation and uncertainty certification."""
from .capacity import (Ellipsoid, ShadowReport, cylinder_capacity, ellipsoid_capacity,
                       nonsqueezing_report, shadow_area, squeeze_matrix)
from .errors import *  # noqa: F401,F403
from .flows import (AffineSymplecticMap, Hamiltonian, PhasePoint, QuadraticHamiltonian,
                    classical_trajectory, ehrenfest_classical, quadratic_flow,
                    taylor_quadratic, variational_flow)
from .geometry import Polytope, convex_hull_2d, john_ellipsoid, john_ellipsoid_full
from .grid import GridWavefunction, l2_distance, overlap, phase_aligned_distance
from .hamiltonians import make_hamiltonian, quadratic_hamiltonian
from .linalg import (is_symplectic, matrix_exponential, random_symplectic,
                     standard_symplectic_form, symplectic_defect, symplectic_eigenvalues)
from .propagator import (GaussianWavepacket, KernelSpec, ehrenfest_means, gaussian_propagate,
                         heisenberg_translate, kernel_propagate, nearby_orbit_propagate)
from .reference import PotentialSpec, evolve_to, split_step_evolve
from .uncertainty import (CovarianceMatrix, blob_capacity, certify_cloud, covariance_from_john,
                          evolve_covariance, quantum_condition, rsup_check)

__version__ = "0.1.0"
