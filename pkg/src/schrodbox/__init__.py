"""Global-in-space Schrodinger and Hartree dynamics on a truncated cube.

The whole-space problem is reduced to a Dirichlet problem on (-R, R)^d,
discretized by cell averages and symmetric differences, and propagated by
Strang splitting with a Crank-Nicolson kinetic step.  A control layer
evaluates and differentiates quadratic cost functionals of the final state
for the linear magnetic equation.
"""

from .grid import (Grid, SingularCellError, WaveFunction, build_grid,
                   cubic_average, discrete_laplacian, sym_diff)
from .fields import (CATALOG, ControlFunction, MagneticPotential,
                     PotentialSpec, ScalarForm, SmoothedKernel,
                     assemble_potential, control_add, control_eval,
                     control_h10_inner, control_h10_sq, kernel_eval,
                     make_scalar, sample_vector_potential)
from .linalg import (CayleyStepper, DensePropagator, SolverError,
                     SparseHermitianOperator, assemble_hamiltonian,
                     cayley_step, dense_propagator_oracle)
from .hartree import ConvolutionPlan, hartree_potential, kernel_l1_error
from .splitting import (EvolveResult, Propagator, SplittingConfig,
                        diagnostics, evolve, hkn_norm, potential_phase,
                        restrict, strang_step, tail_norm, truncation_radius,
                        weighted_norm)
from .control import (ControlProblem, CostFunctionalSpec, SearchResult,
                      Trajectory, UnsupportedModeError, adjoint_solve,
                      cost_functional, directional_derivative,
                      fourier_control_search, optimality_residual,
                      sine_control)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
