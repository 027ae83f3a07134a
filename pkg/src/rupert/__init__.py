"""Lower bounds on Nieuwland constants of convex polyhedra via nonsmooth local optimization."""
from .catalog import Polyhedron, available, builtin, load_mesh, normalize
from .mu import Passage, TermTable, UnboundedPassageError, evaluate, mu_value
from .solver import Certificate, Iterate, SolverConfig, run, simple_ascent, stationarity, subproblem

__version__ = "0.1.0"
