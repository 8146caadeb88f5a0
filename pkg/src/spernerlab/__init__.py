"""spernerlab: extremal set theory in the Boolean lattice.

Subpackages cover the lattice substrate (`lattice`), exact chain densities
(`density`), the balanced chain-hypergraph builder (`supersat`), the
container/fingerprint pipeline (`containers`), exact extremal solvers
(`solvers`), and seeded random experiments (`randomlab`).  `cli` exposes
everything as one command-line tool.
"""

__version__ = "0.1.0"

from .errors import ContractError, DomainError, SolverTimeout, SpernerlabError
from .lattice import Chain, SubsetFamily

__all__ = [
    "Chain",
    "ContractError",
    "DomainError",
    "SolverTimeout",
    "SpernerlabError",
    "SubsetFamily",
    "__version__",
]
