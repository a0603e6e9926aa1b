"""Constrained Hamiltonian analysis of field theories.

Parses a Lagrangian from a small text format, optionally expands one
compact dimension into a discrete tower of modes, and runs two independent
constraint algorithms over an exact operator-valued symbolic layer:
iterative consistency closure of the canonical formalism, and the
first-order symplectic reduction.  Both produce bracket tables, gauge
structure, and degree-of-freedom counts that the package cross-checks
against each other and against a numerical lattice realization.
"""

__version__ = "0.1.0"
