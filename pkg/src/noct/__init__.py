"""Observability analysis for control-affine systems with linear constraints.

Symbolic core: exact rational expressions (`noct.expr`), exact linear
algebra (`noct.linalg`), system models and constraint conversion
(`noct.system`), and Lie-derivative codistribution rank analysis
(`noct.observability`).  `noct.models` ships the built-in VIO preset and
`noct.sim` the numerical EKF cross-validation.  The `noct` command-line
tool ties these together.
"""

__version__ = "0.1.0"
