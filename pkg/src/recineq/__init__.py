"""Executable rates for the recursive inequality ``mu_{n+1} <= mu_n - alpha_n beta_n + gamma_n``.

Subpackages and modules:

* :mod:`recineq.seqcore`: sequences, moduli and finite-data checkers
* :mod:`recineq.ratecalc`: closed-form rates and certificate checkers
* :mod:`recineq.pathology`: Turing machines, Specker sequences, block padding
* :mod:`recineq.descent`: subgradient, gradient, Mann and accretive schemes
* :mod:`recineq.cli`: scenario runner
"""

__version__ = "0.1.0"
