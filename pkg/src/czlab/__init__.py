"""Executable models of positive zero divisors in C*-algebras.

Submodules:

* :mod:`czlab.fd_algebra` -- finite-dimensional algebras ``M_n1 + ... + M_nk``
* :mod:`czlab.calkin` -- diagonal projections in the Calkin algebra
* :mod:`czlab.pl` -- piecewise-linear model of ``C[0, 1]``
* :mod:`czlab.zd_graph` -- zero-divisor graph search and certificates
* :mod:`czlab.suites` -- seeded experiment runners behind the ``czlab`` CLI
"""

__version__ = "0.1.0"
