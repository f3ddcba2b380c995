"""geodlab: a desk-scale laboratory for non-backtracking geodesic counting
on graphs, thermodynamic formalism on edge shifts, random walks and
harmonic measures, and the arithmetic of F_q(Y) on the Bruhat-Tits tree.
"""

__version__ = "0.1.0"

from . import bt, counting, ffield, graphs, library, shift, walks  # noqa: F401
