"""Numerical lab for the Witten complex of generalized Morse functions on S^1.

Spectral side: model Schroedinger operators for nondegenerate and birth-death
critical points, the deformed de Rham complex on the circle, eigenvalue
clusters and their quasi-classical scaling. Geometric side: cochain complexes
of descending cells, generalized incidence numbers, birth-death elimination.
The comparison layer ties the two together through integration chain maps.
"""

__version__ = "0.1.0"
