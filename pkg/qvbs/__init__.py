"""
QVBS v1 - q-deformed valence-bond-solid chains

Closed-form transfer-matrix spectrum and spin-spin correlators of the
q-deformed higher-spin AKLT ground state, with a brute-force oracle that
materializes the state and checks every closed form against it.
"""

__version__ = "1.0.0"
