"""
Tolerancias numéricas y límites por defecto.

Las funciones que usan alguno de estos valores lo aceptan como argumento
opcional.
"""

# Núcleo matricial
HERMITICITY_TOL = 1e-12
ORTHONORMALITY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-12
JACOBI_CONVERGENCE = 1e-14
JACOBI_MAX_SWEEPS = 100

# Estados
TRACE_TOL = 1e-12
PURITY_TOL = 1e-10
MAX_PARTICLES = 512

# Decisión
ZERO_EIGENVALUE = 1e-12
POM_HERMITICITY_TOL = 1e-12
POM_PSD_TOL = 1e-10
POM_COMPLETENESS_TOL = 1e-10
PRIOR_SUM_TOL = 1e-12
OPTIMALITY_TOL = 1e-9
CLAMP_TOL = 1e-12

# Análisis secuencial
MAX_TREE_PARTICLES = 20
MAX_COMPARE_PARTICLES = 8
DEGENERATE_ANGLE = 1e-15

# Monte Carlo
BLOCK_SIZE = 8192
DEFAULT_WORKERS = 4
