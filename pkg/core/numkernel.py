"""
Núcleo de álgebra lineal densa para matrices complejas.

Las matrices son ``numpy.ndarray`` de tipo ``complex128`` en orden por filas
(el orden por defecto de numpy). No hay ruta dispersa: todas las matrices del
problema son densas y de dimensión N+1.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from constants.tolerances import (
    HERMITICITY_TOL,
    JACOBI_CONVERGENCE,
    JACOBI_MAX_SWEEPS,
    RECONSTRUCTION_TOL,
)
from core.exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    NonHermitianError,
)

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray


def as_matrix(m) -> ComplexMatrix:
    """
    Convierte la entrada en una matriz compleja cuadrada de sólo lectura.

    Args:
        m: Cualquier objeto convertible a un arreglo 2-D cuadrado

    Returns:
        numpy.ndarray: Copia ``complex128`` no modificable

    Raises:
        DimensionMismatchError: Si la matriz no es cuadrada
        ValueError: Si contiene NaN o infinitos
    """
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatchError(f"Se esperaba una matriz cuadrada, forma {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("La matriz contiene valores no finitos")
    arr.setflags(write=False)
    return arr


def hermiticity_error(m) -> float:
    """Máximo de |m - m†| entrada a entrada."""
    arr = np.asarray(m)
    return float(np.max(np.abs(arr - arr.conj().T)))


def trace(m) -> complex:
    """Suma de la diagonal."""
    return complex(np.trace(np.asarray(m)))


def outer_product(a, b) -> ComplexMatrix:
    """
    Producto exterior con la convención ``result[m][n] = conj(a_m) * b_n``.

    Con ``a = b = u`` reproduce ``(ρ)_{mn} = u*_m u_n``.

    Args:
        a: Vector complejo
        b: Vector complejo de la misma longitud

    Returns:
        numpy.ndarray: Matriz de dimensión len(a) x len(b)
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"Longitudes distintas en el producto exterior: {a.size} != {b.size}"
        )
    out = np.outer(a.conj(), b)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    """
    Descomposición espectral de una matriz hermítica.

    ``eigenvalues`` va en orden ascendente y la columna ``k`` de
    ``eigenvectors`` corresponde a ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def orthonormality_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))

    def projector(self, mask) -> ComplexMatrix:
        """Proyector sobre los autovectores seleccionados por ``mask``."""
        v = self.eigenvectors[:, np.asarray(mask, dtype=bool)]
        return v @ v.conj().T


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Anula a[p, q] con una rotación unitaria de Jacobi (in situ)."""
    g = a[p, q]
    r = abs(g)
    phase = g / r
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * r)
    t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    # J = diag(1, e^{-iα}) · [[c, s], [-s, c]]
    ph = phase.conjugate()
    j = np.array([[c, s], [-s * ph, c * ph]], dtype=np.complex128)
    idx = [p, q]
    a[:, idx] = a[:, idx] @ j
    a[idx, :] = j.conj().T @ a[idx, :]
    v[:, idx] = v[:, idx] @ j
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def hermitian_eigen(
    m,
    tol: float = RECONSTRUCTION_TOL,
    hermiticity_tol: float = HERMITICITY_TOL,
    convergence: float = JACOBI_CONVERGENCE,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> SpectralDecomposition:
    """
    Autovalores y autovectores de una matriz hermítica por rotaciones de
    Jacobi cíclicas.

    El proceso es determinista: la misma entrada produce exactamente la misma
    salida. Se detiene cuando la norma de Frobenius fuera de la diagonal cae
    por debajo de ``convergence * ||m||``.

    Args:
        m: Matriz hermítica
        tol (float): Tolerancia relativa del residuo de reconstrucción
        hermiticity_tol (float): Máxima asimetría admitida
        convergence (float): Factor de convergencia
        max_sweeps (int): Límite de barridos

    Returns:
        SpectralDecomposition: Autovalores ascendentes y autovectores ortonormales

    Raises:
        NonHermitianError: Si max|m - m†| supera ``hermiticity_tol``
        ConvergenceError: Si no converge o el residuo final es excesivo
    """
    m = as_matrix(m)
    asymmetry = hermiticity_error(m)
    if asymmetry > hermiticity_tol:
        raise NonHermitianError(asymmetry, hermiticity_tol)

    n = m.shape[0]
    h = (m + m.conj().T) / 2.0
    a = h.copy()
    v = np.eye(n, dtype=np.complex128)
    norm = float(np.linalg.norm(a))
    threshold = convergence * norm
    skip = 1e-3 * threshold / max(n, 1)

    sweeps = 0
    off = _off_diagonal_norm(a)
    while off > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError(off, sweeps)
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > skip:
                    _rotate(a, v, p, q)
        sweeps += 1
        off = _off_diagonal_norm(a)
    logger.debug("Jacobi: dim=%d, %d barridos, off=%.3e", n, sweeps, off)

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    eigenvectors = v[:, order]
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    result = SpectralDecomposition(eigenvalues, eigenvectors)

    scale = float(np.max(np.abs(h)))
    residual = float(np.max(np.abs(result.reconstruct() - h)))
    if residual > tol * n * max(scale, 1e-300) and residual > 0.0:
        raise ConvergenceError(residual, sweeps)
    return result
