"""Symmetric positive-definite solves for the penalized normal equations."""

import logging
from typing import Optional, Sequence, Tuple

import attrs
import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, SingularSystemError

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e14
JITTER_SCALE = 1e-10
JITTER_ESCALATIONS = 3


@attrs.frozen(eq=False)
class Factor:
    """Cholesky factor of S A S, S = diag(A)^-1/2, optionally in rotated coordinates.

    When rotation is set the factored matrix is V' A V and solves map back
    through V.
    """

    cho: Tuple[np.ndarray, bool]
    scale: np.ndarray
    rotation: Optional[np.ndarray] = None


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _cholesky(a: np.ndarray):
    try:
        return scipy.linalg.cho_factor(a, lower=True)
    except np.linalg.LinAlgError:
        pass

    jitter = JITTER_SCALE * float(np.mean(np.diag(a)))
    for _ in range(JITTER_ESCALATIONS + 1):
        logger.warning(f"Cholesky failed, retrying with diagonal jitter {jitter:.3e}")
        try:
            return scipy.linalg.cho_factor(a + jitter * np.eye(a.shape[0]), lower=True)
        except np.linalg.LinAlgError:
            jitter *= 100.0
    return None


def factorize(a: np.ndarray) -> Factor:
    """Cholesky factor of a symmetric system after unit-diagonal scaling.

    Cholesky is tried first; on failure a diagonal jitter of 1e-10 x mean
    diagonal is added and grown x100 at most three times. The scaled matrix
    must also have condition number below 1e14.

    Raises:
        SingularSystemError: If a diagonal entry is not positive, every
            factorization attempt fails, or the scaled system is too ill-conditioned
    """
    a = symmetrize(np.asarray(a, dtype=np.float64))
    if not np.all(np.isfinite(a)):
        raise SingularSystemError("Penalized system matrix has non-finite entries")
    diag = np.diag(a)
    if np.any(diag <= 0.0):
        raise SingularSystemError(
            f"Penalized system matrix has {int(np.sum(diag <= 0.0))} non-positive diagonal entries",
            smallest_eigenvalue=float(np.linalg.eigvalsh(a)[0]),
        )
    scale = 1.0 / np.sqrt(diag)
    scaled = symmetrize(a * np.outer(scale, scale))

    cho = _cholesky(scaled)
    eig = np.linalg.eigvalsh(scaled)
    if cho is None or eig[0] <= eig[-1] / MAX_CONDITION:
        raise SingularSystemError(
            "Penalized system matrix is numerically singular",
            smallest_eigenvalue=float(eig[0]),
        )
    return Factor(cho=cho, scale=scale)


def _clipped_eigh(block: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(symmetrize(block))
    cutoff = values.size * np.finfo(np.float64).eps * max(float(values[-1]), 0.0)
    return np.where(values > cutoff, values, 0.0), vectors


def factorize_penalized(gram: np.ndarray, penalty_blocks: Sequence[np.ndarray]) -> Factor:
    """Factor gram + block_diag(penalty_blocks) in the eigenbasis of the penalty.

    Each block is diagonalized on its own and eigenvalues at rounding level
    are set to zero, so the penalty null space stays exactly unpenalized
    however large the smoothing parameters are.
    """
    values, vectors = zip(*(_clipped_eigh(b) for b in penalty_blocks))
    rotation = scipy.linalg.block_diag(*vectors)
    gram = symmetrize(np.asarray(gram, dtype=np.float64))
    if rotation.shape != gram.shape:
        raise DimensionMismatchError(
            f"Penalty blocks cover {rotation.shape[0]} parameters, the system has {gram.shape[0]}"
        )
    rotated = rotation.T @ gram @ rotation + np.diag(np.concatenate(values))
    return attrs.evolve(factorize(rotated), rotation=rotation)


def solve_factored(factor: Factor, rhs: np.ndarray) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=np.float64)
    if factor.rotation is not None:
        rhs = factor.rotation.T @ rhs
    scale = factor.scale if rhs.ndim == 1 else factor.scale[:, None]
    solution = scale * scipy.linalg.cho_solve(factor.cho, scale * rhs)
    if factor.rotation is not None:
        solution = factor.rotation @ solution
    return solution
