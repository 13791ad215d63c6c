"""Dense Hermitian linear algebra on small density matrices.

Everything here works on plain complex ``numpy`` arrays. A
:class:`DensityMatrix` caches its (clamped, descending) spectrum at
construction so later operations never re-diagonalise the same state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotHermitian,
    NotPositive,
    SingularSupport,
    TraceNotOne,
    ValidationError,
)
from .tolerances import tol


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_hermitian(m) -> np.ndarray:
    """Validate ``m`` as a square Hermitian matrix and return it as complex128.

    The returned array is the exact Hermitian part ``(m + m^H) / 2`` so that
    downstream eigensolvers never see the rounding-level antihermitian noise.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotHermitian(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotHermitian("matrix has non-finite entries")
    residual = np.max(np.abs(a - a.conj().T))
    if residual > tol().herm:
        raise NotHermitian(f"Hermiticity residual {residual:.3e} exceeds {tol().herm:.1e}")
    return (a + a.conj().T) / 2


def hermiticity_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, f) -> np.ndarray:
        """Return ``sum_a f(lambda_a) |a><a|``; ``f`` acts on the eigenvalue array."""
        v = self.eigenvectors
        return (v * f(self.eigenvalues)) @ v.conj().T


def _canonical_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    w = w[::-1].copy()
    v = v[:, ::-1].copy()

    # phase-fix each eigenvector on its first largest-modulus component
    lead = np.argmax(np.abs(v), axis=0)
    cols = np.arange(v.shape[1])
    pivot = v[lead, cols]
    v = v * (np.abs(pivot) / pivot)

    # deterministic order inside numerically degenerate eigenvalue groups
    if len(w) > 1:
        gaps = w[:-1] - w[1:]
        group = np.concatenate([[0], np.cumsum(gaps > tol().recon)])
        order = np.lexsort((lead, group))
        w, v = w[order], v[:, order]
    return w, v


def spectral_decompose(m) -> SpectralDecomposition:
    """Diagonalise a Hermitian matrix; eigenvalues come back in descending order.

    Raises :class:`ConvergenceFailure` if LAPACK does not converge.
    """
    a = as_hermitian(m)
    w, v = _canonical_eigh(a)
    return SpectralDecomposition(_readonly(w), _readonly(v))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated quantum state. Build it with :func:`validate_density`."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> SpectralDecomposition:
        return SpectralDecomposition(self.eigenvalues, self.eigenvectors)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)

    def __repr__(self) -> str:
        ev = np.array2string(self.eigenvalues, precision=6, suppress_small=True)
        return f"DensityMatrix(dim={self.dim}, eigenvalues={ev})"


def validate_density(m) -> DensityMatrix:
    """Check that ``m`` is a normalised positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol_psd, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPositive`. Eigenvalues below
    ``tol_support * max eigenvalue`` are snapped to exactly zero, so rounding
    noise on the kernel never survives a fractional power. When either step
    changes the spectrum the stored matrix is rebuilt from it.
    """
    if isinstance(m, DensityMatrix):
        return m
    a = as_hermitian(m)
    t = tol()
    trace = np.trace(a).real
    if abs(trace - 1.0) > t.trace:
        raise TraceNotOne(f"trace {trace!r} differs from 1 by more than {t.trace:.1e}")
    w, v = _canonical_eigh(a)
    if w[-1] < -t.psd:
        raise NotPositive(f"eigenvalue {w[-1]:.3e} below -{t.psd:.1e}")
    if w[-1] < 0:
        w = np.where(w < 0, 0.0, w)
        a = (v * w) @ v.conj().T
    return DensityMatrix(_readonly(a), _readonly(_snap_kernel(w)), _readonly(v))


def _snap_kernel(w: np.ndarray) -> np.ndarray:
    # fractional powers amplify rounding noise ((1e-16)**0.1 ~ 0.025), so
    # eigenvalues under the support threshold are exact zeros from here on
    return np.where(w > _support_threshold(w), w, 0.0)


def psd_power(a, p: float) -> np.ndarray:
    """Fractional power of a positive semidefinite Hermitian matrix.

    Eigenvalues at or below the support threshold (including rounding-level
    negatives) count as zero and ``0**p = 0``. Works for unnormalised
    operators as well as states.
    """
    if isinstance(a, DensityMatrix):
        spec = a.spectrum
    else:
        w, v = _canonical_eigh(as_hermitian(a))
        spec = SpectralDecomposition(_snap_kernel(w), v)
    return spec.apply(lambda w: np.where(w > 0, np.maximum(w, 0) ** p, 0.0))


def matrix_power(m: DensityMatrix, p: float) -> np.ndarray:
    """``m**p`` for ``p`` in (0, 1], using the convention ``0**p = 0``."""
    if not 0 < p <= 1:
        raise ValidationError(f"power must lie in (0, 1], got {p}")
    m = validate_density(m)
    return psd_power(m, p)


def _support_threshold(eigenvalues: np.ndarray) -> float:
    return tol().support * max(float(eigenvalues[0]), 0.0)


def matrix_log(m: DensityMatrix) -> np.ndarray:
    """Natural logarithm of a full-rank state.

    Raises :class:`SingularSupport` if any eigenvalue is at or below the
    support threshold, since the logarithm diverges there.
    """
    m = validate_density(m)
    thr = _support_threshold(m.eigenvalues)
    if m.eigenvalues[-1] <= thr:
        raise SingularSupport(
            f"smallest eigenvalue {m.eigenvalues[-1]:.3e} is outside the support"
        )
    return m.spectrum.apply(np.log)


def support_rank(m: DensityMatrix) -> int:
    m = validate_density(m)
    return int(np.count_nonzero(m.eigenvalues > _support_threshold(m.eigenvalues)))


def support_projector(m: DensityMatrix) -> np.ndarray:
    m = validate_density(m)
    v = m.eigenvectors[:, : support_rank(m)]
    return v @ v.conj().T


def kernel_projector(m: DensityMatrix) -> np.ndarray:
    m = validate_density(m)
    v = m.eigenvectors[:, support_rank(m):]
    return v @ v.conj().T


def support_contained(rho: DensityMatrix, sigma: DensityMatrix) -> bool:
    """True iff the support of ``rho`` lies inside the support of ``sigma``.

    Measured as the total squared overlap ``Tr(K_sigma P_rho)`` between the
    kernel projector of sigma and the range projector of rho.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    k = sigma.eigenvectors[:, support_rank(sigma):]
    if k.shape[1] == 0:
        return True
    r = rho.eigenvectors[:, : support_rank(rho)]
    leak = float(np.sum(np.abs(k.conj().T @ r) ** 2))
    return leak <= tol().support


def tensor_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    a, b = validate_density(a), validate_density(b)
    return validate_density(np.kron(a.matrix, b.matrix))


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of ``[a, b]``."""
    return float(np.linalg.norm(a @ b - b @ a))


def _check_dims(*states) -> int:
    dims = {s.dim if isinstance(s, DensityMatrix) else np.shape(s)[0] for s in states}
    if len(dims) != 1:
        raise DimensionMismatch(f"operands have dimensions {sorted(dims)}")
    return dims.pop()
