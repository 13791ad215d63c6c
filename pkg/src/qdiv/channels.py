"""Projective measurements and the pinching channel they induce."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .divergences import EntropicIndex, QLike, power_trace, q_divergence
from .errors import DimensionMismatch, InvalidProjectorFamily, NotRankOneFamily
from .spectral import (
    DensityMatrix,
    _check_dims,
    _readonly,
    as_hermitian,
    commutator_norm,
    psd_power,
    validate_density,
)
from .tolerances import tol


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """Orthogonal projectors ``P_k`` with ``P_k P_l = delta_kl P_k`` and ``sum_k P_k = I``.

    ``basis`` is populated when every projector has rank one; its columns are
    the measurement vectors ``|k>`` in the same order as ``projectors``.
    """

    projectors: tuple
    basis: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def ranks(self) -> list[int]:
        return [int(round(np.trace(p).real)) for p in self.projectors]

    @property
    def is_rank_one(self) -> bool:
        return self.basis is not None

    def __len__(self) -> int:
        return len(self.projectors)

    @classmethod
    def from_projectors(cls, projectors: Sequence, basis=None) -> "ProjectorFamily":
        """Validate a list of matrices as a projector family.

        Raises :class:`InvalidProjectorFamily` naming the offending pair, or
        the residual of the resolution of the identity.
        """
        if len(projectors) == 0:
            raise InvalidProjectorFamily("empty projector family")
        try:
            ps = [as_hermitian(p) for p in projectors]
        except ValueError as exc:
            raise InvalidProjectorFamily(f"projector is not Hermitian: {exc}") from exc
        dims = {p.shape[0] for p in ps}
        if len(dims) != 1:
            raise InvalidProjectorFamily(f"projectors have mixed dimensions {sorted(dims)}")
        dim = ps[0].shape[0]
        t = tol().proj
        stack = np.stack(ps)
        # residual[j, k] = max |P_j P_k - delta_jk P_j|
        prods = np.einsum("aij,bjk->abik", stack, stack)
        idx = np.arange(len(ps))
        prods[idx, idx] -= stack
        residual = np.max(np.abs(prods), axis=(2, 3))
        bad = np.argwhere(residual > t)
        if len(bad):
            j, k = sorted(bad[0])
            what = "idempotent" if j == k else "orthogonal"
            raise InvalidProjectorFamily(
                f"projectors ({j}, {k}) are not {what}: residual {residual[j, k]:.3e}"
            )
        res = np.max(np.abs(stack.sum(axis=0) - np.eye(dim)))
        if res > t:
            raise InvalidProjectorFamily(f"projectors do not sum to identity: residual {res:.3e}")
        if basis is None and all(abs(np.trace(p).real - 1.0) < 0.5 for p in ps):
            # leading eigenvector of each rank-one projector
            basis = np.column_stack([np.linalg.eigh(p)[1][:, -1] for p in ps])
        if basis is not None:
            basis = _readonly(np.array(basis, dtype=complex))
        return cls(tuple(_readonly(p) for p in ps), basis)

    @classmethod
    def from_basis(cls, unitary, part_sizes: Optional[Sequence[int]] = None) -> "ProjectorFamily":
        """Group the columns of ``unitary`` contiguously into projectors."""
        u = np.asarray(unitary, dtype=complex)
        dim = u.shape[0]
        sizes = [1] * dim if part_sizes is None else list(part_sizes)
        edges = np.concatenate([[0], np.cumsum(sizes)])
        if edges[-1] != dim or any(s < 1 for s in sizes):
            raise InvalidProjectorFamily(f"part sizes {sizes} do not partition dimension {dim}")
        ps = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            block = u[:, lo:hi]
            ps.append(block @ block.conj().T)
        return cls.from_projectors(ps, u if all(s == 1 for s in sizes) else None)

    @classmethod
    def computational(cls, dim: int) -> "ProjectorFamily":
        return cls.from_basis(np.eye(dim))

    @classmethod
    def trivial(cls, dim: int) -> "ProjectorFamily":
        return cls.from_projectors([np.eye(dim)])


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    index: int
    probability: float
    post_state: Optional[DensityMatrix]


def _check_family(family: ProjectorFamily, state) -> None:
    if family.dim != state.dim:
        raise DimensionMismatch(
            f"projectors act on dimension {family.dim}, state has dimension {state.dim}"
        )


def measure(rho: DensityMatrix, family: ProjectorFamily) -> list[MeasurementOutcome]:
    """Outcome probabilities ``Tr(rho P_k)`` and post-measurement states.

    Outcomes with probability at or below ``tol_prob`` carry no post-state.
    """
    rho = validate_density(rho)
    _check_family(family, rho)
    out = []
    for k, p in enumerate(family.projectors):
        prob = float(np.trace(rho.matrix @ p).real)
        post = None
        if prob > tol().prob:
            block = p @ rho.matrix @ p
            post = validate_density(block / np.trace(block).real)
        out.append(MeasurementOutcome(k, prob, post))
    return out


def pinch(rho: DensityMatrix, family: ProjectorFamily) -> DensityMatrix:
    """Non-selective measurement ``sum_k P_k rho P_k``."""
    rho = validate_density(rho)
    _check_family(family, rho)
    m = sum(p @ rho.matrix @ p for p in family.projectors)
    return validate_density(m)


@dataclass(frozen=True, eq=False)
class PinchingMap:
    """The pinching channel of a projector family, usable as a callable."""

    family: ProjectorFamily

    def __call__(self, rho: DensityMatrix) -> DensityMatrix:
        return pinch(rho, self.family)


def is_expectation_for(family: ProjectorFamily, sigma: DensityMatrix) -> bool:
    """True iff every projector commutes with ``sigma`` (Frobenius norm within tol_comm)."""
    sigma = validate_density(sigma)
    _check_family(family, sigma)
    return all(commutator_norm(p, sigma.matrix) <= tol().comm for p in family.projectors)


def _rank_one_basis(family: ProjectorFamily) -> np.ndarray:
    if not family.is_rank_one:
        raise NotRankOneFamily(f"projector ranks are {family.ranks}; need all rank one")
    return family.basis


def transition_probabilities(family: ProjectorFamily, state: DensityMatrix) -> np.ndarray:
    """Doubly stochastic matrix ``|<k|a>|**2`` between the basis and the eigenvectors."""
    w = _rank_one_basis(family)
    state = validate_density(state)
    _check_family(family, state)
    return kernels.transition_matrix(w, state.eigenvectors)


def pinched_trace_classical(
    rho: DensityMatrix, sigma: DensityMatrix, family: ProjectorFamily, q: QLike
) -> float:
    """``Tr{[Pi(rho)]**q [Pi(sigma)]**(1-q)}`` from spectral data and transition probabilities.

    Never forms ``Pi(rho)``; valid for rank-one families only.
    """
    q = EntropicIndex.coerce(q).q
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    w = _rank_one_basis(family)
    _check_family(family, rho)
    return kernels.pinched_trace(
        rho.eigenvalues, rho.eigenvectors, sigma.eigenvalues, sigma.eigenvectors, w, q
    )


def pinched_trace_matrix(
    rho: DensityMatrix, sigma: DensityMatrix, family: ProjectorFamily, q: QLike
) -> float:
    """The same trace as :func:`pinched_trace_classical`, by explicit matrix powers."""
    q = EntropicIndex.coerce(q).q
    a = psd_power(pinch(rho, family), q)
    b = psd_power(pinch(sigma, family), 1.0 - q)
    return float(np.trace(a @ b).real)


def concavity_lower_bound(
    rho: DensityMatrix, sigma: DensityMatrix, family: ProjectorFamily, q: QLike
) -> float:
    """``sum_k (sum_a mu(k,a) r(a)**q)(sum_b nu(k,b) s(b)**(1-q))``.

    Never exceeds :func:`pinched_trace_classical`, by concavity of ``x**p``.
    """
    q = EntropicIndex.coerce(q).q
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    w = _rank_one_basis(family)
    _check_family(family, rho)
    return kernels.concavity_bound(
        rho.eigenvalues, rho.eigenvectors, sigma.eigenvalues, sigma.eigenvectors, w, q
    )


def monotonicity_gap(
    rho: DensityMatrix, sigma: DensityMatrix, family: ProjectorFamily, q: QLike
) -> float:
    """``K_q[rho||sigma] - K_q[Pi(rho)||Pi(sigma)]``.

    Nonnegative (up to rounding) whenever the family commutes with sigma;
    for other families the sign is not guaranteed and nothing is asserted.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    _check_family(family, rho)
    before = q_divergence(rho, sigma, q).value
    after = q_divergence(pinch(rho, family), pinch(sigma, family), q).value
    return before - after


def monotonicity_trace_gap(
    rho: DensityMatrix, sigma: DensityMatrix, family: ProjectorFamily, q: QLike
) -> float:
    """``Tr{[Pi(rho)]**q [Pi(sigma)]**(1-q)} - Tr(rho**q sigma**(1-q))``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    _check_family(family, rho)
    return power_trace(pinch(rho, family), pinch(sigma, family), q) - power_trace(rho, sigma, q)
