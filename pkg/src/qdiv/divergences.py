"""Tsallis entropy, the quantum q-divergence and the Umegaki relative entropy.

The q-divergence is evaluated two independent ways:

* :func:`q_divergence` uses ``[1 - Tr(rho**q sigma**(1-q))] / (1 - q)`` and
  computes the trace directly from the two eigendecompositions;
* :func:`q_divergence_form2` builds the matrices ``rho**q``, ``ln_q rho`` and
  ``ln_q sigma`` and takes ``Tr[rho**q (ln_q rho - ln_q sigma)]``.

They agree to rounding for every pair of states, including rank-deficient
``sigma``, because ``ln_q(0)`` is taken at its finite limit ``-1/(1-q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from . import kernels
from .errors import IndexMismatch, InvalidEntropicIndex, NonPositiveArgument, SupportViolation
from .spectral import (
    DensityMatrix,
    _check_dims,
    support_contained,
    support_rank,
    validate_density,
)
from .tolerances import tol


@dataclass(frozen=True)
class EntropicIndex:
    """Entropic index ``q``, restricted to the open interval (0, 1)."""

    q: float

    def __post_init__(self):
        q = self.q
        if isinstance(q, bool) or not isinstance(q, (int, float, np.floating, np.integer)):
            raise InvalidEntropicIndex(f"q must be a real number, got {q!r}")
        if not (math.isfinite(q) and 0.0 < q < 1.0):
            raise InvalidEntropicIndex(f"q must lie in the open interval (0, 1), got {q}")
        object.__setattr__(self, "q", float(q))

    def __float__(self) -> float:
        return self.q

    @classmethod
    def coerce(cls, q: "QLike") -> "EntropicIndex":
        return q if isinstance(q, cls) else cls(q)


QLike = Union[EntropicIndex, float]


@dataclass(frozen=True)
class DivergenceValue:
    """Raw divergence value together with the index it was computed at.

    ``value`` is never clamped; use :meth:`clamped` for reporting.
    """

    value: float
    q: EntropicIndex

    def __float__(self) -> float:
        return self.value

    def clamped(self) -> float:
        if -tol().div <= self.value < 0:
            return 0.0
        return self.value


def q_log(x, q: QLike):
    """Deformed logarithm ``(x**(1-q) - 1) / (1 - q)``; accepts scalars or arrays."""
    q = EntropicIndex.coerce(q).q
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise NonPositiveArgument(f"q-logarithm needs x > 0, got {x!r}")
    out = np.expm1((1.0 - q) * np.log(xa)) / (1.0 - q)
    return float(out) if out.ndim == 0 else out


def _q_log_spectrum(w: np.ndarray, q: float) -> np.ndarray:
    # ln_q on an eigenvalue vector, with ln_q(0) at its limit -1/(1-q)
    pos = w > 0
    out = np.full(w.shape, -1.0 / (1.0 - q))
    out[pos] = np.expm1((1.0 - q) * np.log(w[pos])) / (1.0 - q)
    return out


def power_trace(rho: DensityMatrix, sigma: DensityMatrix, q: QLike) -> float:
    """``Tr(rho**q sigma**(1-q))`` (with ``0**p = 0``)."""
    q = EntropicIndex.coerce(q).q
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    return kernels.spectral_overlap_trace(
        rho.eigenvalues, rho.eigenvectors, sigma.eigenvalues, sigma.eigenvectors, q
    )


def tsallis_entropy(rho: DensityMatrix, q: QLike) -> float:
    """``S_q = (Tr rho**q - 1) / (1 - q)``, equal to ``-Tr(rho**q ln_q rho)``."""
    q = EntropicIndex.coerce(q).q
    w = validate_density(rho).eigenvalues
    w = w[w > 0]
    return float((np.sum(w**q) - 1.0) / (1.0 - q))


def q_divergence(rho: DensityMatrix, sigma: DensityMatrix, q: QLike) -> DivergenceValue:
    """Quantum q-divergence ``[1 - Tr(rho**q sigma**(1-q))] / (1 - q)``.

    Finite for every pair of states with ``q`` in (0, 1), whatever the
    supports.
    """
    qi = EntropicIndex.coerce(q)
    t = power_trace(rho, sigma, qi)
    return DivergenceValue((1.0 - t) / (1.0 - qi.q), qi)


def q_divergence_form2(rho: DensityMatrix, sigma: DensityMatrix, q: QLike) -> DivergenceValue:
    """Quantum q-divergence as ``Tr[rho**q (ln_q rho - ln_q sigma)]``, via matrix products."""
    qi = EntropicIndex.coerce(q)
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    qv = qi.q
    rho_q = rho.spectrum.apply(lambda w: np.where(w > 0, w, 0.0) ** qv)
    lnq_rho = rho.spectrum.apply(lambda w: _q_log_spectrum(w, qv))
    lnq_sigma = sigma.spectrum.apply(lambda w: _q_log_spectrum(w, qv))
    value = np.trace(rho_q @ (lnq_rho - lnq_sigma)).real
    return DivergenceValue(float(value), qi)


def umegaki_divergence(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Umegaki relative entropy ``Tr[rho (ln rho - ln sigma)]`` in nats.

    ``ln sigma`` is taken on the support of sigma only, which is enough
    because the support of rho must lie inside it; otherwise the quantity
    diverges and :class:`SupportViolation` is raised.
    """
    rho, sigma = validate_density(rho), validate_density(sigma)
    _check_dims(rho, sigma)
    if not support_contained(rho, sigma):
        raise SupportViolation("support of rho is not contained in the support of sigma")
    r = rho.eigenvalues[rho.eigenvalues > 0]
    neg_entropy = float(np.sum(r * np.log(r)))
    k = support_rank(sigma)
    s = sigma.eigenvalues[:k]
    vb = sigma.eigenvectors[:, :k]
    # <b|rho|b> for the supported eigenvectors of sigma
    weights = np.einsum("ib,ij,jb->b", vb.conj(), rho.matrix, vb).real
    return neg_entropy - float(np.sum(weights * np.log(s)))


def q_limit_check(
    rho: DensityMatrix, sigma: DensityMatrix, q_sequence: Iterable[QLike]
) -> list[float]:
    """Gaps ``|K_q - K|`` between the q-divergence and the Umegaki divergence.

    ``q_sequence`` must be strictly increasing; the gaps shrink to zero as q
    approaches 1 whenever the support condition holds.
    """
    qs = [EntropicIndex.coerce(q) for q in q_sequence]
    if any(b.q <= a.q for a, b in zip(qs, qs[1:])):
        raise InvalidEntropicIndex("q_sequence must be strictly increasing")
    k1 = umegaki_divergence(rho, sigma)
    return [abs(q_divergence(rho, sigma, q).value - k1) for q in qs]


def pseudoadditivity_compose(k1: DivergenceValue, k2: DivergenceValue) -> float:
    """Combine two divergences as ``K1 + K2 + (q - 1) K1 K2``."""
    if k1.q != k2.q:
        raise IndexMismatch(f"cannot compose divergences at q={k1.q.q} and q={k2.q.q}")
    a, b = k1.value, k2.value
    return a + b + (k1.q.q - 1.0) * a * b
