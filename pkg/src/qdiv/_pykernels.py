"""Reference (numpy-only) implementations of the spectral kernels.

Arguments are eigen-data: ``r``/``s`` are eigenvalue vectors (nonnegative),
``U``/``V`` hold the matching eigenvectors as columns, and ``W`` holds the
vectors of a rank-one measurement basis as columns. ``p`` is the power
applied to the first state; the second state gets ``1 - p``.
"""

import numpy as np


def transition_matrix(W, U):
    """``|<w_k|u_a>|**2`` indexed ``[k, a]``."""
    return np.abs(W.conj().T @ U) ** 2


def spectral_overlap_trace(r, U, s, V, p):
    """``Tr(rho**p sigma**(1-p))`` from the two spectral decompositions."""
    o = transition_matrix(U, V)
    return float((r ** p) @ o @ (s ** (1.0 - p)))


def pinched_trace(r, U, s, V, W, p):
    """``Tr(Pi(rho)**p Pi(sigma)**(1-p))`` for the rank-one pinching in basis ``W``."""
    x = transition_matrix(W, U) @ r
    y = transition_matrix(W, V) @ s
    return float(np.sum(x ** p * y ** (1.0 - p)))


def concavity_bound(r, U, s, V, W, p):
    """Lower bound obtained by pushing the powers inside the stochastic averages."""
    x = transition_matrix(W, U) @ (r ** p)
    y = transition_matrix(W, V) @ (s ** (1.0 - p))
    return float(np.sum(x * y))
