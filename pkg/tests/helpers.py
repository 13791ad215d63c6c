import numpy as np

from qdiv.propcheck import random_density


def random_pair(seed, dim, rank=None):
    g = np.random.default_rng(seed)
    return random_density(dim, rank, g), random_density(dim, rank, g)


def random_hermitian(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2
