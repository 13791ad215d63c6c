"""Random states and measurements, and the randomized property suites.

Each suite runs ``trials`` independent trials for every ``(dim, q)`` cell of
its :class:`TrialConfig`. Trial ``t`` (a global index, cell-major) draws all
of its randomness from ``SeedSequence(seed, spawn_key=(t,))``, so any trial
can be replayed on its own and the outcome does not depend on how trials are
split across worker processes.

Every trial yields a *slack*; a trial is a violation iff ``slack < -tol_div``.
Inequality suites use the natural slack (right side minus left side).
Equality suites use ``-|difference|``, so ``worst_margin`` is always the
minimum slack and always has the same sign convention.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .channels import (
    ProjectorFamily,
    is_expectation_for,
    monotonicity_gap,
    monotonicity_trace_gap,
    pinched_trace_classical,
    pinched_trace_matrix,
)
from .divergences import (
    EntropicIndex,
    pseudoadditivity_compose,
    q_divergence,
    q_limit_check,
)
from .errors import BadPartition, BadRank, ValidationError
from .spectral import DensityMatrix, spectral_decompose, tensor_product, validate_density
from .tolerances import Tolerances, tol, using_tolerances

DEFAULT_Q = (0.1, 0.3, 0.5, 0.7, 0.9)
LIEB_X = (0.3, 0.5, 0.7)
LIMIT_Q = (0.9, 0.99, 0.999, 0.9999)
LIMIT_GAP = 1e-3
DEFAULT_DIMS = tuple(range(2, 9))
LOGGED_TRIALS = 10
MAX_REJECTIONS = 100


# -- samplers -----------------------------------------------------------------


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_density(dim: int, rank: Optional[int], rng: np.random.Generator) -> DensityMatrix:
    """Ginibre-induced state ``G G^H / Tr(G G^H)`` with ``G`` of shape ``dim x rank``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise BadRank(f"rank must be in [1, {dim}], got {rank}")
    g = _ginibre(rng, dim, rank)
    m = g @ g.conj().T
    return validate_density(m / np.trace(m).real)


def random_positive(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Unnormalised positive operator ``G G^H`` with square Ginibre ``G``."""
    g = _ginibre(rng, dim, dim)
    return g @ g.conj().T


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix, phases fixed."""
    z = _ginibre(rng, dim, dim)
    qm, r = np.linalg.qr(z)
    d = np.diag(r)
    return qm * (d / np.abs(d))


def random_composition(dim: int, rng: np.random.Generator) -> list[int]:
    """Uniform draw from the ``2**(dim-1)`` ordered compositions of ``dim``."""
    cuts = np.flatnonzero(rng.integers(0, 2, size=dim - 1)) + 1
    edges = np.concatenate([[0], cuts, [dim]])
    return [int(b - a) for a, b in zip(edges[:-1], edges[1:])]


def _check_partition(dim: int, part_sizes: Sequence[int]) -> None:
    if sum(part_sizes) != dim or any(int(s) < 1 for s in part_sizes):
        raise BadPartition(f"part sizes {list(part_sizes)} do not partition dimension {dim}")


def random_projector_family(
    dim: int, part_sizes: Sequence[int], rng: np.random.Generator
) -> ProjectorFamily:
    """Projectors onto consecutive column blocks of a Haar-random unitary."""
    _check_partition(dim, part_sizes)
    return ProjectorFamily.from_basis(random_unitary(dim, rng), part_sizes)


def commuting_family(sigma: DensityMatrix, part_sizes: Sequence[int]) -> ProjectorFamily:
    """Projectors onto contiguous groups of sigma's eigenvectors (descending order)."""
    sigma = validate_density(sigma)
    _check_partition(sigma.dim, part_sizes)
    return ProjectorFamily.from_basis(sigma.eigenvectors, part_sizes)


class _Sampler:
    """Wraps one trial's generator and counts rejected draws."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.rejections = 0

    def _retry(self, draw: Callable):
        for _ in range(MAX_REJECTIONS):
            try:
                return draw()
            except ValidationError:
                self.rejections += 1
        raise RuntimeError(f"sampler rejected {MAX_REJECTIONS} consecutive draws")

    def rank(self, dim: int) -> int:
        return int(self.rng.integers(1, dim + 1))

    def density(self, dim: int, rank: Optional[int] = None) -> DensityMatrix:
        return self._retry(lambda: random_density(dim, rank, self.rng))

    def positive(self, dim: int) -> np.ndarray:
        return random_positive(dim, self.rng)

    def family(self, dim: int, part_sizes: Sequence[int]) -> ProjectorFamily:
        return self._retry(lambda: random_projector_family(dim, part_sizes, self.rng))


# -- configuration and reports --------------------------------------------------


@dataclass(frozen=True)
class TrialConfig:
    suite: str
    dims: tuple = DEFAULT_DIMS
    q_values: Optional[tuple] = None
    trials: int = 1000
    seed: int = 42
    workers: int = 1

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {sorted(SUITES)}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if not self.dims or any(int(d) < 2 for d in self.dims):
            raise ValueError(f"dims must all be >= 2, got {self.dims!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.q_values is not None:
            qs = tuple(EntropicIndex.coerce(q).q for q in self.q_values)
            object.__setattr__(self, "q_values", qs)

    @property
    def grid(self) -> tuple:
        return SUITES[self.suite].default_q if self.q_values is None else self.q_values

    def cells(self) -> list[tuple]:
        if SUITES[self.suite].uses_q:
            return [(d, q) for d in self.dims for q in self.grid]
        return [(d, None) for d in self.dims]

    @property
    def total_trials(self) -> int:
        return len(self.cells()) * self.trials


@dataclass
class PropertyReport:
    suite: str
    trials_run: int
    violations: int
    worst_margin: float
    worst_trial: int
    seed: int
    elapsed: float
    asserting: bool = True
    rejections: int = 0
    logged: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0 or not self.asserting

    def to_dict(self) -> dict:
        d = asdict(self)
        d["logged"] = [list(x) for x in self.logged]
        d["passed"] = self.passed
        return d


# -- trials -------------------------------------------------------------------
# each returns (slack, details); details merge by sum, or by min for "min_" keys


def _trial_nonneg(s: _Sampler, dim: int, q: float):
    rho = s.density(dim, s.rank(dim))
    sigma = s.density(dim, s.rank(dim))
    k = q_divergence(rho, sigma, q).value
    k_self = q_divergence(rho, rho, q).value
    return min(k, -abs(k_self)), {"min_divergence": k, "min_neg_self_divergence": -abs(k_self)}


def _trial_pseudoadd(s: _Sampler, dim: int, q: float):
    r1, s1, r2, s2 = (s.density(dim, s.rank(dim)) for _ in range(4))
    k1 = q_divergence(r1, s1, q)
    k2 = q_divergence(r2, s2, q)
    joint = q_divergence(tensor_product(r1, r2), tensor_product(s1, s2), q).value
    return -abs(joint - pseudoadditivity_compose(k1, k2)), {}


def _trial_convexity(s: _Sampler, dim: int, q: float):
    n = int(s.rng.integers(2, 5))
    lam = s.rng.exponential(size=n)
    lam /= lam.sum()
    rhos = [s.density(dim, s.rank(dim)) for _ in range(n)]
    sigmas = [s.density(dim, s.rank(dim)) for _ in range(n)]
    avg = sum(l * q_divergence(r, g, q).value for l, r, g in zip(lam, rhos, sigmas))
    rho_mix = validate_density(sum(l * r.matrix for l, r in zip(lam, rhos)))
    sigma_mix = validate_density(sum(l * g.matrix for l, g in zip(lam, sigmas)))
    return avg - q_divergence(rho_mix, sigma_mix, q).value, {}


def _lieb_trace(l_spec, m_spec, x: float) -> float:
    # Tr(L**(1-x) M**x)
    return kernels.spectral_overlap_trace(
        np.maximum(l_spec.eigenvalues, 0.0), l_spec.eigenvectors,
        np.maximum(m_spec.eigenvalues, 0.0), m_spec.eigenvectors,
        1.0 - x,
    )


def lieb_midpoint_slack(l1, m1, l2, m2, x: float) -> float:
    """``Tr(Lbar**(1-x) Mbar**x) - [Tr(L1**(1-x) M1**x) + Tr(L2**(1-x) M2**x)] / 2``."""
    specs = [spectral_decompose(a) for a in (l1, m1, l2, m2, (l1 + l2) / 2, (m1 + m2) / 2)]
    mid = _lieb_trace(specs[4], specs[5], x)
    return mid - 0.5 * _lieb_trace(specs[0], specs[1], x) - 0.5 * _lieb_trace(specs[2], specs[3], x)


def _trial_lieb(s: _Sampler, dim: int, x: float):
    l1, m1, l2, m2 = (s.positive(dim) for _ in range(4))
    return lieb_midpoint_slack(l1, m1, l2, m2, x), {}


def _trial_monotonicity(s: _Sampler, dim: int, q: float):
    def draw():
        sigma = s.density(dim, s.rank(dim))
        fam = commuting_family(sigma, random_composition(dim, s.rng))
        if not is_expectation_for(fam, sigma):
            raise ValidationError("constructed family does not commute with sigma")
        return sigma, fam

    sigma, fam = s._retry(draw)
    rho = s.density(dim, s.rank(dim))
    gap = monotonicity_gap(rho, sigma, fam, q)
    trace_gap = monotonicity_trace_gap(rho, sigma, fam, q)
    return min(gap, trace_gap), {"min_divergence_gap": gap, "min_trace_gap": trace_gap}


def _trial_explore(s: _Sampler, dim: int, q: float):
    sigma = s.density(dim, s.rank(dim))
    rho = s.density(dim, s.rank(dim))
    fam = s.family(dim, random_composition(dim, s.rng))
    gap = monotonicity_gap(rho, sigma, fam, q)
    commuting = is_expectation_for(fam, sigma)
    negative = gap < -tol().div
    det = {
        "commuting_trials": int(commuting),
        "commuting_violations": int(commuting and negative),
        "noncommuting_negative_gaps": int(negative and not commuting),
        "trivial_family_trials": int(len(fam) == 1),
    }
    return gap, det


def _trial_oracle(s: _Sampler, dim: int, q: float):
    rho = s.density(dim, s.rank(dim))
    sigma = s.density(dim, s.rank(dim))
    fam = s.family(dim, [1] * dim)
    a = pinched_trace_classical(rho, sigma, fam, q)
    b = pinched_trace_matrix(rho, sigma, fam, q)
    return -abs(a - b), {}


def _trial_qlimit(s: _Sampler, dim: int, _q):
    rho = s.density(dim)
    sigma = s.density(dim)
    gaps = q_limit_check(rho, sigma, LIMIT_Q)
    decrease = min(a - b for a, b in zip(gaps, gaps[1:]))
    return min(LIMIT_GAP - gaps[-1], decrease), {"max_final_gap": gaps[-1]}


@dataclass(frozen=True)
class _Suite:
    trial: Callable
    default_q: tuple = DEFAULT_Q
    uses_q: bool = True
    asserting: bool = True


SUITES = {
    "nonneg": _Suite(_trial_nonneg),
    "pseudoadd": _Suite(_trial_pseudoadd),
    "convexity": _Suite(_trial_convexity),
    "lieb": _Suite(_trial_lieb, default_q=LIEB_X),
    "monotonicity": _Suite(_trial_monotonicity),
    "explore-noncommuting": _Suite(_trial_explore, asserting=False),
    "pinched-oracle": _Suite(_trial_oracle),
    "qlimit": _Suite(_trial_qlimit, default_q=(), uses_q=False),
}


# -- runner -------------------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def _run_one(config: TrialConfig, t: int):
    dim, q = config.cells()[t // config.trials]
    sampler = _Sampler(trial_rng(config.seed, t))
    slack, det = SUITES[config.suite].trial(sampler, dim, q)
    return float(slack), det, sampler.rejections


def replay_trial(config: TrialConfig, trial: int) -> float:
    """Recompute the slack of a single trial."""
    return _run_one(config, trial)[0]


def _merge_details(acc: dict, det: dict) -> None:
    for k, v in det.items():
        if k.startswith(("min_", "max_")):
            v = float(v) if k.startswith("min_") else -float(v)
            acc[k] = min(acc.get(k, np.inf), v)
        else:
            acc[k] = acc.get(k, 0) + v


def _run_chunk(config: TrialConfig, lo: int, hi: int, tolerances: Tolerances) -> dict:
    with using_tolerances(tolerances):
        limit = -tolerances.div
        agg = {"violations": 0, "worst": np.inf, "worst_trial": -1, "rejections": 0,
               "logged": [], "details": {}}
        for t in range(lo, hi):
            slack, det, rej = _run_one(config, t)
            if slack < limit:
                agg["violations"] += 1
            if slack < agg["worst"]:
                agg["worst"], agg["worst_trial"] = slack, t
            agg["rejections"] += rej
            if t < LOGGED_TRIALS:
                agg["logged"].append((t, slack))
            _merge_details(agg["details"], det)
    return agg


def run_suite(config: TrialConfig) -> PropertyReport:
    """Run every trial of ``config`` and aggregate the outcome."""
    start = time.perf_counter()
    total = config.total_trials
    t_now = tol()
    if config.workers == 1 or total < 2 * config.workers:
        chunks = [_run_chunk(config, 0, total, t_now)]
    else:
        edges = np.linspace(0, total, config.workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futs = [pool.submit(_run_chunk, config, int(a), int(b), t_now)
                    for a, b in zip(edges[:-1], edges[1:])]
            chunks = [f.result() for f in futs]

    worst, worst_trial = np.inf, -1
    violations = rejections = 0
    logged: list = []
    details: dict = {}
    for c in chunks:
        violations += c["violations"]
        rejections += c["rejections"]
        logged.extend(c["logged"])
        if c["worst"] < worst or (c["worst"] == worst and c["worst_trial"] < worst_trial):
            worst, worst_trial = c["worst"], c["worst_trial"]
        for k, v in c["details"].items():
            if k.startswith(("min_", "max_")):
                details[k] = min(details.get(k, np.inf), v)
            else:
                details[k] = details.get(k, 0) + v
    # max_ keys were accumulated negated so that one min() rule covers both
    details = {k: (-v if k.startswith("max_") else v) for k, v in details.items()}

    return PropertyReport(
        suite=config.suite,
        trials_run=total,
        violations=violations,
        worst_margin=float(worst),
        worst_trial=int(worst_trial),
        seed=int(config.seed),
        elapsed=time.perf_counter() - start,
        asserting=SUITES[config.suite].asserting,
        rejections=rejections,
        logged=sorted(logged),
        details=details,
    )


def suite_nonnegativity(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "nonneg"))


def suite_pseudoadditivity(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "pseudoadd"))


def suite_joint_convexity(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "convexity"))


def suite_lieb_concavity(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "lieb"))


def suite_monotonicity(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "monotonicity"))


def suite_explore_noncommuting(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "explore-noncommuting"))


def suite_pinched_oracle(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "pinched-oracle"))


suite_oracle_eq13 = suite_pinched_oracle


def suite_qlimit(config: TrialConfig) -> PropertyReport:
    return run_suite(_as(config, "qlimit"))


def _as(config: TrialConfig, suite: str) -> TrialConfig:
    if config.suite == suite:
        return config
    return TrialConfig(suite, config.dims, config.q_values, config.trials, config.seed,
                       config.workers)
