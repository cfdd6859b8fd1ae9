"""Posterior-predictive trajectory simulation and knock-out experiments.

A trajectory draws one coefficient vector from the Laplace posterior,
zeroes the knocked-out terms, then samples events sequentially: each step
is a categorical draw over the risk set with probabilities proportional
to exp(theta' u), computed max-shifted so any finite theta is safe.

Seeds derive deterministically from a master seed via numpy SeedSequence;
the theta draw is keyed by replicate index only, so knock-out conditions
within a replicate share coefficients before zeroing (paired contrasts).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from remnet.data import ActorTable
from remnet.inference import FitResult, ModelSpec
from remnet.stats import (
    HistoryState,
    PSHIFT_TERMS,
    Term,
    design_matrix,
    dyad_from_index,
)

_CONDITION_ZEROES = {
    "full": frozenset(),
    "pa_removed": frozenset({Term.NTDEGREC}),
    "ps_removed": frozenset(PSHIFT_TERMS),
    "icr_removed": frozenset({Term.ICR}),
    "all_removed": frozenset({Term.NTDEGREC, Term.ICR, *PSHIFT_TERMS}),
}


@dataclass(frozen=True)
class KnockoutCondition:
    name: str
    zeroed_terms: frozenset

    @classmethod
    def named(cls, name: str) -> "KnockoutCondition":
        try:
            return cls(name=name, zeroed_terms=_CONDITION_ZEROES[name])
        except KeyError:
            raise ValueError(
                f"unknown condition {name!r}; expected one of "
                f"{sorted(_CONDITION_ZEROES)}"
            ) from None


DEFAULT_CONDITIONS: tuple[KnockoutCondition, ...] = tuple(
    KnockoutCondition.named(name) for name in _CONDITION_ZEROES
)


@dataclass
class Trajectory:
    network_id: str
    condition: str
    replicate: int
    seed: int
    events: tuple[tuple[str, str], ...]

    @property
    def m(self) -> int:
        return len(self.events)

    def volumes(self, actors: ActorTable) -> np.ndarray:
        """Total communication volume (in + out events) per actor."""
        vol = np.zeros(actors.n, dtype=np.int64)
        for s, r in self.events:
            vol[actors.index(s)] += 1
            vol[actors.index(r)] += 1
        return vol


def write_trajectories_csv(trajectories, path) -> None:
    """Events CSV schema plus condition, replicate, and seed columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "network_id",
                "order",
                "sender",
                "receiver",
                "condition",
                "replicate",
                "seed",
            ]
        )
        for traj in trajectories:
            for order, (s, r) in enumerate(traj.events, start=1):
                writer.writerow(
                    [
                        traj.network_id,
                        order,
                        s,
                        r,
                        traj.condition,
                        traj.replicate,
                        traj.seed,
                    ]
                )


def sample_parameters(fit: FitResult, seed) -> np.ndarray:
    """One multivariate-Gaussian draw from the Laplace posterior.

    ``seed`` may be an int, a SeedSequence, or a Generator. Negative
    covariance eigenvalues are clipped at 0 with a warning; a zero
    covariance returns the mode exactly.
    """
    rng = np.random.default_rng(seed)
    k = fit.spec.k
    if k == 0:
        return np.zeros(0)
    cov = np.asarray(fit.covariance, dtype=np.float64)
    eigval, eigvec = np.linalg.eigh(cov)
    if np.any(eigval < 0):
        if np.any(eigval < -1e-8 * max(1.0, float(eigval.max()))):
            warnings.warn(
                "covariance not positive semi-definite; clipping negative "
                "eigenvalues at 0",
                RuntimeWarning,
            )
        eigval = np.clip(eigval, 0.0, None)
    z = rng.standard_normal(k)
    return fit.mode + eigvec @ (np.sqrt(eigval) * z)


def _zeroed(theta: np.ndarray, spec: ModelSpec, condition: KnockoutCondition):
    out = np.array(theta, dtype=np.float64)
    for idx, term in enumerate(spec.terms):
        if term in condition.zeroed_terms:
            out[idx] = 0.0
    return out


def simulate_trajectory(
    theta: np.ndarray,
    spec: ModelSpec,
    actors: ActorTable,
    m: int,
    condition: KnockoutCondition,
    seed,
    replicate: int = 0,
) -> Trajectory:
    """Sample m events from the model with the condition's terms zeroed."""
    if m < 1:
        raise ValueError("trajectory length must be >= 1")
    theta_eff = _zeroed(theta, spec, condition)
    if not np.all(np.isfinite(theta_eff)):
        raise ValueError("non-finite coefficients")
    n = actors.n
    icr = actors.icr_array()
    rng = np.random.default_rng(seed)
    state = HistoryState(n)
    events = []
    for _ in range(m):
        X = design_matrix(state, icr, spec.terms)
        scores = X @ theta_eff if spec.k else np.zeros(X.shape[0])
        scores = scores - scores.max()
        w = np.exp(scores)
        cdf = np.cumsum(w)
        idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        idx = min(idx, len(cdf) - 1)
        i, j = dyad_from_index(idx, n)
        events.append((actors.actor_ids[i], actors.actor_ids[j]))
        state.update(i, j)
    seed_int = seed if isinstance(seed, int) else -1
    return Trajectory(
        network_id=actors.network_id,
        condition=condition.name,
        replicate=replicate,
        seed=seed_int,
        events=tuple(events),
    )


def _derived_seed(master_seed: int, *key) -> int:
    ss = np.random.SeedSequence([int(master_seed), *map(int, key)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_knockout_experiment(
    fit: FitResult,
    actors: ActorTable,
    m: int,
    replicates: int = 50,
    conditions=DEFAULT_CONDITIONS,
    master_seed: int = 0,
) -> list[Trajectory]:
    """replicates x conditions trajectories with paired theta draws.

    Within a replicate index, every condition reuses the same posterior
    draw; knock-outs differ only in which coordinates are zeroed.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    trajectories = []
    for r in range(replicates):
        theta = sample_parameters(fit, _derived_seed(master_seed, 0, r))
        for ci, condition in enumerate(conditions):
            traj_seed = _derived_seed(master_seed, 1, r, ci)
            trajectories.append(
                simulate_trajectory(
                    theta,
                    fit.spec,
                    actors,
                    m,
                    condition,
                    traj_seed,
                    replicate=r,
                )
            )
    return trajectories
