"""AICc-minimizing term-set search.

``hill_climb_select`` starts from the empty model and repeatedly applies
the single-term addition or deletion with the largest strict AICc
reduction, stopping at a local optimum. ``exhaustive_select`` enumerates
every subset (capped) and returns the global minimizer. Tie-breaking is
deterministic: deletions are preferred over additions, then the lowest
canonical term order wins.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass

import numpy as np

from remnet.data import ActorTable, EventSequence
from remnet.inference import (
    EventDesign,
    FitResult,
    InadmissibleModelError,
    ModelSpec,
    PriorSpec,
    fit_map,
)
from remnet.stats import Term, canonical_terms

log = logging.getLogger(__name__)

# AICc improvements below this are float noise, not improvements
MIN_IMPROVEMENT = 1e-9


@dataclass(frozen=True)
class SelectionStep:
    terms: tuple[Term, ...]
    aicc: float
    action: str  # "start", "add", "remove", "stop"
    term: Term | None


@dataclass
class SelectionTrace:
    steps: list[SelectionStep]
    final: FitResult

    def to_json_dict(self) -> dict:
        return {
            "steps": [
                {
                    "terms": [t.value for t in s.terms],
                    "aicc": s.aicc,
                    "action": s.action,
                    "term": None if s.term is None else s.term.value,
                }
                for s in self.steps
            ],
            "final": self.final.to_json_dict(),
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


class _FitCache:
    def __init__(self, design, prior, tol, max_iter, network_id, warm_start):
        self.design = design
        self.prior = prior
        self.tol = tol
        self.max_iter = max_iter
        self.network_id = network_id
        self.warm_start = warm_start
        self.cache: dict[frozenset, FitResult | None] = {}

    def fit(self, terms: tuple[Term, ...], base: FitResult | None = None):
        """Fit a term set; None when inadmissible or non-convergent."""
        key = frozenset(terms)
        if key in self.cache:
            return self.cache[key]
        spec = ModelSpec(terms=terms, network_id=self.network_id)
        theta0 = None
        if self.warm_start and base is not None:
            base_coef = dict(zip(base.spec.terms, base.mode))
            theta0 = np.array([base_coef.get(t, 0.0) for t in terms])
        try:
            result = fit_map(
                spec,
                prior=self.prior,
                tol=self.tol,
                max_iter=self.max_iter,
                design=self.design,
                theta0=theta0,
            )
        except InadmissibleModelError:
            log.warning(
                "skipping inadmissible model %s (k=%d, m=%d)",
                [t.value for t in terms],
                len(terms),
                self.design.m,
            )
            self.cache[key] = None
            return None
        if np.isnan(result.aicc):
            log.warning(
                "skipping model %s: AICc inadmissible (k=%d, m=%d)",
                [t.value for t in terms],
                len(terms),
                self.design.m,
            )
            self.cache[key] = None
            return None
        if not result.converged:
            log.warning(
                "fit did not converge for %s; candidate skipped",
                [t.value for t in terms],
            )
            self.cache[key] = None
            return None
        self.cache[key] = result
        return result


def hill_climb_select(
    candidate_terms,
    seq: EventSequence | None = None,
    actors: ActorTable | None = None,
    prior: PriorSpec = PriorSpec(),
    tol: float = 1e-6,
    max_iter: int = 500,
    design: EventDesign | None = None,
    warm_start: bool = False,
) -> SelectionTrace:
    """Steepest-descent AICc search over single-term changes."""
    candidates = canonical_terms(candidate_terms)
    if not candidates:
        raise ValueError("candidate term set is empty")
    if design is None:
        design = EventDesign(actors, seq)
    network_id = design.seq.network_id
    fitter = _FitCache(design, prior, tol, max_iter, network_id, warm_start)

    current = fitter.fit(())
    steps = [SelectionStep((), current.aicc, "start", None)]
    while True:
        in_model = set(current.spec.terms)
        # deletions first, then additions, each in canonical term order
        moves = [("remove", t) for t in current.spec.terms] + [
            ("add", t) for t in candidates if t not in in_model
        ]
        best = None
        for action, term in moves:
            if action == "remove":
                terms = tuple(t for t in current.spec.terms if t is not term)
            else:
                terms = canonical_terms(in_model | {term})
            result = fitter.fit(terms, base=current)
            if result is None:
                continue
            reduction = current.aicc - result.aicc
            if reduction <= MIN_IMPROVEMENT:
                continue
            # strict > keeps the earliest (deletion-preferring) move on ties
            if best is None or reduction > best[0]:
                best = (reduction, action, term, result)
        if best is None:
            steps.append(
                SelectionStep(current.spec.terms, current.aicc, "stop", None)
            )
            return SelectionTrace(steps=steps, final=current)
        _, action, term, current = best
        steps.append(
            SelectionStep(current.spec.terms, current.aicc, action, term)
        )


def exhaustive_select(
    candidate_terms,
    seq: EventSequence | None = None,
    actors: ActorTable | None = None,
    prior: PriorSpec = PriorSpec(),
    tol: float = 1e-6,
    max_iter: int = 500,
    design: EventDesign | None = None,
    cap: int = 14,
) -> SelectionTrace:
    """Fit every subset of the candidates; return the global AICc minimizer."""
    candidates = canonical_terms(candidate_terms)
    if not candidates:
        raise ValueError("candidate term set is empty")
    if len(candidates) > cap:
        raise ValueError(
            f"{len(candidates)} candidates exceed the exhaustive cap of {cap}"
        )
    if len(candidates) > 12:
        log.warning(
            "exhaustive search over %d terms requires %d fits",
            len(candidates),
            2 ** len(candidates),
        )
    if design is None:
        design = EventDesign(actors, seq)
    network_id = design.seq.network_id
    fitter = _FitCache(design, prior, tol, max_iter, network_id, False)

    best = None
    for size in range(len(candidates) + 1):
        for combo in itertools.combinations(candidates, size):
            result = fitter.fit(combo)
            if result is None:
                continue
            # strict < keeps the smaller, canonically-earliest subset on ties
            if best is None or result.aicc < best.aicc - MIN_IMPROVEMENT:
                best = result
    if best is None:
        raise RuntimeError("no admissible model could be fit")
    steps = [
        SelectionStep(best.spec.terms, best.aicc, "stop", None),
    ]
    return SelectionTrace(steps=steps, final=best)
