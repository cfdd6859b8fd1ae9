"""Event-history state and sufficient statistics for the 14 model terms.

Two evaluation paths are provided and kept in exact (bitwise) agreement:

* incremental: a ``HistoryState`` updated event by event, with scalar
  per-dyad accessors and a vectorized ``design_matrix`` over all dyads;
* naive: ``naive_stat`` recomputes any statistic directly from a raw
  event-prefix list, used as the oracle in tests.

Conventions (the source material gives only verbal definitions):
  NTDegRec normalizes by 2*n_past_events, so it is a [0,1] volume share;
  recency is inverse rank (1/r) over distinct alters, most recent first;
  triadic terms count distinct intermediaries on the binarized cumulative
  graph; p-shifts condition only on the immediately preceding event.
Self-loop dyads are excluded from the risk set everywhere.
"""

from __future__ import annotations

import enum
from typing import Iterable, Sequence

import numpy as np


class Term(enum.Enum):
    """The 14 candidate model terms, with their canonical output names."""

    NTDEGREC = "NTDegRec"
    FRPSNDSND = "FrPSndSnd"
    RRECSND = "RRecSnd"
    RSNDSND = "RSndSnd"
    OTPSND = "OTPSnd"
    ITPSND = "ITPSnd"
    OSPSND = "OSPSnd"
    ISPSND = "ISPSnd"
    PSABBA = "PSAB-BA"
    PSABBY = "PSAB-BY"
    PSABXA = "PSAB-XA"
    PSABXB = "PSAB-XB"
    PSABAY = "PSAB-AY"
    ICR = "ICR"

    def __repr__(self):
        return f"Term.{self.name}"


ALL_TERMS: tuple[Term, ...] = tuple(Term)
PSHIFT_TERMS: tuple[Term, ...] = (
    Term.PSABBA,
    Term.PSABBY,
    Term.PSABXA,
    Term.PSABXB,
    Term.PSABAY,
)

_TERM_BY_NAME = {t.value: t for t in Term}
_TERM_ORDER = {t: k for k, t in enumerate(ALL_TERMS)}


def term_from_name(name: str) -> Term:
    try:
        return _TERM_BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown term name {name!r}") from None


def canonical_terms(terms: Iterable[Term]) -> tuple[Term, ...]:
    """Terms sorted into the canonical (enum declaration) order."""
    return tuple(sorted(terms, key=_TERM_ORDER.__getitem__))


class HistoryState:
    """Cumulative event history for one network of ``n`` actors.

    Mutation is single-writer and strictly sequential per trajectory;
    read-only statistic evaluation at a fixed state is side-effect free.
    """

    __slots__ = (
        "n",
        "dyad_count",
        "out_degree",
        "in_degree",
        "recency_in",
        "recency_out",
        "last_event",
        "n_past_events",
    )

    def __init__(self, n: int):
        self.n = n
        self.dyad_count = np.zeros((n, n), dtype=np.int64)
        self.out_degree = np.zeros(n, dtype=np.int64)
        self.in_degree = np.zeros(n, dtype=np.int64)
        # recency_in[i]: distinct actors who sent to i, most recent first
        # recency_out[i]: distinct actors i sent to, most recent first
        self.recency_in: list[list[int]] = [[] for _ in range(n)]
        self.recency_out: list[list[int]] = [[] for _ in range(n)]
        self.last_event: tuple[int, int] | None = None
        self.n_past_events = 0

    def update(self, a: int, b: int) -> "HistoryState":
        """Record event a -> b. Returns self."""
        if a == b:
            raise ValueError("self-loop event")
        if not (0 <= a < self.n and 0 <= b < self.n):
            raise ValueError(f"unknown actor in event ({a}, {b})")
        self.dyad_count[a, b] += 1
        self.out_degree[a] += 1
        self.in_degree[b] += 1
        ro = self.recency_out[a]
        if b in ro:
            ro.remove(b)
        ro.insert(0, b)
        ri = self.recency_in[b]
        if a in ri:
            ri.remove(a)
        ri.insert(0, a)
        self.last_event = (a, b)
        self.n_past_events += 1
        return self


def update_state(state: HistoryState, event: tuple[int, int]) -> HistoryState:
    return state.update(*event)


def replay(events: Sequence[tuple[int, int]], n: int) -> HistoryState:
    """State after applying every event of a prefix, from scratch."""
    state = HistoryState(n)
    for a, b in events:
        state.update(a, b)
    return state


# ---------------------------------------------------------------------------
# scalar per-dyad statistics


def stat_ntdegrec(state: HistoryState, j: int) -> float:
    """Receiver j's share of total prior communication volume."""
    if state.n_past_events == 0:
        return 0.0
    return float(
        (state.in_degree[j] + state.out_degree[j]) / (2 * state.n_past_events)
    )


def stat_persistence(state: HistoryState, i: int, j: int) -> float:
    """Fraction of i's past sends that went to j."""
    if state.out_degree[i] == 0:
        return 0.0
    return float(state.dyad_count[i, j] / state.out_degree[i])


def stat_recency(state: HistoryState, i: int, j: int, direction: str) -> float:
    """Inverse recency rank of j among i's in-alters or out-alters."""
    if direction == "received":
        ranks = state.recency_in[i]
    elif direction == "sent":
        ranks = state.recency_out[i]
    else:
        raise ValueError(f"direction must be 'received' or 'sent', got {direction!r}")
    try:
        return 1.0 / (ranks.index(j) + 1)
    except ValueError:
        return 0.0


def stat_triadic(state: HistoryState, i: int, j: int, kind: str) -> float:
    """Distinct-intermediary two-path / shared-partner counts."""
    cnt = state.dyad_count
    total = 0
    for k in range(state.n):
        if k == i or k == j:
            continue
        if kind == "OTP":
            hit = cnt[i, k] > 0 and cnt[k, j] > 0
        elif kind == "ITP":
            hit = cnt[k, i] > 0 and cnt[j, k] > 0
        elif kind == "OSP":
            hit = cnt[i, k] > 0 and cnt[j, k] > 0
        elif kind == "ISP":
            hit = cnt[k, i] > 0 and cnt[k, j] > 0
        else:
            raise ValueError(f"unknown triadic kind {kind!r}")
        if hit:
            total += 1
    return float(total)


def stat_pshift(state: HistoryState, i: int, j: int, kind: str) -> float:
    """Participation-shift indicator against the immediately preceding event."""
    if state.last_event is None:
        return 0.0
    a, b = state.last_event
    if kind == "ABBA":
        hit = i == b and j == a
    elif kind == "ABBY":
        hit = i == b and j != a and j != b
    elif kind == "ABXA":
        hit = j == a and i != a and i != b
    elif kind == "ABXB":
        hit = j == b and i != a and i != b
    elif kind == "ABAY":
        hit = i == a and j != a and j != b
    else:
        raise ValueError(f"unknown p-shift kind {kind!r}")
    return 1.0 if hit else 0.0


def stat_icr(icr: np.ndarray, i: int, j: int) -> float:
    """Shared send/receive role covariate: icr(i) + icr(j) in {0, 1, 2}."""
    return float(icr[i]) + float(icr[j])


def stat_value(
    state: HistoryState, icr: np.ndarray, i: int, j: int, term: Term
) -> float:
    if term is Term.NTDEGREC:
        return stat_ntdegrec(state, j)
    if term is Term.FRPSNDSND:
        return stat_persistence(state, i, j)
    if term is Term.RRECSND:
        return stat_recency(state, i, j, "received")
    if term is Term.RSNDSND:
        return stat_recency(state, i, j, "sent")
    if term in (Term.OTPSND, Term.ITPSND, Term.OSPSND, Term.ISPSND):
        return stat_triadic(state, i, j, term.name[:3])
    if term in PSHIFT_TERMS:
        return stat_pshift(state, i, j, term.name[2:])
    if term is Term.ICR:
        return stat_icr(icr, i, j)
    raise ValueError(f"unknown term {term!r}")


def stat_vector(
    state: HistoryState,
    icr: np.ndarray,
    i: int,
    j: int,
    terms: Sequence[Term],
) -> np.ndarray:
    """Statistic values for dyad (i, j), in the order of ``terms``."""
    if i == j:
        raise ValueError("self-loop dyad")
    return np.array([stat_value(state, icr, i, j, t) for t in terms])


# ---------------------------------------------------------------------------
# vectorized evaluation over the whole risk set


def dyad_index(i: int, j: int, n: int) -> int:
    """Canonical index of dyad (i, j) in the row-major, diagonal-free order."""
    if i == j:
        raise ValueError("self-loop dyad")
    return i * (n - 1) + (j if j < i else j - 1)


def dyad_from_index(idx: int, n: int) -> tuple[int, int]:
    i, j = divmod(idx, n - 1)
    if j >= i:
        j += 1
    return i, j


def _offdiag(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return mat[mask]


def design_matrix(
    state: HistoryState, icr: np.ndarray, terms: Sequence[Term]
) -> np.ndarray:
    """Statistic matrix of shape (n*(n-1), len(terms)) in canonical dyad order.

    Bitwise-identical to evaluating ``stat_vector`` dyad by dyad.
    """
    n = state.n
    cols = []
    binarized = None
    for term in terms:
        if term is Term.NTDEGREC:
            if state.n_past_events == 0:
                mat = np.zeros((n, n))
            else:
                share = (state.in_degree + state.out_degree) / (
                    2 * state.n_past_events
                )
                mat = np.broadcast_to(share, (n, n)).copy()
        elif term is Term.FRPSNDSND:
            out = state.out_degree.astype(np.float64)[:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                mat = np.where(out > 0, state.dyad_count / out, 0.0)
        elif term in (Term.RRECSND, Term.RSNDSND):
            source = (
                state.recency_in if term is Term.RRECSND else state.recency_out
            )
            mat = np.zeros((n, n))
            for i in range(n):
                for rank, alter in enumerate(source[i], start=1):
                    mat[i, alter] = 1.0 / rank
        elif term in (Term.OTPSND, Term.ITPSND, Term.OSPSND, Term.ISPSND):
            if binarized is None:
                binarized = (state.dyad_count > 0).astype(np.float64)
            B = binarized
            if term is Term.OTPSND:
                mat = B @ B
            elif term is Term.ITPSND:
                mat = (B @ B).T
            elif term is Term.OSPSND:
                mat = B @ B.T
            else:
                mat = B.T @ B
            # intermediaries k in {i, j} never contribute: the diagonal of
            # dyad_count is structurally zero
        elif term in PSHIFT_TERMS:
            mat = np.zeros((n, n))
            if state.last_event is not None:
                a, b = state.last_event
                if term is Term.PSABBA:
                    mat[b, a] = 1.0
                elif term is Term.PSABBY:
                    mat[b, :] = 1.0
                    mat[b, a] = 0.0
                    mat[b, b] = 0.0
                elif term is Term.PSABXA:
                    mat[:, a] = 1.0
                    mat[a, a] = 0.0
                    mat[b, a] = 0.0
                elif term is Term.PSABXB:
                    mat[:, b] = 1.0
                    mat[a, b] = 0.0
                    mat[b, b] = 0.0
                else:  # PSABAY
                    mat[a, :] = 1.0
                    mat[a, a] = 0.0
                    mat[a, b] = 0.0
        elif term is Term.ICR:
            vec = np.asarray(icr, dtype=np.float64)
            mat = vec[:, None] + vec[None, :]
        else:
            raise ValueError(f"unknown term {term!r}")
        cols.append(_offdiag(np.asarray(mat, dtype=np.float64)))
    if not cols:
        return np.zeros((n * (n - 1), 0))
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# naive oracle: statistics from a raw event prefix, no HistoryState


def naive_stat(
    events: Sequence[tuple[int, int]],
    icr: np.ndarray,
    n: int,
    i: int,
    j: int,
    term: Term,
) -> float:
    """Recompute one statistic by scanning the raw prefix. Test oracle."""
    m = len(events)
    if term is Term.NTDEGREC:
        if m == 0:
            return 0.0
        vol = sum(1 for s, r in events if s == j) + sum(
            1 for s, r in events if r == j
        )
        return float(np.int64(vol) / np.int64(2 * m))
    if term is Term.FRPSNDSND:
        sent = sum(1 for s, r in events if s == i)
        if sent == 0:
            return 0.0
        to_j = sum(1 for s, r in events if s == i and r == j)
        return float(np.int64(to_j) / np.int64(sent))
    if term in (Term.RRECSND, Term.RSNDSND):
        seen: list[int] = []
        for s, r in reversed(events):
            if term is Term.RRECSND and r == i and s not in seen:
                seen.append(s)
            elif term is Term.RSNDSND and s == i and r not in seen:
                seen.append(r)
        return 1.0 / (seen.index(j) + 1) if j in seen else 0.0
    if term in (Term.OTPSND, Term.ITPSND, Term.OSPSND, Term.ISPSND):
        pairs = {(s, r) for s, r in events}

        def tie(a, b):
            return (a, b) in pairs

        total = 0
        for k in range(n):
            if k in (i, j):
                continue
            if term is Term.OTPSND:
                hit = tie(i, k) and tie(k, j)
            elif term is Term.ITPSND:
                hit = tie(k, i) and tie(j, k)
            elif term is Term.OSPSND:
                hit = tie(i, k) and tie(j, k)
            else:
                hit = tie(k, i) and tie(k, j)
            total += hit
        return float(total)
    if term in PSHIFT_TERMS:
        if m == 0:
            return 0.0
        a, b = events[-1]
        kind = term.name[2:]
        if kind == "ABBA":
            return float(i == b and j == a)
        if kind == "ABBY":
            return float(i == b and j not in (a, b))
        if kind == "ABXA":
            return float(j == a and i not in (a, b))
        if kind == "ABXB":
            return float(j == b and i not in (a, b))
        return float(i == a and j not in (a, b))
    if term is Term.ICR:
        return float(icr[i]) + float(icr[j])
    raise ValueError(f"unknown term {term!r}")


def naive_stat_vector(
    events: Sequence[tuple[int, int]],
    icr: np.ndarray,
    n: int,
    i: int,
    j: int,
    terms: Sequence[Term],
) -> np.ndarray:
    if i == j:
        raise ValueError("self-loop dyad")
    return np.array([naive_stat(events, icr, n, i, j, t) for t in terms])
