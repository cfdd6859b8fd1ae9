import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from remnet.stats import (
    ALL_TERMS,
    PSHIFT_TERMS,
    HistoryState,
    Term,
    design_matrix,
    dyad_from_index,
    dyad_index,
    naive_stat_vector,
    replay,
    stat_icr,
    stat_ntdegrec,
    stat_persistence,
    stat_pshift,
    stat_recency,
    stat_triadic,
    stat_vector,
    term_from_name,
    update_state,
)


@st.composite
def event_sequences(draw, max_n=10, max_m=50):
    n = draw(st.integers(min_value=2, max_value=max_n))
    m = draw(st.integers(min_value=0, max_value=max_m))
    events = []
    for _ in range(m):
        i = draw(st.integers(min_value=0, max_value=n - 1))
        off = draw(st.integers(min_value=1, max_value=n - 1))
        events.append((i, (i + off) % n))
    icr = draw(
        st.lists(st.booleans(), min_size=n, max_size=n).map(
            lambda xs: np.array(xs, dtype=np.float64)
        )
    )
    return n, events, icr


def test_term_enum_is_stable():
    assert len(ALL_TERMS) == 14
    names = [t.value for t in ALL_TERMS]
    assert names == [
        "NTDegRec",
        "FrPSndSnd",
        "RRecSnd",
        "RSndSnd",
        "OTPSnd",
        "ITPSnd",
        "OSPSnd",
        "ISPSnd",
        "PSAB-BA",
        "PSAB-BY",
        "PSAB-XA",
        "PSAB-XB",
        "PSAB-AY",
        "ICR",
    ]
    for name in names:
        assert term_from_name(name).value == name


def test_update_state_first_event():
    state = HistoryState(3)
    update_state(state, (0, 1))
    assert state.dyad_count[0, 1] == 1
    assert state.last_event == (0, 1)
    assert state.n_past_events == 1


def test_update_state_counts():
    state = replay([(0, 1), (0, 1)], 3)
    assert state.dyad_count[0, 1] == 2
    assert state.out_degree[0] == 2
    assert state.in_degree[1] == 2


def test_update_state_recency_order():
    state = replay([(0, 1), (0, 2)], 3)
    assert state.recency_out[0] == [2, 1]


def test_update_state_rejects_self_loop():
    with pytest.raises(ValueError):
        HistoryState(3).update(1, 1)


def test_update_state_rejects_unknown_actor():
    with pytest.raises(ValueError):
        HistoryState(3).update(0, 5)


def test_state_invariants_on_random_history():
    rng = np.random.default_rng(5)
    n = 6
    state = HistoryState(n)
    for _ in range(40):
        i = int(rng.integers(n))
        j = (i + 1 + int(rng.integers(n - 1))) % n
        state.update(i, j)
    assert np.array_equal(state.dyad_count.sum(axis=1), state.out_degree)
    assert np.array_equal(state.dyad_count.sum(axis=0), state.in_degree)
    assert (state.in_degree + state.out_degree).sum() == 2 * state.n_past_events
    assert (state.last_event is None) == (state.n_past_events == 0)


def test_ntdegrec_single_event():
    state = replay([(0, 1)], 3)
    assert stat_ntdegrec(state, 1) == 0.5
    assert stat_ntdegrec(state, 0) == 0.5
    assert stat_ntdegrec(state, 2) == 0.0


def test_ntdegrec_empty_history():
    state = HistoryState(4)
    assert all(stat_ntdegrec(state, j) == 0.0 for j in range(4))


def test_ntdegrec_degree_sum_identity():
    state = replay([(0, 1), (2, 1), (1, 0), (3, 2)], 4)
    total = sum(
        2 * state.n_past_events * stat_ntdegrec(state, j) for j in range(4)
    )
    assert total == pytest.approx(2 * state.n_past_events)


def test_persistence_hand_count():
    state = replay([(0, 1), (0, 1), (0, 2)], 3)
    assert stat_persistence(state, 0, 1) == pytest.approx(2 / 3)


def test_persistence_bounds():
    state = replay([(0, 1), (0, 1)], 3)
    assert stat_persistence(state, 0, 1) == 1.0
    assert stat_persistence(state, 2, 1) == 0.0  # no history


def test_recency_examples():
    state = replay([(1, 0), (2, 0)], 4)
    # most recent in-alter of 0 is 2, then 1
    assert stat_recency(state, 0, 2, "received") == 1.0
    assert stat_recency(state, 0, 1, "received") == 0.5
    assert stat_recency(state, 0, 3, "received") == 0.0
    state2 = replay([(0, 1), (0, 2)], 4)
    assert stat_recency(state2, 0, 1, "sent") == 0.5


def test_triadic_single_two_path():
    state = replay([(0, 2), (2, 1)], 3)
    assert stat_triadic(state, 0, 1, "OTP") == 1.0


def test_triadic_empty_history():
    state = HistoryState(4)
    for kind in ("OTP", "ITP", "OSP", "ISP"):
        assert stat_triadic(state, 0, 1, kind) == 0.0


def test_triadic_counts_distinct_intermediaries():
    state = replay([(0, 2), (0, 2), (2, 1)], 3)
    assert stat_triadic(state, 0, 1, "OTP") == 1.0


def test_pshift_definitional():
    state = replay([(0, 1)], 4)
    assert stat_pshift(state, 1, 0, "ABBA") == 1.0
    for kind in ("ABBY", "ABXA", "ABXB", "ABAY"):
        assert stat_pshift(state, 1, 0, kind) == 0.0
    assert stat_pshift(state, 0, 2, "ABAY") == 1.0
    assert stat_pshift(state, 1, 2, "ABBY") == 1.0
    assert stat_pshift(state, 2, 0, "ABXA") == 1.0
    assert stat_pshift(state, 2, 1, "ABXB") == 1.0


def test_pshift_empty_history():
    state = HistoryState(3)
    for kind in ("ABBA", "ABBY", "ABXA", "ABXB", "ABAY"):
        assert stat_pshift(state, 0, 1, kind) == 0.0


def test_icr_values():
    icr = np.array([1.0, 0.0, 1.0])
    assert stat_icr(icr, 0, 2) == 2.0
    assert stat_icr(icr, 1, 1) == 0.0
    assert stat_icr(icr, 0, 1) == 1.0


def test_stat_vector_single_term():
    state = replay([(0, 1)], 3)
    icr = np.zeros(3)
    vec = stat_vector(state, icr, 1, 0, (Term.PSABBA,))
    assert vec.tolist() == [1.0]


def test_stat_vector_empty_spec():
    state = replay([(0, 1)], 3)
    assert stat_vector(state, np.zeros(3), 1, 0, ()).shape == (0,)


def test_stat_vector_rejects_self_loop():
    state = HistoryState(3)
    with pytest.raises(ValueError):
        stat_vector(state, np.zeros(3), 1, 1, ALL_TERMS)


def test_dyad_index_roundtrip():
    n = 7
    seen = set()
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            idx = dyad_index(i, j, n)
            assert dyad_from_index(idx, n) == (i, j)
            seen.add(idx)
    assert seen == set(range(n * (n - 1)))


@settings(max_examples=60, deadline=None)
@given(event_sequences())
def test_incremental_matches_naive_oracle(case):
    n, events, icr = case
    state = replay(events, n)
    X = design_matrix(state, icr, ALL_TERMS)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            fast = stat_vector(state, icr, i, j, ALL_TERMS)
            naive = naive_stat_vector(events, icr, n, i, j, ALL_TERMS)
            assert np.array_equal(fast, naive), (i, j, fast, naive)
            assert np.array_equal(X[dyad_index(i, j, n)], fast)


@settings(max_examples=60, deadline=None)
@given(event_sequences(max_n=6, max_m=20))
def test_at_most_one_pshift_active(case):
    n, events, icr = case
    state = replay(events, n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            vec = stat_vector(state, icr, i, j, PSHIFT_TERMS)
            assert set(vec.tolist()) <= {0.0, 1.0}
            assert vec.sum() <= 1.0


@settings(max_examples=40, deadline=None)
@given(event_sequences(max_n=6, max_m=20), st.randoms(use_true_random=False))
def test_relabeling_equivariance(case, pyrandom):
    n, events, icr = case
    perm = list(range(n))
    pyrandom.shuffle(perm)
    p_events = [(perm[i], perm[j]) for i, j in events]
    p_icr = np.empty(n)
    for k in range(n):
        p_icr[perm[k]] = icr[k]
    state = replay(events, n)
    p_state = replay(p_events, n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            orig = stat_vector(state, icr, i, j, ALL_TERMS)
            relab = stat_vector(p_state, p_icr, perm[i], perm[j], ALL_TERMS)
            assert np.array_equal(orig, relab)


@settings(max_examples=25, deadline=None)
@given(event_sequences(max_n=6, max_m=30))
def test_value_ranges(case):
    n, events, icr = case
    state = replay(events, n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            vec = dict(zip(ALL_TERMS, stat_vector(state, icr, i, j, ALL_TERMS)))
            assert 0.0 <= vec[Term.NTDEGREC] <= 1.0
            assert 0.0 <= vec[Term.FRPSNDSND] <= 1.0
            assert 0.0 <= vec[Term.RRECSND] <= 1.0
            assert 0.0 <= vec[Term.RSNDSND] <= 1.0
            assert vec[Term.ICR] in (0.0, 1.0, 2.0)
            for term in PSHIFT_TERMS:
                assert vec[term] in (0.0, 1.0)
