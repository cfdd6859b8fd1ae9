import json

import pytest

from remnet.data import (
    ActorTable,
    DataError,
    EventSequence,
    load_network,
    load_networks,
    save_network,
    summarize,
)

from conftest import make_actors, random_sequence, sequence_from_pairs

import numpy as np


def write_csv_pair(tmp_path, actor_rows, event_rows, actor_header="network_id,actor_id,icr"):
    actors_path = tmp_path / "actors.csv"
    events_path = tmp_path / "events.csv"
    actors_path.write_text(actor_header + "\n" + "\n".join(actor_rows) + "\n")
    events_path.write_text(
        "network_id,order,sender,receiver\n" + "\n".join(event_rows) + "\n"
    )
    return events_path, actors_path


def test_load_minimal_network(tmp_path):
    events_path, actors_path = write_csv_pair(
        tmp_path,
        ["net,a,0", "net,b,1"],
        ["net,1,a,b"],
    )
    actors, seq = load_network(events_path, actors_path)
    assert actors.n == 2
    assert seq.m == 1
    assert seq.events == (("a", "b"),)
    assert actors.icr == (False, True)


def test_load_fixture_counts(tmp_path):
    # Newark-Maintenance-sized fixture: 27 actors, 77 events
    rng = np.random.default_rng(7)
    actors, seq = random_sequence(27, 77, rng, icr_indices=(0,), network_id="nm")
    e = tmp_path / "e.csv"
    a = tmp_path / "a.csv"
    save_network(actors, seq, e, a)
    actors2, seq2 = load_network(e, a)
    assert actors2.n == 27
    assert seq2.m == 77


def test_self_loop_rejected(tmp_path):
    events_path, actors_path = write_csv_pair(
        tmp_path, ["net,a,0", "net,b,0"], ["net,1,a,a"]
    )
    with pytest.raises(DataError, match="self-loop"):
        load_network(events_path, actors_path)


def test_unknown_actor_rejected(tmp_path):
    events_path, actors_path = write_csv_pair(
        tmp_path, ["net,a,0", "net,b,0"], ["net,1,a,zz"]
    )
    with pytest.raises(DataError, match="unknown actor"):
        load_network(events_path, actors_path)


def test_duplicate_actor_reports_line(tmp_path):
    events_path, actors_path = write_csv_pair(
        tmp_path, ["net,a,0", "net,a,1"], ["net,1,a,b"]
    )
    with pytest.raises(DataError, match=r":3: duplicate actor_id"):
        load_network(events_path, actors_path)


def test_malformed_icr_reports_line(tmp_path):
    events_path, actors_path = write_csv_pair(
        tmp_path, ["net,a,0", "net,b,7"], ["net,1,a,b"]
    )
    with pytest.raises(DataError, match=r":3: icr must be 0 or 1"):
        load_network(events_path, actors_path)


def test_order_must_increase(tmp_path):
    events_path, actors_path = write_csv_pair(
        tmp_path, ["net,a,0", "net,b,0"], ["net,2,a,b", "net,1,b,a"]
    )
    with pytest.raises(DataError, match="strictly increasing"):
        load_network(events_path, actors_path)


def test_at_least_two_actors(tmp_path):
    events_path, actors_path = write_csv_pair(tmp_path, ["net,a,0"], ["net,1,a,a"])
    with pytest.raises(DataError):
        load_network(events_path, actors_path)


def test_roundtrip_identical(tmp_path):
    rng = np.random.default_rng(3)
    actors, seq = random_sequence(6, 15, rng, icr_indices=(1, 4))
    e1, a1 = tmp_path / "e1.csv", tmp_path / "a1.csv"
    save_network(actors, seq, e1, a1)
    actors2, seq2 = load_network(e1, a1)
    assert actors2 == actors
    assert seq2 == seq
    e2, a2 = tmp_path / "e2.csv", tmp_path / "a2.csv"
    save_network(actors2, seq2, e2, a2)
    assert e1.read_text() == e2.read_text()
    assert a1.read_text() == a2.read_text()


def test_json_input(tmp_path):
    obj = {
        "network_id": "net",
        "specialist": True,
        "actors": [
            {"actor_id": "a", "icr": 1},
            {"actor_id": "b", "icr": 0},
            {"actor_id": "c", "icr": 0},
        ],
        "events": [
            {"order": 1, "sender": "a", "receiver": "b"},
            {"order": 2, "sender": "b", "receiver": "c"},
        ],
    }
    path = tmp_path / "net.json"
    path.write_text(json.dumps(obj))
    actors, seq = load_network(path)
    assert actors.specialist is True
    assert seq.events == (("a", "b"), ("b", "c"))


def test_multiple_networks(tmp_path):
    events_path, actors_path = write_csv_pair(
        tmp_path,
        ["n1,a,0", "n1,b,0", "n2,x,1", "n2,y,0"],
        ["n1,1,a,b", "n2,1,x,y"],
    )
    nets = load_networks(events_path, actors_path)
    assert set(nets) == {"n1", "n2"}
    with pytest.raises(DataError, match="exactly one"):
        load_network(events_path, actors_path)


def test_summarize_pct_icr():
    # PATH-Radio-Comm-shaped: 32 actors, 70 events, 2 ICR -> 6.25%
    rng = np.random.default_rng(11)
    actors, seq = random_sequence(32, 70, rng, icr_indices=(0, 1))
    meta = summarize(actors, seq)
    assert (meta.n_actors, meta.n_events) == (32, 70)
    assert meta.pct_icr == pytest.approx(6.25)


def test_summarize_pct_icr_newark_police_shape():
    rng = np.random.default_rng(12)
    actors, seq = random_sequence(24, 83, rng, icr_indices=(3, 17))
    meta = summarize(actors, seq)
    assert meta.pct_icr == pytest.approx(8.33, abs=0.005)


def test_summarize_zero_icr():
    rng = np.random.default_rng(13)
    actors, seq = random_sequence(5, 4, rng)
    assert summarize(actors, seq).pct_icr == 0.0


def test_summarize_pure():
    rng = np.random.default_rng(14)
    actors, seq = random_sequence(8, 9, rng, icr_indices=(2,))
    assert summarize(actors, seq) == summarize(actors, seq)


def test_summarize_mismatched_networks():
    a1 = make_actors(3, network_id="one")
    a2 = make_actors(3, network_id="two")
    seq = sequence_from_pairs(a2, [(0, 1)])
    with pytest.raises(DataError):
        summarize(a1, seq)


def test_empty_sequence_rejected():
    with pytest.raises(DataError, match="empty"):
        EventSequence("net", ())


def test_duplicate_ids_rejected():
    with pytest.raises(DataError, match="duplicate"):
        ActorTable("net", ("a", "a"), (False, False))
