"""Loading, validation, and summary of dyadic event sequences.

Input formats:
  events CSV: header ``network_id,order,sender,receiver``; order strictly
    increasing integers within a network.
  actors CSV: header ``network_id,actor_id,icr`` with icr in {0,1}; an
    optional trailing ``specialist`` column (0/1) is accepted and carried
    into NetworkMeta when present.
  JSON alternative: a single object (or list of objects) per network with
    keys ``network_id``, ``actors`` and ``events`` mirroring the CSV fields.

Timing is ordinal: the event order is the clock, no timestamps are kept.
The actor table is authoritative for the risk set; actors with no events
are still at risk.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(Exception):
    """Raised for malformed or inconsistent network input."""


@dataclass(frozen=True)
class ActorTable:
    """Fixed actor set for one network, with the ICR covariate."""

    network_id: str
    actor_ids: tuple[str, ...]
    icr: tuple[bool, ...]
    specialist: bool | None = None

    def __post_init__(self):
        if len(self.actor_ids) < 2:
            raise DataError(
                f"network {self.network_id!r}: need at least 2 actors, "
                f"got {len(self.actor_ids)}"
            )
        if len(set(self.actor_ids)) != len(self.actor_ids):
            dupes = {a for a in self.actor_ids if self.actor_ids.count(a) > 1}
            raise DataError(
                f"network {self.network_id!r}: duplicate actor_id {sorted(dupes)}"
            )
        if len(self.icr) != len(self.actor_ids):
            raise DataError("icr flags do not align with actor_ids")

    @property
    def n(self) -> int:
        return len(self.actor_ids)

    def index(self, actor_id: str) -> int:
        try:
            return self._index[actor_id]
        except AttributeError:
            object.__setattr__(
                self, "_index", {a: k for k, a in enumerate(self.actor_ids)}
            )
            return self._index[actor_id]

    def icr_array(self) -> np.ndarray:
        return np.asarray(self.icr, dtype=np.float64)


@dataclass(frozen=True)
class EventSequence:
    """Ordered dyadic events for one network (ordinal timing)."""

    network_id: str
    events: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if len(self.events) < 1:
            raise DataError(f"network {self.network_id!r}: empty event sequence")
        for t, (s, r) in enumerate(self.events):
            if s == r:
                raise DataError(
                    f"network {self.network_id!r}: self-loop event at position {t} "
                    f"({s} -> {r})"
                )

    @property
    def m(self) -> int:
        return len(self.events)

    def index_pairs(self, actors: ActorTable) -> np.ndarray:
        """Events as an (m, 2) int array of actor indices."""
        out = np.empty((self.m, 2), dtype=np.intp)
        for t, (s, r) in enumerate(self.events):
            out[t, 0] = actors.index(s)
            out[t, 1] = actors.index(r)
        return out


@dataclass(frozen=True)
class NetworkMeta:
    network_id: str
    specialist: bool | None
    n_actors: int
    n_events: int
    pct_icr: float


def _check_consistency(actors: ActorTable, seq: EventSequence) -> None:
    known = set(actors.actor_ids)
    for t, (s, r) in enumerate(seq.events):
        for a in (s, r):
            if a not in known:
                raise DataError(
                    f"network {seq.network_id!r}: event at position {t} references "
                    f"unknown actor {a!r}"
                )


def _parse_actor_rows(rows, path) -> dict[str, tuple[list, list, bool | None]]:
    nets: dict[str, tuple[list, list, bool | None]] = {}
    for lineno, row in rows:
        try:
            net = row["network_id"]
            aid = row["actor_id"]
            icr_raw = row["icr"]
        except KeyError as exc:
            raise DataError(f"{path}:{lineno}: missing column {exc}") from None
        if icr_raw not in ("0", "1", 0, 1, True, False):
            raise DataError(f"{path}:{lineno}: icr must be 0 or 1, got {icr_raw!r}")
        ids, flags, spec = nets.setdefault(net, ([], [], None))
        if aid in ids:
            raise DataError(f"{path}:{lineno}: duplicate actor_id {aid!r}")
        ids.append(aid)
        flags.append(bool(int(icr_raw)))
        if "specialist" in row and row["specialist"] not in (None, ""):
            sval = row["specialist"]
            if sval not in ("0", "1", 0, 1, True, False):
                raise DataError(
                    f"{path}:{lineno}: specialist must be 0 or 1, got {sval!r}"
                )
            nets[net] = (ids, flags, bool(int(sval)))
    return nets


def _parse_event_rows(rows, path) -> dict[str, list]:
    nets: dict[str, list] = {}
    last_order: dict[str, int] = {}
    for lineno, row in rows:
        try:
            net = row["network_id"]
            order_raw = row["order"]
            sender = row["sender"]
            receiver = row["receiver"]
        except KeyError as exc:
            raise DataError(f"{path}:{lineno}: missing column {exc}") from None
        try:
            order = int(order_raw)
        except (TypeError, ValueError):
            raise DataError(
                f"{path}:{lineno}: order must be an integer, got {order_raw!r}"
            ) from None
        if net in last_order and order <= last_order[net]:
            raise DataError(
                f"{path}:{lineno}: order not strictly increasing for network {net!r}"
            )
        last_order[net] = order
        nets.setdefault(net, []).append((sender, receiver))
    return nets


def _read_csv(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        # enumerate from 2: line 1 is the header
        yield from ((lineno, row) for lineno, row in enumerate(reader, start=2))


def _load_json_networks(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path) as fh:
        payload = json.load(fh)
    objs = payload if isinstance(payload, list) else [payload]
    result = {}
    for obj in objs:
        net = obj["network_id"]
        spec = obj.get("specialist")
        actors = ActorTable(
            network_id=net,
            actor_ids=tuple(a["actor_id"] for a in obj["actors"]),
            icr=tuple(bool(int(a["icr"])) for a in obj["actors"]),
            specialist=None if spec is None else bool(spec),
        )
        ev_rows = sorted(obj["events"], key=lambda e: int(e["order"]))
        seq = EventSequence(
            network_id=net,
            events=tuple((e["sender"], e["receiver"]) for e in ev_rows),
        )
        _check_consistency(actors, seq)
        result[net] = (actors, seq)
    return result


def load_networks(
    events_path: str | Path, actors_path: str | Path | None = None
) -> dict[str, tuple[ActorTable, EventSequence]]:
    """Load every network found in the given files, keyed by network_id."""
    events_path = Path(events_path)
    if events_path.suffix.lower() == ".json":
        return _load_json_networks(events_path)
    if actors_path is None:
        raise DataError("actors_path is required for CSV input")
    actor_nets = _parse_actor_rows(_read_csv(actors_path), actors_path)
    event_nets = _parse_event_rows(_read_csv(events_path), events_path)
    result = {}
    for net, events in event_nets.items():
        if net not in actor_nets:
            raise DataError(f"network {net!r} has events but no actor rows")
        ids, flags, spec = actor_nets[net]
        actors = ActorTable(
            network_id=net, actor_ids=tuple(ids), icr=tuple(flags), specialist=spec
        )
        seq = EventSequence(network_id=net, events=tuple(events))
        _check_consistency(actors, seq)
        result[net] = (actors, seq)
    return result


def load_network(
    events_path: str | Path, actors_path: str | Path | None = None
) -> tuple[ActorTable, EventSequence]:
    """Load exactly one network; error if the files hold several."""
    nets = load_networks(events_path, actors_path)
    if len(nets) != 1:
        raise DataError(
            f"expected exactly one network, found {sorted(nets)} in {events_path}"
        )
    return next(iter(nets.values()))


def save_network(
    actors: ActorTable,
    seq: EventSequence,
    events_path: str | Path,
    actors_path: str | Path,
) -> None:
    """Write a network back to the canonical CSV pair (round-trip safe)."""
    with open(actors_path, "w", newline="") as fh:
        cols = ["network_id", "actor_id", "icr"]
        if actors.specialist is not None:
            cols.append("specialist")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for aid, flag in zip(actors.actor_ids, actors.icr):
            row = [actors.network_id, aid, int(flag)]
            if actors.specialist is not None:
                row.append(int(actors.specialist))
            writer.writerow(row)
    with open(events_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["network_id", "order", "sender", "receiver"])
        for t, (s, r) in enumerate(seq.events, start=1):
            writer.writerow([seq.network_id, t, s, r])


def summarize(actors: ActorTable, seq: EventSequence) -> NetworkMeta:
    """Per-network summary: actor count, event count, %ICR, specialization."""
    if actors.network_id != seq.network_id:
        raise DataError(
            f"actor table is for {actors.network_id!r} but events are for "
            f"{seq.network_id!r}"
        )
    n_icr = sum(actors.icr)
    return NetworkMeta(
        network_id=actors.network_id,
        specialist=actors.specialist,
        n_actors=actors.n,
        n_events=seq.m,
        pct_icr=100.0 * n_icr / actors.n,
    )
