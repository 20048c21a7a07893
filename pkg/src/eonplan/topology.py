"""Network graph, candidate paths, and distance-adaptive slot arithmetic."""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass

from .errors import DataError

__all__ = [
    "ModulationFormat",
    "DEFAULT_REACH_TABLE",
    "Link",
    "Topology",
    "CandidatePath",
    "UnreachableError",
    "assign_modulation",
    "fs_required",
    "yen_k_shortest",
    "load_topology",
]


class UnreachableError(ValueError):
    """No modulation format reaches the requested path length."""


@dataclass(frozen=True)
class ModulationFormat:
    name: str
    bits_per_symbol: int
    max_reach_km: float


# Ordered by spectral efficiency, most efficient first.  Reach shrinks as
# bits per symbol grow; assign_modulation relies on that monotonicity.
DEFAULT_REACH_TABLE: tuple[ModulationFormat, ...] = (
    ModulationFormat("16QAM", 4, 500.0),
    ModulationFormat("8QAM", 3, 1000.0),
    ModulationFormat("QPSK", 2, 2000.0),
    ModulationFormat("BPSK", 1, 4000.0),
)


def validate_reach_table(table: tuple[ModulationFormat, ...]) -> None:
    """Raise ValueError unless the table is usable by assign_modulation."""
    if not table:
        raise ValueError("reach table is empty")
    for mf in table:
        if mf.bits_per_symbol < 1:
            raise ValueError(f"{mf.name}: bits_per_symbol must be >= 1")
        if mf.max_reach_km <= 0:
            raise ValueError(f"{mf.name}: max_reach_km must be positive")
    ordered = sorted(table, key=lambda m: -m.bits_per_symbol)
    for hi, lo in zip(ordered, ordered[1:]):
        if hi.bits_per_symbol == lo.bits_per_symbol:
            raise ValueError(
                f"duplicate bits_per_symbol {hi.bits_per_symbol} "
                f"({hi.name}, {lo.name})"
            )
        if hi.max_reach_km >= lo.max_reach_km:
            raise ValueError(
                f"reach must strictly decrease as bits increase: "
                f"{hi.name} vs {lo.name}"
            )


@dataclass(frozen=True)
class Link:
    index: int
    node_a: int
    node_b: int
    length_km: float


class Topology:
    """Undirected weighted graph with string node ids mapped to dense indices.

    Links are bidirectional; both connections and candidate paths refer to
    links by their dense index.
    """

    def __init__(self, edges: list[tuple[str, str, float]]):
        if not edges:
            raise DataError("topology has no links")
        self.node_ids: list[str] = []
        self.node_index: dict[str, int] = {}
        seen_pairs: set[tuple[str, str]] = set()
        self.links: list[Link] = []
        for a, b, length in edges:
            if a == b:
                raise DataError(f"self-loop on node {a!r}")
            if not (length > 0) or not math.isfinite(length):
                raise DataError(f"link {a!r}-{b!r}: length must be positive")
            pair = (a, b) if a <= b else (b, a)
            if pair in seen_pairs:
                raise DataError(f"duplicate link {a!r}-{b!r}")
            seen_pairs.add(pair)
            for nid in (a, b):
                if nid not in self.node_index:
                    self.node_index[nid] = len(self.node_ids)
                    self.node_ids.append(nid)
            self.links.append(
                Link(len(self.links), self.node_index[a], self.node_index[b], length)
            )
        # adjacency[v] = [(neighbor, link_index, length), ...]
        self.adjacency: list[list[tuple[int, int, float]]] = [
            [] for _ in self.node_ids
        ]
        for lk in self.links:
            self.adjacency[lk.node_a].append((lk.node_b, lk.index, lk.length_km))
            self.adjacency[lk.node_b].append((lk.node_a, lk.index, lk.length_km))
        # Tie-breaking between equal-length paths compares node-id sequences;
        # precomputed lexicographic ranks make that cheap on dense indices.
        self._lex_rank = [0] * len(self.node_ids)
        for rank, nid in enumerate(sorted(self.node_ids)):
            self._lex_rank[self.node_index[nid]] = rank
        self._check_connected()

    def _check_connected(self) -> None:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w, _, _ in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.node_ids):
            missing = [nid for nid, i in self.node_index.items() if i not in seen]
            raise DataError(f"topology is disconnected; unreachable: {missing}")

    @property
    def num_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def lex_key(self, nodes: tuple[int, ...]) -> tuple[int, ...]:
        """Node sequence mapped to id-lexicographic ranks, for tie-breaking."""
        return tuple(self._lex_rank[v] for v in nodes)


@dataclass(frozen=True)
class CandidatePath:
    """A loop-free route with its fixed modulation format.

    ``links`` are dense link indices in hop order, ``nodes`` the node indices
    they connect (one more entry than links).  ``path_index`` is the path's
    position within its connection's candidate list.
    """

    path_index: int
    nodes: tuple[int, ...]
    links: tuple[int, ...]
    total_length_km: float
    modulation: ModulationFormat


def assign_modulation(
    length_km: float, reach_table: tuple[ModulationFormat, ...] = DEFAULT_REACH_TABLE
) -> ModulationFormat:
    """Most spectrally efficient format whose reach covers ``length_km``.

    Raises UnreachableError when even the longest-reach format falls short.
    """
    best = None
    for mf in reach_table:
        if mf.max_reach_km >= length_km:
            if best is None or mf.bits_per_symbol > best.bits_per_symbol:
                best = mf
    if best is None:
        raise UnreachableError(
            f"path length {length_km} km exceeds all modulation reaches"
        )
    return best


def fs_required(bitrate_gbps: float, baud_gbaud: float, mf: ModulationFormat) -> int:
    """Frequency slots needed to carry ``bitrate_gbps`` at the given symbol rate.

    One slot carries ``baud_gbaud * bits_per_symbol`` Gbps; demand is rounded
    up to whole slots.  A zero bitrate needs zero slots.
    """
    if bitrate_gbps < 0:
        raise ValueError(f"negative bitrate: {bitrate_gbps}")
    if baud_gbaud <= 0:
        raise ValueError(f"baud rate must be positive: {baud_gbaud}")
    return math.ceil(bitrate_gbps / (baud_gbaud * mf.bits_per_symbol))


def _lex_dijkstra(
    topo: Topology,
    source: int,
    dest: int,
    banned_nodes: frozenset[int],
    banned_links: frozenset[int],
) -> tuple[float, tuple[int, ...], tuple[int, ...]] | None:
    """Shortest path avoiding the banned sets; ties broken by node-id sequence.

    Heap entries carry the full rank sequence so that among equal-cost paths
    to a node the id-lexicographically smallest is settled first.  With
    strictly positive weights the prefix of an optimal lex-smallest path is
    itself lex-smallest, so the settle-once rule is safe.
    """
    if source in banned_nodes or dest in banned_nodes:
        return None
    heap: list[tuple[float, tuple[int, ...], tuple[int, ...], tuple[int, ...]]] = [
        (0.0, (topo._lex_rank[source],), (source,), ())
    ]
    done: set[int] = set()
    while heap:
        dist, _ranks, nodes, links = heapq.heappop(heap)
        v = nodes[-1]
        if v in done:
            continue
        done.add(v)
        if v == dest:
            return dist, nodes, links
        for w, link_idx, length in topo.adjacency[v]:
            if w in done or w in banned_nodes or link_idx in banned_links:
                continue
            heapq.heappush(
                heap,
                (
                    dist + length,
                    _ranks + (topo._lex_rank[w],),
                    nodes + (w,),
                    links + (link_idx,),
                ),
            )
    return None


def yen_k_shortest(
    topo: Topology,
    source_id: str,
    dest_id: str,
    k: int,
    reach_table: tuple[ModulationFormat, ...] = DEFAULT_REACH_TABLE,
) -> list[CandidatePath]:
    """Up to ``k`` loop-free shortest paths, each with its modulation assigned.

    Paths are ordered by total length, equal lengths by node-id sequence.
    Paths too long for every modulation format are dropped, so fewer than
    ``k`` candidates may come back even in a well-connected graph.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1: {k}")
    if source_id == dest_id:
        raise ValueError(f"source and destination coincide: {source_id!r}")
    for nid in (source_id, dest_id):
        if nid not in topo.node_index:
            raise DataError(f"unknown node {nid!r}")
    source = topo.node_index[source_id]
    dest = topo.node_index[dest_id]

    first = _lex_dijkstra(topo, source, dest, frozenset(), frozenset())
    if first is None:
        return []
    # accepted[(dist, ranks, nodes, links)], candidates keyed the same way
    accepted: list[tuple[float, tuple[int, ...], tuple[int, ...], tuple[int, ...]]] = [
        (first[0], topo.lex_key(first[1]), first[1], first[2])
    ]
    candidates: list[
        tuple[float, tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    ] = []
    seen_paths = {first[1]}

    while len(accepted) < k:
        _, _, prev_nodes, prev_links = accepted[-1]
        for i in range(len(prev_nodes) - 1):
            root_nodes = prev_nodes[: i + 1]
            root_links = prev_links[:i]
            root_len = sum(topo.links[l].length_km for l in root_links)
            banned_links = set()
            for _, _, a_nodes, a_links in accepted:
                if a_nodes[: i + 1] == root_nodes and len(a_links) > i:
                    banned_links.add(a_links[i])
            banned_nodes = frozenset(root_nodes[:-1])
            spur = _lex_dijkstra(
                topo, root_nodes[-1], dest, banned_nodes, frozenset(banned_links)
            )
            if spur is None:
                continue
            total_nodes = root_nodes + spur[1][1:]
            if total_nodes in seen_paths:
                continue
            total_links = root_links + spur[2]
            entry = (
                root_len + spur[0],
                topo.lex_key(total_nodes),
                total_nodes,
                total_links,
            )
            candidates.append(entry)
            seen_paths.add(total_nodes)
        if not candidates:
            break
        candidates.sort(key=lambda e: (e[0], e[1]))
        accepted.append(candidates.pop(0))

    out: list[CandidatePath] = []
    for dist, _, nodes, links in accepted:
        try:
            mf = assign_modulation(dist, reach_table)
        except UnreachableError:
            continue
        out.append(
            CandidatePath(
                path_index=len(out),
                nodes=nodes,
                links=links,
                total_length_km=dist,
                modulation=mf,
            )
        )
    return out


def load_topology(path: str) -> Topology:
    """Read a link list CSV with header ``node_a,node_b,length_km``."""
    edges: list[tuple[str, str, float]] = []
    try:
        fh = open(path, newline="")
    except FileNotFoundError:
        raise DataError(f"topology file not found: {path}") from None
    with fh:
        reader = csv.DictReader(fh)
        required = {"node_a", "node_b", "length_km"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(
                f"{path}: expected header with columns {sorted(required)}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                length = float(row["length_km"])
            except (TypeError, ValueError):
                raise DataError(
                    f"{path}:{lineno}: bad length_km {row['length_km']!r}"
                ) from None
            a, b = row["node_a"], row["node_b"]
            if not a or not b:
                raise DataError(f"{path}:{lineno}: empty node id")
            edges.append((a, b, length))
    return Topology(edges)
