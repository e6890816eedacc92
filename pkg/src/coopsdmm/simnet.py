"""Deterministic simulation fabric: graphs, stragglers, transcripts, ledgers.

Every message a protocol sends is recorded as a transcript event.  The cost
ledger is recounted from those events alone (routing + payload kind), never
taken from the protocol's own bookkeeping, so the two can be cross-checked.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, TopologyViolation
from .field import PrimeField
from .matgrid import FieldMatrix
from .secretshare import AUDIT_BUDGET, ComponentPartition

USER = "user"

# payloads that are small and excluded from headline costs
AUX_KINDS = frozenset({"point", "points", "identity", "key", "nonce"})

LEDGER_CSV_HEADER = "mode,p_or_mn,X,N,Rc,upload,download,cooperation,auxiliary"


# graphs -------------------------------------------------------------------

@dataclass(frozen=True)
class CoopGraph:
    """Undirected collusion / cooperation graph on servers ``0..n-1``."""

    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) outside range({self.n})")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def empty(cls, n: int) -> "CoopGraph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "CoopGraph":
        return cls(n, frozenset(itertools.combinations(range(n), 2)))

    @classmethod
    def from_groups(cls, n: int, groups: Iterable[Sequence[int]]) -> "CoopGraph":
        """Disjoint cliques, one per group."""
        edges = set()
        for g in groups:
            edges.update(itertools.combinations(sorted(g), 2))
        return cls(n, frozenset(edges))

    def components(self) -> ComponentPartition:
        return components(self)

    def largest_component(self) -> int:
        return max(len(c) for c in self.components())


def components(g: CoopGraph) -> ComponentPartition:
    """Connected components, ordered by smallest member."""
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in g.edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in range(g.n):
        groups.setdefault(find(v), []).append(v)
    return ComponentPartition(tuple(tuple(c) for c in groups.values()), g.n)


# stragglers ---------------------------------------------------------------

@dataclass(frozen=True)
class StragglerModel:
    """Seeded uniform latencies; ``non_responders`` never answer.

    Servers are ranked by (latency, index), so the order is total and
    reproducible for a given seed.
    """

    seed: int
    non_responders: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "non_responders", frozenset(int(i) for i in self.non_responders))

    def latencies(self, n: int) -> np.ndarray:
        return np.random.Generator(np.random.PCG64(self.seed)).random(n)

    def order(self, n: int) -> list[int]:
        lat = self.latencies(n)
        ranked = sorted(range(n), key=lambda i: (lat[i], i))
        return [i for i in ranked if i not in self.non_responders]


# transcript ---------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    phase: str
    src: object
    dst: object
    kind: str
    symbols: int
    digest: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _payload_bytes(payload) -> bytes:
    if isinstance(payload, FieldMatrix):
        return payload.to_bytes()
    if isinstance(payload, (bytes, bytearray)):
        return bytes(payload)
    return repr(payload).encode()


class Transcript:
    """Ordered log of every message of one protocol run."""

    def __init__(self, field: PrimeField):
        self.field = field
        self.events: list[Event] = []

    def symbols_of(self, payload) -> int:
        if isinstance(payload, FieldMatrix):
            return payload.size
        if isinstance(payload, (bytes, bytearray)):
            # bytes travel packed into F_q symbols
            return math.ceil(8 * len(payload) / max(1, self.field.modulus.bit_length() - 1))
        if isinstance(payload, (list, tuple)):
            return len(payload)
        return 1

    def record(self, phase: str, src, dst, kind: str, payload) -> Event:
        ev = Event(
            phase=phase,
            src=src,
            dst=dst,
            kind=kind,
            symbols=self.symbols_of(payload),
            digest=hashlib.sha256(_payload_bytes(payload)).hexdigest()[:16],
        )
        self.events.append(ev)
        return ev

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def to_jsonl(self) -> str:
        return "".join(ev.to_json() + "\n" for ev in self.events)

    def hash(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()


# cost ledger --------------------------------------------------------------

@dataclass
class CostLedger:
    """Symbol counts (F_q elements) per cost bucket."""

    upload: int = 0
    download: int = 0
    cooperation: int = 0
    auxiliary: int = 0

    def charge(self, src, dst, kind: str, symbols: int) -> None:
        if kind in AUX_KINDS:
            self.auxiliary += symbols
        elif src == USER:
            self.upload += symbols
        elif dst == USER:
            self.download += symbols
        else:
            self.cooperation += symbols

    @classmethod
    def from_transcript(cls, transcript: Transcript) -> "CostLedger":
        ledger = cls()
        for ev in transcript:
            ledger.charge(ev.src, ev.dst, ev.kind, ev.symbols)
        return ledger

    def headline(self) -> tuple[int, int, int]:
        return (self.upload, self.download, self.cooperation)

    def csv_row(self, mode: str, p_or_mn, X: int, N: int, Rc: int) -> str:
        return f"{mode},{p_or_mn},{X},{N},{Rc},{self.upload},{self.download},{self.cooperation},{self.auxiliary}"


# protocol driver ----------------------------------------------------------

@dataclass
class SimResult:
    result: object
    transcript: Transcript
    ledger: CostLedger
    report: CostLedger
    run: object = None


def check_topology(run, graph: CoopGraph | None, collusion: CoopGraph | None = None, X: int | None = None) -> None:
    """Raise :class:`TopologyViolation` if the run's groups ignore the graph."""
    if run.security == "it":
        if graph is None:
            return
        if X is not None and graph.largest_component() > X:
            raise TopologyViolation(
                f"collusion component of size {graph.largest_component()} exceeds X={X}")
        where = {v: ci for ci, comp in enumerate(graph.components()) for v in comp}
        for grp in run.groups:
            if len({where[v] for v in grp}) > 1:
                raise TopologyViolation(f"cooperation group {list(grp)} spans several components")
    else:
        if collusion is not None and X is not None and collusion.largest_component() > X:
            raise TopologyViolation(
                f"collusion component of size {collusion.largest_component()} exceeds X={X}")
        if graph is None:
            return
        where = {v: ci for ci, comp in enumerate(graph.components()) for v in comp}
        for grp in run.groups:
            if len({where[v] for v in grp}) > 1:
                raise TopologyViolation(f"servers {list(grp)} cannot all reach their hub")


def run(protocol, graph: CoopGraph | None = None, straggler: StragglerModel | None = None,
        seed: int | None = None, collusion: CoopGraph | None = None) -> SimResult:
    """Execute ``protocol`` and recount its costs from the transcript.

    In information-theoretic mode the graph is both the cooperation and the
    collusion graph: every cooperation group must sit inside one component
    and no component may exceed X.  In encryption mode ``graph`` is only
    the cooperation graph and ``collusion`` (optional) is checked against X.
    """
    if straggler is None:
        straggler = StragglerModel(protocol.default_straggler_seed() if seed is None else seed)
    result = protocol.execute(straggler)
    check_topology(result, graph, collusion, protocol.X)
    ledger = CostLedger.from_transcript(result.transcript)
    return SimResult(result.product, result.transcript, ledger, result.report, result)


# security probe -----------------------------------------------------------

@dataclass
class ProbeTarget:
    """An upload encoder with explicit randomness, for exhaustive probing.

    ``encode(inputs, randomness)`` returns one tuple of field values per
    server: everything that server receives during upload.
    """

    field: PrimeField
    n_servers: int
    randomness_dim: int
    encode: Callable[[object, Sequence[int]], list[tuple[int, ...]]]
    inputs: Sequence


@dataclass
class ProbeVerdict:
    passed: bool
    X: int
    enumeration_rows: int
    witness: dict | None = None

    def to_dict(self) -> dict:
        d = {"pass": self.passed, "X": self.X, "enumeration_rows": self.enumeration_rows}
        if self.witness is not None:
            d["witness"] = self.witness
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def security_probe(target: ProbeTarget, X: int, budget: int = AUDIT_BUDGET) -> ProbeVerdict:
    """Exhaustively compare what every X-subset sees under different inputs.

    For each input, the uploads are enumerated over all ``q**d`` randomness
    vectors; for every X-subset of servers the multiset of joint views must
    coincide with that of the first input.
    """
    q = target.field.modulus
    d = target.randomness_dim
    n_subsets = math.comb(target.n_servers, X)
    if q**d * n_subsets > budget:
        raise BudgetExceeded(f"{q}^{d} * C({target.n_servers},{X}) = {q**d * n_subsets} exceeds {budget}")
    if len(target.inputs) < 2:
        raise ValueError("need at least two inputs to compare")
    views = []
    for inp in target.inputs:
        views.append([target.encode(inp, list(rv)) for rv in itertools.product(range(q), repeat=d)])
    rows = 0
    for T in itertools.combinations(range(target.n_servers), X):
        def joint(view_set):
            return Counter(tuple(itertools.chain.from_iterable(v[i] for i in T)) for v in view_set)

        ref = joint(views[0])
        rows += len(views[0])
        for k, vs in enumerate(views[1:], start=1):
            rows += len(vs)
            other = joint(vs)
            if other != ref:
                diff = next(iter((ref - other) or (other - ref)))
                return ProbeVerdict(False, X, rows, {
                    "servers": list(T),
                    "inputs": [0, k],
                    "view": list(diff),
                    "counts": [ref.get(diff, 0), other.get(diff, 0)],
                })
    return ProbeVerdict(True, X, rows)
