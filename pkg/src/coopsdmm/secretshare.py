"""Secure coded storage, Shamir sharing and cooperative recovery.

A storage plan is a K x N generator G.  A message m of rho symbols is padded
with K - rho uniform symbols s and stored as ``(m, s) G``, one symbol per
server.  Security against X colluders follows when every X columns of the
lower K - rho rows of G are independent; :func:`secrecy_audit` checks this
both by rank and by brute-force enumeration of the randomness.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, InsufficientShares, Singular
from .field import FieldElement, PrimeField
from .matgrid import FieldMatrix, invert, rank, solve
from .polycode import _as_values

AUDIT_BUDGET = 10**7
_EXHAUSTIVE_SUBSETS = 20_000


@dataclass(frozen=True)
class StoragePlan:
    G: FieldMatrix
    rho: int
    X: int
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        K, N = self.G.shape
        if not 0 <= self.rho <= K <= N:
            raise ValueError(f"need rho <= K <= N, got rho={self.rho}, K={K}, N={N}")
        if self.X < 0:
            raise ValueError("X must be non-negative")
        if self.check and self.X and not self.rank_condition(self.X):
            raise ValueError(f"generator does not hide the message from {self.X} colluders")

    @property
    def field(self) -> PrimeField:
        return self.G.field

    @property
    def K(self) -> int:
        return self.G.rows

    @property
    def N(self) -> int:
        return self.G.cols

    @property
    def upper(self) -> FieldMatrix:
        return self.G.submatrix(rows=range(self.rho))

    @property
    def lower(self) -> FieldMatrix:
        """G_{>rho}: the rows multiplied by the randomness."""
        return self.G.submatrix(rows=range(self.rho, self.K))

    def rank_condition(self, X: int, prg=None, samples: int = 2000) -> bool:
        """Every X-subset of lower-row columns has rank X.

        Exhaustive while the number of subsets is manageable, otherwise a
        random sample of ``samples`` subsets drawn from ``prg``.
        """
        if X == 0:
            return True
        if X > self.K - self.rho:
            return False
        low = self.lower
        n_subsets = math.comb(self.N, X)
        if n_subsets <= _EXHAUSTIVE_SUBSETS or prg is None:
            subsets: Iterable = itertools.combinations(range(self.N), X)
        else:
            subsets = (_random_subset(prg, self.N, X) for _ in range(samples))
        return all(rank(low.submatrix(cols=T)) == X for T in subsets)


def _random_subset(prg, n, k):
    pool = list(range(n))
    for i in range(k):
        j = i + prg.randbelow(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return tuple(sorted(pool[:k]))


@dataclass(frozen=True)
class ShareVector:
    y: tuple[FieldElement, ...]

    def __len__(self):
        return len(self.y)

    def __getitem__(self, i) -> FieldElement:
        return self.y[i]

    def values(self) -> list[int]:
        return [e.value for e in self.y]


@dataclass(frozen=True)
class ComponentPartition:
    components: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        comps = tuple(tuple(sorted(int(v) for v in c)) for c in self.components)
        comps = tuple(sorted((c for c in comps if c), key=lambda c: c[0]))
        flat = [v for c in comps for v in c]
        if sorted(flat) != list(range(self.n)):
            raise ValueError(f"components {comps} do not partition range({self.n})")
        object.__setattr__(self, "components", comps)

    @classmethod
    def singletons(cls, n: int) -> "ComponentPartition":
        return cls(tuple((i,) for i in range(n)), n)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


class _Unrecoverable:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Unrecoverable"

    def __bool__(self):
        return False


Unrecoverable = _Unrecoverable()


def shamir_plan(points: Sequence[FieldElement], K: int) -> StoragePlan:
    """[N, K] threshold plan; row 0 holds x**(K-1), the last row is all ones.

    The secret multiplies the top row, so 0 is a legal evaluation point.
    """
    F, xs = _as_values(points)
    if not 1 <= K <= len(xs):
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={len(xs)}")
    q = F.modulus
    G = FieldMatrix(F, [[pow(x, K - 1 - k, q) for x in xs] for k in range(K)])
    return StoragePlan(G, rho=1, X=K - 1)


def _to_values(F, seq) -> list[int]:
    return [int(v) % F.modulus for v in seq]


def share(plan: StoragePlan, m: Sequence, prg, randomness: Sequence | None = None) -> ShareVector:
    """Encode ``m`` as ``(m, s) G``; ``s`` is uniform from ``prg`` unless given."""
    F = plan.field
    if len(m) != plan.rho:
        raise ValueError(f"message has {len(m)} symbols, plan stores {plan.rho}")
    k = plan.K - plan.rho
    if randomness is None:
        s = [int(v) for v in prg.values(F, k)] if k else []
    else:
        if len(randomness) != k:
            raise ValueError(f"need {k} random symbols")
        s = _to_values(F, randomness)
    row = FieldMatrix(F, [_to_values(F, m) + s]) if plan.K else None
    y = (row @ plan.G).entries()
    return ShareVector(tuple(FieldElement(v, F) for v in y))


def _independent_columns(G: FieldMatrix, candidates: Sequence[int]) -> list[int]:
    chosen: list[int] = []
    for c in candidates:
        if rank(G.submatrix(cols=chosen + [c])) == len(chosen) + 1:
            chosen.append(c)
            if len(chosen) == G.rows:
                break
    return chosen


def recover(plan: StoragePlan, shares: Sequence[tuple[int, FieldElement]]) -> list[FieldElement]:
    """Solve the K x K system on K shares with independent generator columns."""
    F = plan.field
    if len(shares) < plan.K:
        raise InsufficientShares(f"{len(shares)} shares, need at least K={plan.K}")
    by_index = {int(i): int(v) for i, v in shares}
    cols = _independent_columns(plan.G, list(by_index))
    if len(cols) < plan.K:
        raise Singular(f"share columns span only rank {len(cols)} < K={plan.K}")
    GT = plan.G.submatrix(cols=cols)
    yT = FieldMatrix(F, [[by_index[c] for c in cols]])
    v = (yT @ invert(GT)).entries()
    return [FieldElement(x, F) for x in v[: plan.rho]]


def recovery_alphas(plan: StoragePlan, indices: Sequence[int], target: int = 0) -> dict[int, FieldElement]:
    """Coefficients alpha with ``sum alpha_i y_i = m_target`` for any stored data."""
    F = plan.field
    GT = plan.G.submatrix(cols=list(indices))
    e = FieldMatrix(F, [[int(k == target)] for k in range(plan.K)])
    sol = solve(GT, e)
    if sol is None:
        raise Singular(f"servers {list(indices)} cannot recover symbol {target}")
    return {i: FieldElement(v, F) for i, v in zip(indices, sol.entries())}


def _alpha_vector(plan: StoragePlan, alpha) -> list[int]:
    if isinstance(alpha, Mapping):
        out = [0] * plan.N
        for i, a in alpha.items():
            out[int(i)] = int(a) % plan.field.modulus
        return out
    return _to_values(plan.field, alpha)


def is_valid_alpha(plan: StoragePlan, alpha, target: int = 0) -> bool:
    """``G alpha = e_target``: the combination returns m_target for all data."""
    a = FieldMatrix(plan.field, [[v] for v in _alpha_vector(plan, alpha)])
    return (plan.G @ a).entries() == [int(k == target) for k in range(plan.K)]


def coop_recover(plan: StoragePlan, y: ShareVector, partition: ComponentPartition, alpha):
    """One aggregated response per component; the message is their sum.

    Returns ``(responses, message)``; the download cost is ``len(responses)``.
    """
    F = plan.field
    q = F.modulus
    a = _alpha_vector(plan, alpha)
    responses = []
    for comp in partition:
        r = sum(a[i] * y[i].value for i in comp) % q
        responses.append(FieldElement(r, F))
    message = FieldElement(sum(r.value for r in responses) % q, F)
    return responses, message


def compressed_columns(plan: StoragePlan, partition: ComponentPartition, alphas) -> FieldMatrix:
    """K x gamma matrix whose column c is ``sum_{j in V_c} alpha_j g^j``."""
    a = _alpha_vector(plan, alphas)
    F = plan.field
    Garr = plan.G.array
    cols = []
    for comp in partition:
        acc = [0] * plan.K
        for j in comp:
            for k in range(plan.K):
                acc[k] += a[j] * int(Garr[k, j])
        cols.append(acc)
    return FieldMatrix(F, [[cols[c][k] for c in range(len(cols))] for k in range(plan.K)])


def coop_partition_recover(plan: StoragePlan, y: ShareVector, partition: ComponentPartition, alphas, i: int):
    """Recover ``m_i`` from per-component combinations, or ``Unrecoverable``.

    ``m_i`` is recoverable exactly when ``e_i`` lies in the span of the
    compressed columns; the solving combination is applied to the responses.
    """
    F = plan.field
    q = F.modulus
    C = compressed_columns(plan, partition, alphas)
    e = FieldMatrix(F, [[int(k == i)] for k in range(plan.K)])
    beta = solve(C, e)
    if beta is None:
        return Unrecoverable
    a = _alpha_vector(plan, alphas)
    responses = [sum(a[j] * y[j].value for j in comp) % q for comp in partition]
    return FieldElement(sum(b * r for b, r in zip(beta.entries(), responses)) % q, F)


def search_partition_alphas(plan: StoragePlan, partition: ComponentPartition, targets: Sequence[int], prg,
                            budget: int = 1000):
    """Random search for per-server coefficients making ``targets`` recoverable.

    Returns ``(alphas, recoverable)`` for the best draw seen; stops early
    once every target is recoverable.  No optimality claim.
    """
    F = plan.field
    best, best_ok = None, set()
    for _ in range(budget):
        alphas = [int(v) for v in prg.values(F, plan.N)]
        C = compressed_columns(plan, partition, alphas)
        ok = set()
        for t in targets:
            e = FieldMatrix(F, [[int(k == t)] for k in range(plan.K)])
            if solve(C, e) is not None:
                ok.add(t)
        if best is None or len(ok) > len(best_ok):
            best, best_ok = alphas, ok
        if len(ok) == len(targets):
            break
    return best, best_ok


@dataclass
class AuditVerdict:
    passed: bool
    rank_check: bool
    enumeration_rows: int
    failing_subset: tuple[int, ...] | None = None

    @property
    def criteria_agree(self) -> bool:
        return self.passed == self.rank_check

    def to_dict(self) -> dict:
        d = {"pass": self.passed, "rank_check": self.rank_check, "enumeration_rows": self.enumeration_rows}
        if self.failing_subset is not None:
            d["failing_subset"] = list(self.failing_subset)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _all_vectors(q: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), dtype=object)
    return np.array(list(itertools.product(range(q), repeat=k)), dtype=object).reshape(-1, k)


def _sorted_rows(a: np.ndarray) -> list[tuple]:
    return sorted(map(tuple, a.tolist()))


def secrecy_audit(plan: StoragePlan, X: int, budget: int = AUDIT_BUDGET) -> AuditVerdict:
    """Brute-force check that any X shares are independent of the message.

    For each X-subset T, the multiset of ``y|_T`` over all randomness is
    computed for every message and compared with the zero message's.  The
    rank condition on ``G_{>rho}`` is reported alongside; it is sufficient
    for a PASS and, for MDS generators, also necessary.
    """
    q = plan.field.modulus
    k = plan.K - plan.rho
    subsets = math.comb(plan.N, X)
    if q**k * subsets > budget:
        raise BudgetExceeded(f"{q}^{k} * C({plan.N},{X}) = {q**k * subsets} rows exceeds {budget}")
    S = _all_vectors(q, k)
    M = _all_vectors(q, plan.rho)
    upper = plan.upper.array.astype(object)
    lower = plan.lower.array.astype(object)
    rows = 0
    failing = None
    for T in itertools.combinations(range(plan.N), X):
        T = list(T)
        base = (S @ lower[:, T]) % q if k else np.zeros((1, X), dtype=object)
        reference = _sorted_rows(base)
        rows += len(base)
        for m in M:
            shift = (m @ upper[:, T]) % q if plan.rho else np.zeros(X, dtype=object)
            rows += len(base)
            if _sorted_rows((base + shift) % q) != reference:
                failing = tuple(T)
                break
        if failing is not None:
            break
    return AuditVerdict(
        passed=failing is None,
        rank_check=plan.rank_condition(X),
        enumeration_rows=rows,
        failing_subset=failing,
    )
