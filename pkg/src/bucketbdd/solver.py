"""Bucket elimination over clause BDDs with separate BDD and bucket orders."""

from __future__ import annotations

import enum
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

from .bdd import L0, L1, NodeStore, ResourceLimit
from .cnf import Cnf, Permutation, is_tautology
from .proof import Justifier, ProofLog

PICK_POLICIES = ("smallest", "fifo")
PROOF_MODES = ("off", "count", "full")


class Verdict(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    INDETERMINATE = "INDETERMINATE"


@dataclass
class SolveOptions:
    """``proof``: ``off``, ``count`` (clause metric only) or ``full`` (materialized log)."""

    proof: str = "off"
    pick: str = "smallest"
    max_nodes: int | None = None
    max_clauses: int | None = None
    time_limit: float | None = None
    track_live: bool = True
    trace: bool = False


@dataclass
class SolveStats:
    nodes_created: int = 0
    max_live_nodes: int = 0
    conjunctions: int = 0
    quantifications: int = 0
    clause_metric: int | None = None
    time_ms: float = 0.0
    buckets_processed: int = 0

    def record(self) -> str:
        """Single-line ``key=value`` rendering."""
        return " ".join(f"{k}={v}" for k, v in self.__dict__.items())


@dataclass
class SolveResult:
    verdict: Verdict
    model: dict[int, bool] | None = None
    stats: SolveStats = field(default_factory=SolveStats)
    proof: ProofLog | None = None
    cap: str | None = None
    trace: list[tuple] | None = None


class BucketState:
    """Buckets indexed by bucket-order position.

    Each bucket maps root node -> (unit clause id, node count) and keeps
    insertion order.  ``snapshots[k]`` is the node that bucket ``k`` held
    when it was quantified.
    """

    def __init__(self, store: NodeStore):
        self.store = store
        n = store.num_vars
        self.buckets: list[dict[int, tuple[int | None, int]]] = [{} for _ in range(n)]
        self.snapshots: list[int | None] = [None] * n
        self.order = store.bucket_order

    def position(self, u: int) -> int:
        return self.store.bpos[u]

    def live_nodes(self) -> int:
        return len(self.store.nodes(u for b in self.buckets for u in b))


def pick_pair(bucket: dict[int, tuple[int | None, int]], policy: str = "smallest") -> tuple[int, int]:
    """Choose two roots to conjoin.  ``smallest``: fewest nodes, ties by creation order."""
    if policy == "fifo":
        it = iter(bucket)
        return next(it), next(it)
    if policy != "smallest":
        raise ValueError(f"unknown pick policy {policy!r}")
    first, second = sorted(bucket, key=lambda u: (bucket[u][1], u))[:2]
    return first, second


class BucketSolver:
    """One solve: one store, one bucket state, one optional proof log."""

    def __init__(self, cnf: Cnf, bdd_order: Permutation, bucket_order: Permutation, options: SolveOptions | None = None):
        self.cnf = cnf
        self.options = options = options or SolveOptions()
        for perm in (bdd_order, bucket_order):
            if len(perm) != cnf.num_vars:
                raise ValueError(f"ordering covers {len(perm)} variables, formula has {cnf.num_vars}")
        if options.proof not in PROOF_MODES:
            raise ValueError(f"unknown proof mode {options.proof!r}")
        if options.pick not in PICK_POLICIES:
            raise ValueError(f"unknown pick policy {options.pick!r}")
        self.start = time.monotonic()
        deadline = self.start + options.time_limit if options.time_limit else None
        self.store = NodeStore(bdd_order, bucket_order, max_nodes=options.max_nodes, deadline=deadline)
        self.deadline = deadline
        self.state = BucketState(self.store)
        self.stats = SolveStats()
        self.log: ProofLog | None = None
        self.justifier: Justifier | None = None
        if options.proof != "off":
            self.log = ProofLog(cnf, materialize=options.proof == "full", max_clauses=options.max_clauses)
            self.justifier = Justifier(self.store, self.log)
        self.trace: list[tuple] | None = [] if options.trace else None

    # -- bucket operations ---------------------------------------------------

    def _delete(self, *ids: int | None) -> None:
        if self.log is not None:
            self.log.delete(i for i in ids if i is not None)

    def place(self, u: int, unit: int | None, origin: int | None = None, strict: bool = False) -> int:
        """Insert root ``u`` into the bucket of its bvar; return that position."""
        if u <= L1:
            raise ValueError("terminal nodes are never bucketed")
        k = self.store.bpos[u]
        if origin is not None:
            ok = k > origin if strict else k >= origin
            assert ok, f"node placed at bucket {k} while processing {origin}"
        bucket = self.state.buckets[k]
        if u in bucket:
            self._delete(unit)
        else:
            bucket[u] = (unit, self.store.node_count(u))
        return k

    def process_bucket(self, k: int) -> bool:
        """Empty bucket ``k``; return True if the formula was refuted."""
        store, bucket = self.store, self.state.buckets[k]
        x = self.state.order.order[k]
        j = self.justifier
        for u in bucket:
            assert store.bpos[u] == k, "bucket membership violated"
        while bucket:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise ResourceLimit("time")
            if len(bucket) == 1:
                u, (uid, _) = bucket.popitem()
                self.state.snapshots[k] = u
                self.stats.quantifications += 1
                if j is not None:
                    w, jid = j.exists(u, x)
                else:
                    w, jid = store.exists(u, x), None
                assert w != L0, "quantification of a satisfiable node gave L0"
                if self.trace is not None:
                    self.trace.append(("exists", k, u, w, store.bpos[w] if w > L1 else None))
                if w == L1:
                    self._delete(uid)
                    continue
                wid = None
                if self.log is not None:
                    wid = self.log.derive([j.ext(w)], [uid, jid])
                    self._delete(uid)
                self.place(w, wid, origin=k, strict=True)
            else:
                u, v = pick_pair(bucket, self.options.pick)
                uid, _ = bucket.pop(u)
                vid, _ = bucket.pop(v)
                self.stats.conjunctions += 1
                if j is not None:
                    w, jid = j.and_(u, v)
                else:
                    w, jid = store.and_(u, v), None
                if self.trace is not None:
                    self.trace.append(("and", k, u, v, w, store.bpos[w] if w > L1 else None))
                if w == L0:
                    if self.log is not None:
                        self.log.derive([], [uid, vid, jid])
                    return True
                wid = None
                if self.log is not None:
                    if jid is None:
                        # w is one of the operands; keep its unit
                        wid, drop = (uid, vid) if w == u else (vid, uid)
                        self._delete(drop)
                    else:
                        wid = self.log.derive([j.ext(w)], [uid, vid, jid])
                        self._delete(uid, vid)
                self.place(w, wid, origin=k)
        return False

    # -- driver ---------------------------------------------------------------

    def solve(self) -> SolveResult:
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 4 * self.cnf.num_vars + 1000))
        try:
            verdict = self._run()
            cap = None
        except ResourceLimit as e:
            verdict, cap = Verdict.INDETERMINATE, e.cap
        finally:
            sys.setrecursionlimit(limit)
        st = self.stats
        st.nodes_created = self.store.nodes_created
        st.time_ms = round((time.monotonic() - self.start) * 1000.0, 3)
        if self.log is not None:
            st.clause_metric = self.log.metric
        result = SolveResult(verdict, stats=st, proof=self.log, cap=cap, trace=self.trace)
        if verdict is Verdict.SAT:
            result.model = self.extract_model()
            if not self.cnf.evaluate(result.model):
                raise AssertionError("extracted model does not satisfy the formula")
            result.proof = None
        return result

    def _run(self) -> Verdict:
        store, j = self.store, self.justifier
        for cid, clause in enumerate(self.cnf.clauses, start=1):
            if is_tautology(clause):
                continue
            if j is not None:
                u, uid = j.clause_unit(cid, clause)
            else:
                u, uid = store.clause_to_bdd(clause), None
            if u == L0:
                if self.log is not None and uid is None:
                    self.log.derive([], [cid])
                return Verdict.UNSAT
            self.place(u, uid)
        for k in range(len(self.state.buckets)):
            if self.options.track_live:
                self.stats.max_live_nodes = max(self.stats.max_live_nodes, self.state.live_nodes())
            self.stats.buckets_processed += 1
            if self.process_bucket(k):
                return Verdict.UNSAT
        return Verdict.SAT

    def extract_model(self) -> dict[int, bool]:
        """Assign variables in reverse bucket order so every snapshot stays satisfiable."""
        store = self.store
        model: dict[int, bool] = {}
        for k in reversed(range(len(self.state.buckets))):
            x = self.state.order.order[k]
            f = self.state.snapshots[k]
            if f is None:
                model[x] = False
                continue
            model[x] = False
            if not store.evaluate(f, model):
                model[x] = True
                assert store.evaluate(f, model), f"no value of {x} satisfies its bucket snapshot"
        return model


def solve(
    cnf: Cnf,
    bdd_order: Permutation | None = None,
    bucket_order: Permutation | None = None,
    options: SolveOptions | None = None,
    **kwargs,
) -> SolveResult:
    """Decide ``cnf`` by bucket elimination.  Orders default to the identity."""
    if options is None:
        options = SolveOptions(**kwargs)
    elif kwargs:
        raise TypeError("pass either options or keyword options, not both")
    bdd_order = bdd_order or Permutation.identity(cnf.num_vars)
    bucket_order = bucket_order or bdd_order
    return BucketSolver(cnf, bdd_order, bucket_order, options).solve()


def combo_orders(combo: str, orders: dict[str, Permutation]) -> tuple[Permutation, Permutation]:
    """``combo`` letters: bucket order first, BDD order second (e.g. ``HP``)."""
    if len(combo) != 2 or any(c not in orders for c in combo):
        raise ValueError(f"bad ordering combo {combo!r}")
    return orders[combo[1]], orders[combo[0]]


def model_line(model: dict[int, bool], num_vars: int) -> str:
    lits: Sequence[int] = [v if model.get(v, False) else -v for v in range(1, num_vars + 1)]
    return "v " + " ".join(map(str, lits)) + " 0"
