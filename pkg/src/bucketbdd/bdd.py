"""Reduced ordered BDDs with hash-consing.

Nodes are integer handles into a :class:`NodeStore`.  Handles 0 and 1 are the
terminals ``L0`` (false) and ``L1`` (true).  The store keeps two orders over
the variables: the BDD order (labels strictly increase along every edge) and
the bucket order, used only to compute :meth:`NodeStore.bvar`.
"""

from __future__ import annotations

import time
from typing import Callable, Iterable, Mapping, Sequence

from .cnf import Permutation

L0 = 0
L1 = 1

_LEAF_LEVEL = 1 << 30


class ResourceLimit(RuntimeError):
    """A node, clause or time cap fired.  ``cap`` is one of ``nodes``, ``clauses``, ``time``."""

    def __init__(self, cap: str, detail: str = ""):
        self.cap = cap
        super().__init__(f"{cap} limit reached" + (f": {detail}" if detail else ""))


class NodeStore:
    """Append-only node arena with unique table and operation caches.

    ``bdd_order`` fixes the variable order of every BDD in the store.
    ``bucket_order`` (default: same as ``bdd_order``) is used for ``bvar``.
    Callbacks in ``on_create`` run once for each newly created node.
    """

    def __init__(
        self,
        bdd_order: Permutation,
        bucket_order: Permutation | None = None,
        use_cache: bool = True,
        max_nodes: int | None = None,
        deadline: float | None = None,
    ):
        bucket_order = bucket_order or bdd_order
        if len(bucket_order) != len(bdd_order):
            raise ValueError("orders cover different variable counts")
        self.num_vars = len(bdd_order)
        self.bdd_order = bdd_order
        self.bucket_order = bucket_order
        self.use_cache = use_cache
        self.max_nodes = max_nodes
        self.deadline = deadline
        # per-node arrays; index 0/1 are the terminals
        self.var = [0, 0]
        self.hi = [0, 1]
        self.lo = [0, 1]
        self.level = [_LEAF_LEVEL, _LEAF_LEVEL]
        self.bpos = [_LEAF_LEVEL, _LEAF_LEVEL]
        self.unique: dict[tuple[int, int, int], int] = {}
        self.and_cache: dict[tuple[int, int], int] = {}
        self.or_cache: dict[tuple[int, int], int] = {}
        self.restrict_cache: dict[tuple[int, int, bool], int] = {}
        self.exists_cache: dict[tuple[int, int], int] = {}
        self.on_create: list[Callable[[int], None]] = []
        self._vpos = bdd_order.position
        self._bpos = bucket_order.position

    # -- construction -------------------------------------------------------

    @property
    def nodes_created(self) -> int:
        return len(self.var) - 2

    def make_node(self, v: int, hi: int, lo: int) -> int:
        if hi == lo:
            return lo
        key = (v, hi, lo)
        u = self.unique.get(key)
        if u is not None:
            return u
        lev = self._vpos[v]
        assert lev < self.level[hi] and lev < self.level[lo], "BDD order violated"
        u = len(self.var)
        if self.max_nodes is not None and u - 2 >= self.max_nodes:
            raise ResourceLimit("nodes", f"{self.max_nodes} nodes")
        if self.deadline is not None and (u & 0xFFF) == 0 and time.monotonic() > self.deadline:
            raise ResourceLimit("time")
        self.var.append(v)
        self.hi.append(hi)
        self.lo.append(lo)
        self.level.append(lev)
        self.bpos.append(min(self._bpos[v], self.bpos[hi], self.bpos[lo]))
        self.unique[key] = u
        for cb in self.on_create:
            cb(u)
        return u

    def literal(self, lit: int) -> int:
        v = abs(lit)
        return self.make_node(v, L1, L0) if lit > 0 else self.make_node(v, L0, L1)

    def clause_chain(self, clause: Sequence[int]) -> list[int]:
        """Nodes of the clause BDD from bottom to top; empty for L0/L1 results."""
        lits = sorted(set(clause), key=lambda l: self._vpos[abs(l)])
        for a, b in zip(lits, lits[1:]):
            if a == -b:
                return []
        chain = []
        below = L0
        for lit in reversed(lits):
            v = abs(lit)
            below = self.make_node(v, L1, below) if lit > 0 else self.make_node(v, below, L1)
            chain.append(below)
        return chain

    def clause_to_bdd(self, clause: Sequence[int]) -> int:
        if not clause:
            return L0
        chain = self.clause_chain(clause)
        return chain[-1] if chain else L1

    # -- operations ---------------------------------------------------------

    def _split(self, u: int, lev: int) -> tuple[int, int]:
        if self.level[u] == lev:
            return self.hi[u], self.lo[u]
        return u, u

    def and_(self, u: int, v: int) -> int:
        if u == L0 or v == L0:
            return L0
        if u == L1 or u == v:
            return v
        if v == L1:
            return u
        if u > v:
            u, v = v, u
        key = (u, v)
        if self.use_cache:
            w = self.and_cache.get(key)
            if w is not None:
                return w
        lev = min(self.level[u], self.level[v])
        u1, u0 = self._split(u, lev)
        v1, v0 = self._split(v, lev)
        x = self.bdd_order.order[lev]
        w = self.make_node(x, self.and_(u1, v1), self.and_(u0, v0))
        if self.use_cache:
            self.and_cache[key] = w
        return w

    def or_(self, u: int, v: int) -> int:
        if u == L1 or v == L1:
            return L1
        if u == L0 or u == v:
            return v
        if v == L0:
            return u
        if u > v:
            u, v = v, u
        key = (u, v)
        if self.use_cache:
            w = self.or_cache.get(key)
            if w is not None:
                return w
        lev = min(self.level[u], self.level[v])
        u1, u0 = self._split(u, lev)
        v1, v0 = self._split(v, lev)
        x = self.bdd_order.order[lev]
        w = self.make_node(x, self.or_(u1, v1), self.or_(u0, v0))
        if self.use_cache:
            self.or_cache[key] = w
        return w

    def restrict(self, u: int, var: int, value: bool) -> int:
        lev = self._vpos[var]
        return self._restrict(u, var, lev, bool(value))

    def _restrict(self, u: int, var: int, lev: int, value: bool) -> int:
        ulev = self.level[u]
        if ulev > lev:
            # terminal, or var lies above the root in the order
            return u
        if ulev == lev:
            return self.hi[u] if value else self.lo[u]
        key = (u, var, value)
        if self.use_cache:
            w = self.restrict_cache.get(key)
            if w is not None:
                return w
        w = self.make_node(
            self.var[u],
            self._restrict(self.hi[u], var, lev, value),
            self._restrict(self.lo[u], var, lev, value),
        )
        if self.use_cache:
            self.restrict_cache[key] = w
        return w

    def exists(self, u: int, var: int) -> int:
        key = (u, var)
        if self.use_cache:
            w = self.exists_cache.get(key)
            if w is not None:
                return w
        w = self.or_(self.restrict(u, var, True), self.restrict(u, var, False))
        if self.use_cache:
            self.exists_cache[key] = w
        return w

    # -- queries ------------------------------------------------------------

    def bvar(self, u: int, bucket_order: Permutation | None = None) -> int | None:
        """Variable of ``u``'s graph that comes first in the bucket order; None for terminals."""
        if u <= L1:
            return None
        if bucket_order is None or bucket_order is self.bucket_order:
            return self.bucket_order.order[self.bpos[u]]
        pos = bucket_order.position
        return min(self.support(u), key=lambda v: pos[v])

    def nodes(self, u: int | Iterable[int]) -> set[int]:
        """Non-terminal nodes reachable from ``u`` (a root or several roots)."""
        stack = [u] if isinstance(u, int) else list(u)
        seen: set[int] = set()
        hi, lo = self.hi, self.lo
        while stack:
            k = stack.pop()
            if k <= L1 or k in seen:
                continue
            seen.add(k)
            stack.append(hi[k])
            stack.append(lo[k])
        return seen

    def node_count(self, u: int) -> int:
        return len(self.nodes(u))

    def support(self, u: int) -> set[int]:
        return {self.var[k] for k in self.nodes(u)}

    def evaluate(self, u: int, assignment: Mapping[int, bool] | Sequence[bool]) -> bool:
        while u > L1:
            v = self.var[u]
            try:
                val = assignment[v]
            except (KeyError, IndexError):
                raise ValueError(f"assignment has no value for variable {v}") from None
            if val is None:
                raise ValueError(f"assignment has no value for variable {v}")
            u = self.hi[u] if val else self.lo[u]
        return u == L1

    def to_dot(self, u: int, names: Mapping[int, str] | None = None) -> str:
        lines = ["digraph bdd {"]
        lines.append('  n0 [shape=box,label="0"];')
        lines.append('  n1 [shape=box,label="1"];')
        for k in sorted(self.nodes(u)):
            v = self.var[k]
            label = names.get(v, str(v)) if names else str(v)
            lines.append(f'  n{k} [label="{label}"];')
            lines.append(f"  n{k} -> n{self.hi[k]};")
            lines.append(f"  n{k} -> n{self.lo[k]} [style=dashed];")
        lines.append("}")
        return "\n".join(lines) + "\n"
