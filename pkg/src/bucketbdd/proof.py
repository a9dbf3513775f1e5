"""Extended-resolution proofs for BDD operations, and a clausal proof checker.

Every non-terminal BDD node ``u = ITE(x, hi, lo)`` gets an extension variable
(also written ``u``) defined by up to four clauses::

    (u  v -x v -hi)     (u  v  x v -lo)      "up" clauses:   hi/lo imply u
    (-u v -x v  hi)     (-u v  x v  lo)      "down" clauses: u implies hi/lo

Literals on terminal children are simplified away.  Conjunctions are
justified by the clause ``(-u v -v v w)`` and quantifications by
``(-u v w)``, each derived recursively along the apply call tree.

Proof text format (LRAT-style; input clauses are implicitly numbered 1..m)::

    <id> <lit>* 0 <hint-id>* 0     clause addition (no hints: extension/RAT step)
    <id> d <id>* 0                 deletion of the listed clauses
    c <anything>                   comment
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bdd import L0, L1, NodeStore, ResourceLimit
from .cnf import Cnf

# node literals for the terminals; -TRUE == FALSE
TRUE = 1 << 62
FALSE = -TRUE


class ProofError(RuntimeError):
    """An emitted step failed its local RUP self-check (a bug, not bad input)."""


class ProofFormatError(ValueError):
    pass


def clean(lits: Iterable[int]) -> list[int] | None:
    """Simplify terminal literals; None if the clause is trivially true."""
    out: list[int] = []
    for lit in lits:
        if lit == TRUE:
            return None
        if lit == FALSE or lit in out:
            continue
        if -lit in out:
            return None
        out.append(lit)
    return out


@dataclass(slots=True)
class ProofStep:
    """``kind`` is ``define``, ``derive`` or ``delete``.

    For deletions ``clause`` is empty and ``hints`` lists the deleted ids.
    """

    kind: str
    id: int
    clause: tuple[int, ...]
    hints: tuple[int, ...] = ()


class ProofLog:
    """Append-only proof.  With ``materialize=False`` only the counters are kept."""

    def __init__(self, cnf: Cnf, materialize: bool = True, max_clauses: int | None = None):
        self.num_vars = cnf.num_vars
        self.input_clauses = len(cnf.clauses)
        self.materialize = materialize
        self.max_clauses = max_clauses
        self.added = 0
        self.deleted = 0
        self.steps: list[ProofStep] = []
        # active clauses by id, used to pick hints
        self.clauses: dict[int, tuple[int, ...]] = {}
        if materialize:
            for i, c in enumerate(cnf.clauses, start=1):
                self.clauses[i] = tuple(c)
        self.next_id = self.input_clauses + 1
        self.refuted = False

    @property
    def metric(self) -> int:
        return self.input_clauses + self.added

    def _add(self, kind: str, lits: Sequence[int], hints: tuple[int, ...]) -> int:
        cid = self.next_id
        self.next_id += 1
        self.added += 1
        if self.max_clauses is not None and self.metric > self.max_clauses:
            raise ResourceLimit("clauses", f"{self.max_clauses} clauses")
        if not lits:
            self.refuted = True
        if self.materialize:
            clause = tuple(lits)
            self.clauses[cid] = clause
            self.steps.append(ProofStep(kind, cid, clause, hints))
        return cid

    def define(self, lits: Sequence[int]) -> int:
        return self._add("define", lits, ())

    def derive(self, lits: Sequence[int], candidates: Iterable[int | None]) -> int:
        """Add ``lits`` as a RUP clause; hints are chosen from ``candidates``."""
        hints: tuple[int, ...] = ()
        if self.materialize:
            hints = self._find_hints(lits, [c for c in candidates if c is not None])
        return self._add("derive", lits, hints)

    def _find_hints(self, lits: Sequence[int], candidates: list[int]) -> tuple[int, ...]:
        true = {-l for l in lits}
        hints = []
        pending = candidates
        progress = True
        while progress:
            progress = False
            rest = []
            for cid in pending:
                unassigned = 0
                last = 0
                satisfied = False
                for l in self.clauses[cid]:
                    if l in true:
                        satisfied = True
                        break
                    if -l not in true:
                        unassigned += 1
                        last = l
                if satisfied:
                    continue
                if unassigned == 0:
                    hints.append(cid)
                    return tuple(hints)
                if unassigned == 1:
                    true.add(last)
                    hints.append(cid)
                    progress = True
                else:
                    rest.append(cid)
            pending = rest
        raise ProofError(f"clause {list(lits)} is not RUP from candidates {candidates}")

    def delete(self, ids: Iterable[int]) -> None:
        ids = tuple(ids)
        if not ids:
            return
        self.deleted += len(ids)
        if self.materialize:
            for cid in ids:
                del self.clauses[cid]
            self.steps.append(ProofStep("delete", self.next_id - 1, (), ids))

    def to_text(self) -> str:
        return format_proof(self.steps)


def format_proof(steps: Iterable[ProofStep]) -> str:
    out = []
    for s in steps:
        if s.kind == "delete":
            out.append(f"{s.id} d {' '.join(map(str, s.hints))} 0")
        else:
            lits = " ".join(map(str, s.clause + (0,)))
            hints = " ".join(map(str, s.hints + (0,)))
            out.append(f"{s.id} {lits} {hints}")
    return "\n".join(out) + ("\n" if out else "")


def parse_proof(text: str) -> list[ProofStep]:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        toks = line.split()
        try:
            sid = int(toks[0])
            if len(toks) > 1 and toks[1] == "d":
                ids = [int(t) for t in toks[2:]]
                if not ids or ids[-1] != 0 or 0 in ids[:-1]:
                    raise ValueError("deletion must end with a single 0")
                steps.append(ProofStep("delete", sid, (), tuple(ids[:-1])))
                continue
            nums = [int(t) for t in toks[1:]]
        except (ValueError, IndexError):
            raise ProofFormatError(f"line {lineno}: malformed proof line {line!r}") from None
        if nums.count(0) != 2 or nums[-1] != 0:
            raise ProofFormatError(f"line {lineno}: expected '<id> lits 0 hints 0'")
        cut = nums.index(0)
        lits, hints = tuple(nums[:cut]), tuple(nums[cut + 1 : -1])
        if any(h < 0 for h in hints):
            raise ProofFormatError(f"line {lineno}: negative hints are not supported")
        steps.append(ProofStep("derive" if hints else "define", sid, lits, hints))
    return steps


class Justifier:
    """Builds BDDs in ``store`` while logging their justification in ``log``.

    Every node created in the store after construction is defined in the log.
    """

    def __init__(self, store: NodeStore, log: ProofLog):
        self.store = store
        self.log = log
        self.base = log.num_vars - 1
        # defining clause ids per node: (up_hi, up_lo, down_hi, down_lo)
        self.defs: list[tuple[int | None, ...]] = [(), ()]
        for k in range(2, len(store.var)):
            self.define_node(k)
        store.on_create.append(self.define_node)
        self.and_cache: dict[tuple[int, int], tuple[int, int | None]] = {}
        self.imply_cache: dict[tuple[int, int], int | None] = {}

    def ext(self, u: int) -> int:
        """Proof literal asserting node ``u``."""
        if u == L1:
            return TRUE
        if u == L0:
            return FALSE
        return self.base + u

    def define_node(self, u: int) -> tuple[int | None, ...]:
        if u != len(self.defs):
            raise ProofError(f"node {u} defined twice or out of order")
        s = self.store
        x, h, l = s.var[u], self.ext(s.hi[u]), self.ext(s.lo[u])
        e = self.base + u
        ids = []
        for lits in ((e, -x, -h), (e, x, -l), (-e, -x, h), (-e, x, l)):
            c = clean(lits)
            ids.append(None if c is None else self.log.define(c))
        self.defs.append(tuple(ids))
        return self.defs[u]

    def clause_unit(self, clause_id: int, clause: Sequence[int]) -> tuple[int, int | None]:
        """BDD for an input clause plus the unit clause asserting its root."""
        if not clause:
            return L0, self.log.derive([], [clause_id])
        chain = self.store.clause_chain(clause)
        if not chain:
            return L1, None
        root = chain[-1]
        cands = [d for k in chain for d in self.defs[k][:2]]
        cands.append(clause_id)
        return root, self.log.derive([self.ext(root)], cands)

    def _combine(self, target: list[int], x: int, hi_cands: list, lo_cands: list) -> int:
        # case split on x, then resolve the two halves
        log = self.log
        a = log.derive([-x] + target, hi_cands)
        b = log.derive([x] + target, lo_cands)
        c = log.derive(target, [a, b])
        log.delete((a, b))
        return c

    def and_(self, u: int, v: int) -> tuple[int, int | None]:
        """Return ``w = u & v`` and the id of clause (-u v -v v w), None when trivial."""
        if u == L0 or v == L0:
            return L0, None
        if u == L1 or u == v:
            return v, None
        if v == L1:
            return u, None
        if u > v:
            u, v = v, u
        key = (u, v)
        hit = self.and_cache.get(key)
        if hit is not None:
            return hit
        s = self.store
        lev = min(s.level[u], s.level[v])
        x = s.bdd_order.order[lev]
        usplit = s.level[u] == lev
        vsplit = s.level[v] == lev
        u1, u0 = (s.hi[u], s.lo[u]) if usplit else (u, u)
        v1, v0 = (s.hi[v], s.lo[v]) if vsplit else (v, v)
        w1, j1 = self.and_(u1, v1)
        w0, j0 = self.and_(u0, v0)
        w = s.make_node(x, w1, w0)
        target = clean((-self.ext(u), -self.ext(v), self.ext(w)))
        jid = None
        if target is not None:
            du, dv, dw = self.defs[u], self.defs[v], self.defs[w]
            wsplit = w > L1 and s.var[w] == x
            hi_c = [du[2] if usplit else None, dv[2] if vsplit else None, j1, dw[0] if wsplit else None]
            lo_c = [du[3] if usplit else None, dv[3] if vsplit else None, j0, dw[1] if wsplit else None]
            jid = self._combine(target, x, hi_c, lo_c)
        self.and_cache[key] = (w, jid)
        return w, jid

    def implies(self, u: int, w: int) -> int | None:
        """Id of clause (-u v w) for BDDs with u => w; None when trivial."""
        if u == w or u == L0 or w == L1:
            return None
        if u == L1 or w == L0:
            raise ProofError(f"node {u} does not imply node {w}")
        key = (u, w)
        if key in self.imply_cache:
            return self.imply_cache[key]
        s = self.store
        lev = min(s.level[u], s.level[w])
        x = s.bdd_order.order[lev]
        usplit = s.level[u] == lev
        wsplit = s.level[w] == lev
        u1, u0 = (s.hi[u], s.lo[u]) if usplit else (u, u)
        w1, w0 = (s.hi[w], s.lo[w]) if wsplit else (w, w)
        j1 = self.implies(u1, w1)
        j0 = self.implies(u0, w0)
        du, dw = self.defs[u], self.defs[w]
        hi_c = [du[2] if usplit else None, j1, dw[0] if wsplit else None]
        lo_c = [du[3] if usplit else None, j0, dw[1] if wsplit else None]
        jid = self._combine([-self.ext(u), self.ext(w)], x, hi_c, lo_c)
        self.imply_cache[key] = jid
        return jid

    def exists(self, u: int, var: int) -> tuple[int, int | None]:
        w = self.store.exists(u, var)
        return w, self.implies(u, w)


# -- checking -------------------------------------------------------------


@dataclass
class Verdict:
    accepted: bool
    step: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.accepted


@dataclass
class _Db:
    clauses: dict[int, tuple[int, ...]] = field(default_factory=dict)
    occ: dict[int, set[int]] = field(default_factory=dict)
    units: set[int] = field(default_factory=set)

    def add(self, cid: int, lits: tuple[int, ...]) -> None:
        self.clauses[cid] = lits
        for l in lits:
            self.occ.setdefault(l, set()).add(cid)
        if len(lits) == 1:
            self.units.add(cid)

    def remove(self, cid: int) -> None:
        lits = self.clauses.pop(cid)
        for l in lits:
            self.occ[l].discard(cid)
        self.units.discard(cid)

    def propagate_conflict(self, assumed: Iterable[int]) -> bool:
        """Unit propagation over all active clauses; True if a conflict arises."""
        true: set[int] = set()
        queue = []
        for l in assumed:
            if -l in true:
                return True
            if l not in true:
                true.add(l)
                queue.append(l)
        for cid in self.units:
            (l,) = self.clauses[cid]
            if -l in true:
                return True
            if l not in true:
                true.add(l)
                queue.append(l)
        while queue:
            l = queue.pop()
            for cid in self.occ.get(-l, ()):
                unassigned = None
                count = 0
                for m in self.clauses[cid]:
                    if m in true:
                        count = -1
                        break
                    if -m not in true:
                        count += 1
                        unassigned = m
                        if count > 1:
                            break
                if count == 0:
                    return True
                if count == 1:
                    true.add(unassigned)
                    queue.append(unassigned)
        return False

    def rup(self, lits: Sequence[int]) -> bool:
        return self.propagate_conflict(-l for l in lits)

    def rat(self, lits: Sequence[int]) -> bool:
        if not lits:
            return False
        pivot = lits[0]
        base = set(lits)
        for cid in list(self.occ.get(-pivot, ())):
            other = [m for m in self.clauses[cid] if m != -pivot]
            if any(-m in base for m in other):
                continue
            if not self.rup(list(base.union(other))):
                return False
        return True

    def lrat(self, lits: Sequence[int], hints: Sequence[int]) -> str | None:
        """None if the hint chain refutes the negated clause, else a reason."""
        true = {-l for l in lits}
        for h in hints:
            clause = self.clauses.get(h)
            if clause is None:
                return f"hint {h} is not an active clause"
            unassigned = None
            count = 0
            for m in clause:
                if m in true:
                    return f"hint {h} is satisfied"
                if -m not in true:
                    count += 1
                    unassigned = m
            if count == 0:
                return None
            if count > 1:
                return f"hint {h} is not unit"
            true.add(unassigned)
        return "hints end without conflict"


def check_proof(cnf: Cnf, proof: ProofLog | Sequence[ProofStep], use_hints: bool = True) -> Verdict:
    """ACCEPT iff every addition is RUP or RAT (on its first literal) and the empty clause is derived."""
    steps = proof.steps if isinstance(proof, ProofLog) else proof
    db = _Db()
    for i, c in enumerate(cnf.clauses, start=1):
        db.add(i, tuple(c))
    refuted = False
    for s in steps:
        if s.kind == "delete":
            for cid in s.hints:
                if cid not in db.clauses:
                    return Verdict(False, s.id, f"deletion of inactive clause {cid}")
                db.remove(cid)
            continue
        if s.id in db.clauses:
            return Verdict(False, s.id, "duplicate clause id")
        lits = s.clause
        if s.hints and use_hints:
            reason = db.lrat(lits, s.hints)
            if reason is not None:
                return Verdict(False, s.id, reason)
        elif s.hints:
            if not (db.rup(lits) or db.rat(lits)):
                return Verdict(False, s.id, "neither RUP nor RAT")
        elif not (db.rat(lits) or db.rup(lits)):
            return Verdict(False, s.id, "neither RAT nor RUP")
        db.add(s.id, lits)
        if not lits:
            refuted = True
    if not refuted:
        return Verdict(False, None, "no empty clause derived")
    return Verdict(True)


def clause_metric(log: ProofLog, cnf: Cnf | None = None) -> int:
    """Input clauses plus every clause added by the proof; deletions don't count."""
    inputs = len(cnf.clauses) if cnf is not None else log.input_clauses
    return inputs + log.added
