import dataclasses
import random

import pytest

from bucketbdd.bdd import L0, L1, NodeStore
from bucketbdd.cnf import Cnf, Permutation, gen_php, ordering, random_kcnf, random_permutation
from bucketbdd.proof import (
    FALSE,
    TRUE,
    Justifier,
    ProofError,
    ProofFormatError,
    ProofLog,
    ProofStep,
    check_proof,
    clause_metric,
    clean,
    format_proof,
    parse_proof,
)
from bucketbdd.solver import combo_orders, solve
from oracle import assignments, cnf_value, is_sat


def setup(num_vars, clauses=(), order=None):
    cnf = Cnf(num_vars, list(clauses))
    perm = Permutation(tuple(order)) if order else Permutation.identity(num_vars)
    store = NodeStore(perm)
    log = ProofLog(cnf)
    return cnf, store, log, Justifier(store, log)


def steps_valid(cnf, log):
    """All steps check; the log need not be a refutation."""
    v = check_proof(cnf, log)
    return v.accepted or (v.step is None and v.reason == "no empty clause derived")


def def_clauses(log, j, u):
    return [log.clauses[i] for i in j.defs[u] if i is not None]


def test_clean():
    assert clean([3, FALSE, 3, -4]) == [3, -4]
    assert clean([3, TRUE]) is None
    assert clean([3, -3]) is None
    assert clean([FALSE]) == []


def test_define_literal_node():
    cnf, s, log, j = setup(1)
    u = s.literal(1)
    e = j.ext(u)
    assert sorted(map(sorted, def_clauses(log, j, u))) == sorted([sorted([e, -1]), sorted([-e, 1])])
    for a in assignments([1, e]):
        assert cnf_value(def_clauses(log, j, u), a) == (a[e] == a[1])


def test_define_and_node():
    cnf, s, log, j = setup(2)
    v = s.literal(2)
    u = s.make_node(1, v, L0)
    eu, ev = j.ext(u), j.ext(v)
    # down clause on the hi side keeps its x literal: (-u v -x v v) rather than (-u v v)
    assert len(def_clauses(log, j, u)) == 3
    for a in assignments([1, ev, eu]):
        assert cnf_value(def_clauses(log, j, u), a) == (a[eu] == (a[1] and a[ev]))


def test_define_matches_ite_on_random_nodes():
    rng = random.Random(5)
    cnf, s, log, j = setup(5)
    for _ in range(30):
        c = tuple(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, 6), 3))
        s.clause_to_bdd(c)
    for u in range(2, len(s.var)):
        x, hi, lo = s.var[u], s.hi[u], s.lo[u]
        ext = {k: j.ext(k) for k in (u, hi, lo) if k > L1}
        for a in assignments([x] + list(ext.values())):
            def val(k):
                return k == L1 if k <= L1 else a[ext[k]]
            expected = a[ext[u]] == (val(hi) if a[x] else val(lo))
            assert cnf_value(def_clauses(log, j, u), a) == expected


def test_definitions_resolve_to_tautologies():
    cnf, _ = gen_php(3)
    res = solve(cnf, proof="full")
    defs = [s for s in res.proof.steps if s.kind == "define"]
    groups = {}
    for s in defs:
        groups.setdefault(abs(s.clause[0]), []).append(s.clause)
    for e, clauses in groups.items():
        assert e > cnf.num_vars
        pos = [c for c in clauses if c[0] == e]
        neg = [c for c in clauses if c[0] == -e]
        for a in pos:
            for b in neg:
                rest = set(a[1:]) | set(b[1:])
                assert any(-l in rest for l in rest)


def test_double_definition_rejected():
    cnf, s, log, j = setup(1)
    u = s.literal(1)
    with pytest.raises(ProofError):
        j.define_node(u)


def test_clause_chain_unit_propagates():
    cnf, s, log, j = setup(2, [(1, 2)])
    root, uid = j.clause_unit(1, (1, 2))
    assert s.node_count(root) == 2
    step = log.steps[-1]
    assert step.id == uid and step.clause == (j.ext(root),)
    assert 1 in step.hints
    assert steps_valid(cnf, log)


def test_justify_and_idempotent():
    cnf, s, log, j = setup(2)
    u = s.clause_to_bdd((1, 2))
    before = log.added
    assert j.and_(u, u) == (u, None)
    assert log.added == before


def test_justify_and_two_literals():
    cnf, s, log, j = setup(2)
    u, v = s.literal(1), s.literal(2)
    w, jid = j.and_(u, v)
    assert w == s.and_(u, v)
    assert log.clauses[jid] == (-j.ext(u), -j.ext(v), j.ext(w))
    # split on x1: both children are terminal cases, then the hi/lo halves and their resolvent
    derived = [st for st in log.steps if st.kind == "derive"]
    assert len(derived) == 3
    assert steps_valid(cnf, log)


def test_justify_and_agrees_with_plain_apply():
    rng = random.Random(11)
    for _ in range(20):
        order = list(range(1, 7))
        rng.shuffle(order)
        cnf, s, log, j = setup(6, order=order)
        roots = []
        for _ in range(4):
            c = tuple(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, 7), 3))
            roots.append(s.clause_to_bdd(c))
        acc = roots[0]
        for r in roots[1:]:
            w, _ = j.and_(acc, r)
            assert w == s.and_(acc, r)
            acc = w
        assert steps_valid(cnf, log)


def test_justify_exists():
    cnf, s, log, j = setup(2)
    both = s.and_(s.literal(1), s.literal(2))
    w, jid = j.exists(both, 2)
    assert w == s.literal(1)
    assert log.clauses[jid] == (-j.ext(both), j.ext(w))
    assert steps_valid(cnf, log)
    # quantifying to L1 or over an absent variable needs nothing
    assert j.exists(s.clause_to_bdd((1, 2)), 1) == (L1, None)
    x1 = s.literal(1)
    assert j.exists(x1, 2) == (x1, None)


def test_php1_pipeline_accepts():
    cnf, _ = gen_php(1)
    res = solve(cnf, proof="full")
    assert res.proof.steps[-1].clause == ()
    assert check_proof(cnf, res.proof)


def php2_proof(combo="HP"):
    cnf, layout = gen_php(2)
    orders = {"P": ordering(layout, "pigeon-major"), "H": ordering(layout, "hole-major")}
    bdd_order, bucket_order = combo_orders(combo, orders)
    return cnf, solve(cnf, bdd_order, bucket_order, proof="full").proof


def test_missing_empty_clause_rejected():
    cnf, log = php2_proof()
    steps = [s for s in log.steps if s.clause != () or s.kind == "delete"]
    v = check_proof(cnf, steps)
    assert not v and v.reason == "no empty clause derived"


def test_corrupted_hint_rejected_at_that_step():
    cnf, log = php2_proof()
    steps = list(log.steps)
    idx = next(i for i, s in enumerate(steps) if s.kind == "derive" and len(s.hints) >= 2)
    bad = steps[idx]
    hints = list(bad.hints)
    hints[0] = hints[1]
    steps[idx] = dataclasses.replace(bad, hints=tuple(hints))
    v = check_proof(cnf, steps)
    assert not v and v.step == bad.id


def test_deleting_inactive_clause_rejected():
    cnf, log = php2_proof()
    steps = list(log.steps) + [ProofStep("delete", 999, (), (10**6,))]
    assert check_proof(cnf, steps).step == 999


@pytest.mark.parametrize("combo", ["PP", "HH", "PH", "HP"])
def test_every_single_literal_flip_rejected(combo):
    cnf, log = php2_proof(combo)
    flips = 0
    for i, s in enumerate(log.steps):
        if s.kind != "derive":
            continue
        for p in range(len(s.clause)):
            lits = list(s.clause)
            lits[p] = -lits[p]
            mutated = log.steps[:i] + [dataclasses.replace(s, clause=tuple(lits))] + log.steps[i + 1 :]
            assert not check_proof(cnf, mutated), (s, p)
            flips += 1
    assert flips > 100


def test_clause_metric():
    cnf, _ = gen_php(2)
    log = ProofLog(cnf)
    assert clause_metric(log, cnf) == 9
    ids = [log.define([10 + k]) for k in range(5)]
    log.delete(ids[:2])
    assert clause_metric(log, cnf) == 9 + 5 == log.metric


def test_count_mode_matches_full_metric():
    for n in (2, 3, 4):
        cnf, layout = gen_php(n)
        v, b = ordering(layout, "pigeon-major"), ordering(layout, "hole-major")
        full = solve(cnf, v, b, proof="full")
        count = solve(cnf, v, b, proof="count")
        assert full.stats.clause_metric == count.stats.clause_metric
        assert count.proof.steps == []


def test_text_round_trip():
    cnf, log = php2_proof()
    text = log.to_text()
    steps = parse_proof(text)
    assert format_proof(steps) == text
    assert check_proof(cnf, steps)
    assert [s.clause for s in steps] == [s.clause for s in log.steps]


@pytest.mark.parametrize("text", ["x 1 0 0\n", "5 1 2 0\n", "5 1 0 -3 0\n", "7 d 1 2\n"])
def test_malformed_proof_text(text):
    with pytest.raises(ProofFormatError):
        parse_proof(text)


def test_hints_and_full_propagation_agree():
    rng = random.Random(3)
    logs = []
    for _ in range(40):
        nv = rng.randint(3, 9)
        cnf = random_kcnf(nv, rng.randint(nv, 6 * nv), 3, rng)
        res = solve(cnf, random_permutation(nv, rng), random_permutation(nv, rng), proof="full")
        if res.proof is not None:
            logs.append((cnf, res.proof.steps))
    cnf, log = php2_proof()
    logs.append((cnf, log.steps))
    # broken variants must be judged the same way too
    logs.append((cnf, log.steps[:-1]))
    for cnf, steps in logs:
        assert bool(check_proof(cnf, steps)) == bool(check_proof(cnf, steps, use_hints=False))


def test_accepted_proofs_only_for_unsat():
    rng = random.Random(17)
    for _ in range(150):
        nv = rng.randint(2, 16)
        cnf = random_kcnf(nv, rng.randint(1, 5 * nv), 3, rng)
        res = solve(cnf, random_permutation(nv, rng), random_permutation(nv, rng), proof="full")
        unsat = not is_sat(nv, cnf.clauses)
        if res.proof is not None:
            assert unsat and check_proof(cnf, res.proof)
        else:
            assert not unsat
