"""Brute-force reference computations, independent of the package under test.

Every assignment of V variables is one bit of a 2**V-bit integer, so a
clause is an OR of variable masks and a formula an AND of clause masks.
"""

from itertools import product


def var_masks(num_vars):
    n = 1 << num_vars
    full = (1 << n) - 1
    masks = [0]
    for v in range(1, num_vars + 1):
        half = 1 << (v - 1)
        m = ((1 << half) - 1) << half
        width = 2 * half
        while width < n:
            m |= m << width
            width *= 2
        masks.append(m & full)
    return masks, full


def formula_mask(num_vars, clauses):
    masks, full = var_masks(num_vars)
    acc = full
    for c in clauses:
        cm = 0
        for lit in c:
            cm |= masks[lit] if lit > 0 else full ^ masks[-lit]
        acc &= cm
    return acc


def is_sat(num_vars, clauses):
    return formula_mask(num_vars, clauses) != 0


def count_models(num_vars, clauses):
    return bin(formula_mask(num_vars, clauses)).count("1")


def models(num_vars, clauses):
    """All satisfying assignments as dicts (small V only)."""
    out = []
    for bits in product((False, True), repeat=num_vars):
        a = dict(zip(range(1, num_vars + 1), bits))
        if all(any(a[abs(l)] == (l > 0) for l in c) for c in clauses):
            out.append(a)
    return out


def assignments(variables):
    variables = list(variables)
    for bits in product((False, True), repeat=len(variables)):
        yield dict(zip(variables, bits))


def clause_value(clause, a):
    return any(a[abs(l)] == (l > 0) for l in clause)


def cnf_value(clauses, a):
    return all(clause_value(c, a) for c in clauses)
