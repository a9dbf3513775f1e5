"""Command line: ``bucketbdd {solve,gen,check,sweep}``.

Exit codes: solve returns 10 (SAT), 20 (UNSAT) or 0 (caps fired); check
returns 0 (ACCEPT) or 1 (REJECT); 2 signals I/O, format or usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .cnf import DimacsError, PhpLayout, Permutation, gen_php, gen_php_satisfiable, ordering, parse_dimacs, serialize_dimacs
from .proof import ProofFormatError, check_proof, parse_proof
from .solver import PICK_POLICIES, SolveOptions, Verdict, model_line, solve
from .sweep import COMBOS, SweepConfig, default_workers, gnuplot_table, run_sweep, summarize, summary_text

log = logging.getLogger("bucketbdd")

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 10, 20, 0, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def _layout_for(num_vars: int, php_n: int | None) -> PhpLayout:
    if php_n is not None:
        if php_n < 1 or num_vars % php_n:
            raise UsageError(f"--php-n {php_n} does not divide {num_vars} variables")
        return PhpLayout(php_n, num_vars // php_n)
    for n in range(1, num_vars + 1):
        if n * (n + 1) == num_vars:
            return PhpLayout(n, n + 1)
        if n * n == num_vars:
            return PhpLayout(n, n)
    raise UsageError("cannot infer pigeonhole layout; pass --php-n")


def _order(source: str | None, num_vars: int, php_n: int | None) -> Permutation:
    if source is None:
        return Permutation.identity(num_vars)
    if source in ("pigeon-major", "hole-major"):
        return ordering(_layout_for(num_vars, php_n), source)
    try:
        perm = Permutation.from_text(_read(source))
    except ValueError as e:
        raise UsageError(f"{source}: {e}") from None
    if len(perm) != num_vars:
        raise UsageError(f"{source}: ordering has {len(perm)} variables, formula has {num_vars}")
    return perm


def cmd_solve(args) -> int:
    try:
        cnf = parse_dimacs(_read(args.cnf))
    except DimacsError as e:
        raise UsageError(f"{args.cnf}: {e}") from None
    bdd_src, bucket_src = args.bdd_order, args.bucket_order
    if args.combo:
        names = {"P": "pigeon-major", "H": "hole-major"}
        bucket_src, bdd_src = names[args.combo[0]], names[args.combo[1]]
    bdd_order = _order(bdd_src, cnf.num_vars, args.php_n)
    bucket_order = _order(bucket_src, cnf.num_vars, args.php_n) if bucket_src else bdd_order
    if args.no_proof:
        mode = "off"
    else:
        mode = "full" if (args.proof or args.check) else "count"
    opts = SolveOptions(
        proof=mode, pick=args.pick, max_nodes=args.max_nodes,
        max_clauses=args.max_clauses, time_limit=args.time_limit,
    )
    res = solve(cnf, bdd_order, bucket_order, opts)
    status = {Verdict.SAT: "SATISFIABLE", Verdict.UNSAT: "UNSATISFIABLE"}.get(res.verdict, "UNKNOWN")
    print(f"s {status}")
    if res.cap:
        print(f"c cap fired: {res.cap}")
    record = f"verdict={res.verdict.value} " + res.stats.record()
    print(f"c stats {record}")
    if args.stats:
        try:
            with open(args.stats, "a") as f:
                f.write(record + "\n")
        except OSError as e:
            raise UsageError(f"cannot write {args.stats}: {e.strerror}") from None
    if res.verdict is Verdict.SAT:
        line = model_line(res.model, cnf.num_vars)
        print(line)
        if args.model:
            _write(args.model, line + "\n")
        return EXIT_SAT
    if res.verdict is Verdict.UNSAT:
        if res.proof is not None and res.proof.materialize:
            if args.proof:
                _write(args.proof, res.proof.to_text())
            if args.check:
                verdict = check_proof(cnf, res.proof)
                print(f"c proof {'ACCEPT' if verdict else 'REJECT'}")
        return EXIT_UNSAT
    return EXIT_UNKNOWN


def cmd_gen(args) -> int:
    if args.n < 1:
        raise UsageError("n must be at least 1")
    cnf, layout = (gen_php if args.kind == "php" else gen_php_satisfiable)(args.n)
    stem = f"{args.kind}{args.n}"
    cnf_path = args.cnf or f"{stem}.cnf"
    pm_path = args.pigeon_major or f"{stem}.pigeon-major"
    hm_path = args.hole_major or f"{stem}.hole-major"
    _write(cnf_path, serialize_dimacs(cnf))
    _write(pm_path, ordering(layout, "pigeon-major").to_text())
    _write(hm_path, ordering(layout, "hole-major").to_text())
    print(f"c wrote {cnf_path} ({cnf.num_vars} variables, {len(cnf.clauses)} clauses), {pm_path}, {hm_path}")
    return 0


def cmd_check(args) -> int:
    try:
        cnf = parse_dimacs(_read(args.cnf))
        steps = parse_proof(_read(args.proof))
    except (DimacsError, ProofFormatError) as e:
        raise UsageError(str(e)) from None
    verdict = check_proof(cnf, steps, use_hints=not args.no_hints)
    if verdict:
        print("s ACCEPT")
        return 0
    where = f" at step {verdict.step}" if verdict.step is not None else ""
    print(f"s REJECT{where}: {verdict.reason}")
    return 1


def cmd_sweep(args) -> int:
    try:
        combos = tuple(c.strip().upper() for c in args.combos.split(",") if c.strip())
        config = SweepConfig.from_range(
            args.n_start, args.n_stop, args.n_step, combos=combos,
            max_clauses=args.max_clauses, time_limit=args.time_limit, max_nodes=args.max_nodes,
            check_upto=args.check_upto, pick=args.pick, output=args.out, workers=args.workers,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None

    def progress(row):
        log.info("%s n=%d %s metric=%d %.0fms %s", row.combo, row.n, row.verdict, row.clause_metric, row.time_ms, row.cap)

    rows = run_sweep(config, progress)
    summary = summarize(rows)
    sys.stdout.write(summary_text(summary))
    if args.summary:
        _write(args.summary, json.dumps(summary, indent=2) + "\n")
    if args.gnuplot:
        _write(args.gnuplot, gnuplot_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bucketbdd", description="BDD bucket elimination SAT solver with proofs")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a DIMACS CNF file")
    s.add_argument("cnf")
    s.add_argument("--bdd-order", help="ordering file, or pigeon-major / hole-major")
    s.add_argument("--bucket-order", help="ordering file, or pigeon-major / hole-major (default: BDD order)")
    s.add_argument("--combo", choices=COMBOS, help="named orders: bucket letter then BDD letter")
    s.add_argument("--php-n", type=int, help="hole count for named orders")
    s.add_argument("--proof", help="write an LRAT-style proof here on UNSAT")
    s.add_argument("--no-proof", action="store_true", help="disable proof generation and clause counting")
    s.add_argument("--check", action="store_true", help="check the generated proof before exiting")
    s.add_argument("--stats", help="append the key=value stats record to this file")
    s.add_argument("--model", help="write the model line here on SAT")
    s.add_argument("--pick", choices=PICK_POLICIES, default="smallest")
    s.add_argument("--max-nodes", type=int)
    s.add_argument("--max-clauses", type=lambda t: int(float(t)))
    s.add_argument("--time-limit", type=float)
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="write a pigeonhole CNF and both orderings")
    g.add_argument("kind", choices=("php", "php-sat"))
    g.add_argument("n", type=int)
    g.add_argument("--cnf")
    g.add_argument("--pigeon-major")
    g.add_argument("--hole-major")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="check a proof against a CNF")
    c.add_argument("cnf")
    c.add_argument("proof")
    c.add_argument("--no-hints", action="store_true", help="ignore hints and use full unit propagation")
    c.set_defaults(func=cmd_check)

    w = sub.add_parser("sweep", help="proof-size scaling sweep over PHP_n")
    w.add_argument("--combos", default="PH,HP")
    w.add_argument("--n-start", type=int, default=4)
    w.add_argument("--n-stop", type=int, default=20)
    w.add_argument("--n-step", type=int, default=2)
    w.add_argument("--max-clauses", type=lambda t: int(float(t)), default=10**7)
    w.add_argument("--max-nodes", type=int)
    w.add_argument("--time-limit", type=float, default=600.0, help="seconds per point")
    w.add_argument("--check-upto", type=int, default=8, help="check proofs for n up to this")
    w.add_argument("--pick", choices=PICK_POLICIES, default="smallest")
    w.add_argument("--out", default="sweep.csv")
    w.add_argument("--summary", help="write the per-combo summary as JSON")
    w.add_argument("--gnuplot", help="write gnuplot-ready data blocks")
    w.add_argument("--workers", type=int, default=default_workers())
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
