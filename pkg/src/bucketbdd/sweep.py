"""Proof-size scaling sweeps over pigeonhole instances."""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import asdict, dataclass, fields
from typing import Callable, Iterable

from .cnf import gen_php, ordering
from .proof import check_proof
from .solver import SolveOptions, Verdict, combo_orders, solve

COMBOS = ("PP", "HH", "PH", "HP")
WORKERS_ENV = "BUCKETBDD_WORKERS"


@dataclass
class SweepConfig:
    ns: tuple[int, ...]
    combos: tuple[str, ...] = ("PH", "HP")
    max_clauses: int = 10**7
    time_limit: float | None = 600.0
    max_nodes: int | None = None
    check_upto: int = 8
    pick: str = "smallest"
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        self.ns = tuple(sorted(set(self.ns)))
        self.combos = tuple(self.combos)
        if not self.combos:
            raise ValueError("no ordering combos given")
        for c in self.combos:
            if c not in COMBOS:
                raise ValueError(f"unknown combo {c!r}; expected one of {', '.join(COMBOS)}")
        if not self.ns or self.ns[0] < 1:
            raise ValueError("n values must be positive")
        for name in ("max_clauses", "time_limit", "max_nodes"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ValueError(f"{name} must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @classmethod
    def from_range(cls, start: int, stop: int, step: int = 1, **kw) -> SweepConfig:
        if step < 1:
            raise ValueError("step must be positive")
        return cls(tuple(range(start, stop + 1, step)), **kw)


@dataclass
class SweepRow:
    combo: str
    n: int
    verdict: str
    clause_metric: int
    nodes_created: int
    max_live_nodes: int
    time_ms: float
    proof_checked: bool
    cap: str = ""


FIELDS = [f.name for f in fields(SweepRow)]
TIMING_FIELDS = ("time_ms",)


def run_point(combo: str, n: int, config: SweepConfig) -> SweepRow:
    cnf, layout = gen_php(n)
    orders = {"P": ordering(layout, "pigeon-major"), "H": ordering(layout, "hole-major")}
    bdd_order, bucket_order = combo_orders(combo, orders)
    check = n <= config.check_upto
    opts = SolveOptions(
        proof="full" if check else "count",
        pick=config.pick,
        max_nodes=config.max_nodes,
        max_clauses=config.max_clauses,
        time_limit=config.time_limit,
    )
    res = solve(cnf, bdd_order, bucket_order, opts)
    checked = False
    if check and res.verdict is Verdict.UNSAT:
        checked = check_proof(cnf, res.proof).accepted
    st = res.stats
    return SweepRow(
        combo, n, res.verdict.value, st.clause_metric or 0, st.nodes_created,
        st.max_live_nodes, st.time_ms, checked, res.cap or "",
    )


def _skipped(combo: str, n: int) -> SweepRow:
    return SweepRow(combo, n, Verdict.INDETERMINATE.value, 0, 0, 0, 0.0, False, "skipped")


def _sort_rows(rows: Iterable[SweepRow], config: SweepConfig) -> list[SweepRow]:
    rank = {c: i for i, c in enumerate(config.combos)}
    return sorted(rows, key=lambda r: (rank[r.combo], r.n))


def run_sweep(config: SweepConfig, progress: Callable[[SweepRow], None] | None = None) -> list[SweepRow]:
    """Run each combo for ascending n; once a cap fires the remaining n are skipped.

    Combos run concurrently when ``config.workers > 1``.  Rows come back in
    (combo, n) order regardless of completion order.
    """
    rows: list[SweepRow] = []
    pending = {c: list(config.ns) for c in config.combos}

    def finished(row: SweepRow) -> int | None:
        rows.append(row)
        if progress:
            progress(row)
        queue = pending[row.combo]
        if row.verdict == Verdict.INDETERMINATE.value:
            for n in queue:
                rows.append(_skipped(row.combo, n))
            queue.clear()
        return queue.pop(0) if queue else None

    try:
        if config.workers == 1:
            for combo in config.combos:
                n = pending[combo].pop(0)
                while n is not None:
                    n = finished(run_point(combo, n, config))
        else:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                futures = {}
                for combo in config.combos:
                    n = pending[combo].pop(0)
                    futures[pool.submit(run_point, combo, n, config)] = combo
                while futures:
                    done, _ = wait(futures, return_when=FIRST_COMPLETED)
                    for fut in done:
                        combo = futures.pop(fut)
                        n = finished(fut.result())
                        if n is not None:
                            futures[pool.submit(run_point, combo, n, config)] = combo
    finally:
        rows[:] = _sort_rows(rows, config)
        if config.output:
            write_csv(rows, config.output)
    return rows


def rows_to_csv(rows: Iterable[SweepRow], drop: Iterable[str] = ()) -> str:
    drop = set(drop)
    cols = [f for f in FIELDS if f not in drop]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        d = asdict(r)
        writer.writerow([d[c] for c in cols])
    return buf.getvalue()


def write_csv(rows: Iterable[SweepRow], path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(rows_to_csv(rows))
    os.replace(tmp, path)


def read_csv(path: str) -> list[SweepRow]:
    with open(path, encoding="utf-8") as f:
        out = []
        for d in csv.DictReader(f):
            out.append(SweepRow(
                d["combo"], int(d["n"]), d["verdict"], int(d["clause_metric"]),
                int(d["nodes_created"]), int(d["max_live_nodes"]), float(d["time_ms"]),
                d["proof_checked"] == "True", d.get("cap", ""),
            ))
        return out


def loglog_slope(points: Iterable[tuple[int, int]]) -> float:
    """Least-squares slope of ln(metric) against ln(n)."""
    pts = list(points)
    xs = [math.log(n) for n, _ in pts]
    ys = [math.log(m) for _, m in pts]
    return statistics.linear_regression(xs, ys).slope


def summarize(rows: Iterable[SweepRow], min_points: int = 4) -> dict[str, dict]:
    """Per combo: completed points, first capped n, and log-log slope over all completed points."""
    out: dict[str, dict] = {}
    for r in rows:
        s = out.setdefault(r.combo, {"completed": [], "capped_at": None, "cap": None, "slope": None})
        if r.verdict in (Verdict.UNSAT.value, Verdict.SAT.value):
            s["completed"].append((r.n, r.clause_metric))
        elif s["capped_at"] is None and r.cap != "skipped":
            s["capped_at"], s["cap"] = r.n, r.cap
    for s in out.values():
        if len(s["completed"]) >= min_points:
            s["slope"] = loglog_slope(s["completed"])
    return out


def summary_text(summary: dict[str, dict]) -> str:
    lines = []
    for combo, s in summary.items():
        done = s["completed"]
        top = f"n<={done[-1][0]}" if done else "none"
        slope = f"{s['slope']:.3f}" if s["slope"] is not None else "n/a"
        capped = f" capped at n={s['capped_at']} ({s['cap']})" if s["capped_at"] is not None else ""
        lines.append(f"{combo}: completed {len(done)} points ({top}), log-log slope {slope}{capped}")
    return "\n".join(lines) + "\n"


def gnuplot_table(rows: Iterable[SweepRow]) -> str:
    """One data block per combo (``n clause_metric``), blocks separated for gnuplot ``index``."""
    blocks: dict[str, list[str]] = {}
    for r in rows:
        if r.verdict in (Verdict.UNSAT.value, Verdict.SAT.value):
            blocks.setdefault(r.combo, []).append(f"{r.n} {r.clause_metric}")
    return "\n\n\n".join(f"# {combo}\n" + "\n".join(lines) for combo, lines in blocks.items()) + "\n"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1
