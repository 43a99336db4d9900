"""Deterministic report files: one JSON per suite plus CSV probe dumps.

Nothing time-dependent is written into a file; the run directory name is
the only place a timestamp appears.
"""
from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

from .errors import MissingReports

EXIT_OK = 0
EXIT_HARD_FAILURE = 1
EXIT_DRIFT = 2


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def csv_text(rows) -> str:
    """CSV with a header row; columns follow first appearance across rows."""
    cols = []
    for row in rows:
        for k in row:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
    wr.writeheader()
    for row in rows:
        wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def new_run_dir(root) -> Path:
    """A fresh timestamped subdirectory of `root` (suffixed if the name is taken)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    path = root / stamp
    k = 1
    while path.exists():
        path = root / f"{stamp}-{k}"
        k += 1
    path.mkdir()
    return path


def write_suite(run_dir: Path, result, config: dict) -> list[Path]:
    run_dir = Path(run_dir)
    report = {"suite": result.suite, "config": config, "checks": [c.row() for c in result.checks],
              "exit_status": exit_status([result])}
    paths = [run_dir / f"{result.suite}.json"]
    paths[0].write_text(dumps(report), encoding="utf-8")
    for name, rows in sorted(result.tables.items()):
        if not rows:
            continue
        p = run_dir / f"{result.suite}_{name}.csv"
        p.write_text(csv_text(rows), encoding="utf-8")
        paths.append(p)
    return paths


def exit_status(results) -> int:
    checks = [c for r in results for c in r.checks if c.kind != "info"]
    if any(c.kind == "hard" and not c.passed for c in checks):
        return EXIT_HARD_FAILURE
    if any(not c.passed for c in checks):
        return EXIT_DRIFT
    return EXIT_OK


def latest_run(root) -> Path:
    """The newest run directory under `root`, or `root` itself if it holds reports."""
    root = Path(root)
    if not root.is_dir():
        raise MissingReports(f"no report directory at {root}")
    if any(root.glob("*.json")):
        return root
    runs = sorted(p for p in root.iterdir() if p.is_dir() and any(p.glob("*.json")))
    if not runs:
        raise MissingReports(f"no reports under {root}")
    return runs[-1]


def load_rows(run_dir) -> list[dict]:
    rows = []
    for path in sorted(Path(run_dir).glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        if "checks" not in data:
            continue
        for row in data["checks"]:
            rows.append({"suite": data.get("suite", path.stem), **row})
    if not rows:
        raise MissingReports(f"no check rows in {run_dir}")
    return rows


def summary_table(rows) -> str:
    """Plain-text table: suite, check, status, value, tolerance, anchor."""
    head = ("suite", "check", "status", "value", "tolerance", "anchor")
    body = []
    for r in rows:
        v = r["value"]
        body.append((r["suite"], r["check"], r["status"].upper() if r["status"] != "pass" else "pass",
                     f"{v:.4g}" if isinstance(v, float) else str(v), f"{r['tolerance']:.3g}", r["anchor"]))
    widths = [max(len(h), *(len(b[k]) for b in body)) for k, h in enumerate(head[:-1])]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head[:-1], widths)) + "  " + head[-1]]
    for b in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(b[:-1], widths)) + "  " + b[-1])
    return "\n".join(lines)
