#!/usr/bin/env python3
"""Per-component PC coverage of the maximal configuration and greedy cover sizes.

Given a BusyBox source tree, extracts the presence conditions of each
component file, runs the maximal and iterative-maximal generators and prints
one row per component:

    component  #PC  maximal #PC  maximal %PC  #configs  PCs per config

Usage:
    python scripts/busybox_tables.py /path/to/busybox-1.36.0
    python scripts/busybox_tables.py TREE --components editors/sed.c coreutils/ls.c
    python scripts/busybox_tables.py TREE --expected numbers.json   # adds a diff column

``--expected`` takes a JSON object ``{component: {"pcs": n, "maximal_pcs": n,
"configs": n}}`` and reports (does not assert) agreement.  This scanner sees
``#if`` blocks of the component file only; headers and Kconfig-derived
constraints are not followed, so counts are expected to differ from a
an extractor that follows headers and build constraints.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from varconf.extract import ExtractError, extract
from varconf.generate import maximal, maximal_iterative
from varconf.metrics import LCU_COST

EDITORS = ["awk", "cmp", "diff", "ed", "patch", "sed"]
COREUTILS = ["cat", "chown", "cp", "df", "echo", "expand", "head", "ls"]
DEFAULT_COMPONENTS = ([f"editors/{c}.c" for c in EDITORS]
                      + [f"coreutils/{c}.c" for c in COREUTILS])


def component_row(path: Path, fm=None) -> dict:
    t0 = time.perf_counter()
    pcmap = extract([str(path)], fm)
    total = len(pcmap.entries)
    row = {"component": path.stem, "file": str(path), "pcs": total,
           "units": pcmap.total_units}
    if total == 0:
        row.update(maximal_pcs=0, maximal_pct=0.0, configs=0, cover_pcs=[])
    else:
        best = maximal(pcmap, LCU_COST)
        cover = maximal_iterative(pcmap, LCU_COST)
        row.update(maximal_pcs=len(best.enabled),
                   maximal_pct=round(100.0 * len(best.enabled) / total, 2),
                   configs=len(cover),
                   cover_pcs=[len(r.enabled) for r in cover])
    row["seconds"] = round(time.perf_counter() - t0, 3)
    return row


def format_table(rows, expected=None) -> str:
    head = f"{'component':<14}{'#PC':>6}{'max #PC':>9}{'max %PC':>9}{'#cfg':>6}  PCs per config"
    if expected:
        head += "   expected (#PC/max/#cfg)"
    out = [head, "-" * len(head)]
    for r in rows:
        line = (f"{r['component']:<14}{r['pcs']:>6}{r['maximal_pcs']:>9}"
                f"{r['maximal_pct']:>9.2f}{r['configs']:>6}  "
                + ", ".join(map(str, r["cover_pcs"])))
        exp = (expected or {}).get(r["component"])
        if exp:
            line = f"{line:<{len(head) - 26}}   " + "/".join(
                str(exp.get(k, "?")) for k in ("pcs", "maximal_pcs", "configs"))
        out.append(line)
    return "\n".join(out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tree", help="source tree root")
    ap.add_argument("--components", nargs="+", default=DEFAULT_COMPONENTS,
                    help="component files relative to the tree")
    ap.add_argument("--fm", help="feature model file (one formula per line)")
    ap.add_argument("--expected", help="JSON with reference numbers to print alongside")
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args(argv)

    root = Path(args.tree)
    rows = []
    for rel in args.components:
        path = root / rel
        if not path.is_file():
            print(f"skipping {rel}: not found", file=sys.stderr)
            continue
        try:
            rows.append(component_row(path, args.fm))
        except ExtractError as exc:
            print(f"skipping {rel}: {exc}", file=sys.stderr)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        expected = json.loads(Path(args.expected).read_text()) if args.expected else None
        print(format_table(rows, expected))
    return 0 if rows else 1


if __name__ == "__main__":
    sys.exit(main())
