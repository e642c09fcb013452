#!/usr/bin/env python3
"""Recompute summary.json bands and final records from the trace CSVs.

Usage: recompute_summary.py OUTPUT_DIR [--tol 1e-12]
Exits non-zero and lists mismatches when any value differs by more than tol
(relative to max(1, |value|)).
"""
import argparse
import csv
import json
import math
import sys
from pathlib import Path


def read_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [float(r[i]) for r in body] for i, name in enumerate(header)}


def band(series):
    k = len(series)
    out = {"mean": [], "sd": [], "lower": [], "upper": []}
    for values in zip(*series):
        mean = math.fsum(values) / k
        sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (k - 1)) if k > 1 else 0.0
        for key, v in (("mean", mean), ("sd", sd), ("lower", mean - 2 * sd), ("upper", mean + 2 * sd)):
            out[key].append(v if math.isfinite(v) else None)
    return out


def close(a, b, tol):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--tol", type=float, default=1e-12)
    args = ap.parse_args()

    summary = json.loads((args.out_dir / "summary.json").read_text())
    problems = []
    checked = 0
    for group in summary["groups"]:
        traces = [read_trace(args.out_dir / f) for f in group["trace_files"]]
        for column, stored in group["bands"].items():
            expected = band([t[column] for t in traces])
            for key in expected:
                for i, (a, b) in enumerate(zip(stored[key], expected[key])):
                    checked += 1
                    if not close(a, b, args.tol):
                        problems.append(f"{group['label']} {column}.{key}[{i}]: summary {a} vs traces {b}")
                if len(stored[key]) != len(expected[key]):
                    problems.append(f"{group['label']} {column}.{key}: length mismatch")
        for trace, final in zip(traces, group["final"]):
            for column in ("ess", "cum_met_fraction", "min_w", "max_w", "logsumexp_w"):
                checked += 1
                if not close(final[column], trace[column][-1], args.tol):
                    problems.append(f"{group['label']} final {column}: {final[column]} vs {trace[column][-1]}")
            for column, value in final["bounds"].items():
                checked += 1
                last = trace[column][-1]
                if not close(value, last if math.isfinite(last) else None, args.tol):
                    problems.append(f"{group['label']} final {column}: {value} vs {last}")

    for p in problems:
        print("MISMATCH", p)
    print(f"checked {checked} values, {len(problems)} mismatches")
    return 1 if problems or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
