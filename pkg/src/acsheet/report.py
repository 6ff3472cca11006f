"""CSV tables and plain-text summaries, written by one aggregator."""

import csv
import math
import os

import numpy as np


def fmt(v):
    """17 significant digits for floats, so tables round-trip exactly."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path, rows):
    rows = list(rows)
    header = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(r.get(k, "")) for k in header])
    return len(rows)


def write_report(out_dir, command, verdicts, cfg_text, extra_tables=None):
    """One CSV per table plus summary.txt; returns the list of paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    tables = dict(extra_tables or {})
    for v in verdicts:
        tables.update(v.tables)
    for name in sorted(tables):
        path = os.path.join(out_dir, f"{name}.csv")
        write_csv(path, tables[name])
        written.append(path)
    lines = [f"command: {command}", ""]
    lines += [v.line() for v in verdicts]
    n_pass = sum(v.passed for v in verdicts)
    lines += ["", f"{n_pass}/{len(verdicts)} criteria passed", "", "# configuration", cfg_text.rstrip(), ""]
    path = os.path.join(out_dir, "summary.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
    written.append(path)
    return written
