#!/usr/bin/env python3
"""Checks the file contract that the plotting scripts read: trajectory.csv,
ensemble.csv and meta.json as written by `llbar run`."""

import csv
import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

TRAJECTORY_COLUMNS = [
    "t", "norm_u_L2", "norm_grad_u", "norm_lap_u", "norm_u_L4",
    "norm_u_Linf", "psi", "norm_H_L2", "norm_grad_H", "quad_var",
]
TRAJECTORY_HEADER = [
    "config_hash", "preset", "beta0", "sigma_g2", "sigma_h2", "mu",
    "path_id", "seed", "noise_checksum", "status",
]
ENSEMBLE_COLUMNS = [
    "t", "paths",
    "mean_norm_u_L2_sq", "ci_norm_u_L2_sq",
    "mean_norm_u_H1_sq", "ci_norm_u_H1_sq",
    "mean_psi", "ci_psi",
    "mean_quad_var", "ci_quad_var",
]
META_KEYS = ["config_hash", "preset", "beta0", "sigma_g2", "sigma_h2", "mu", "columns", "noise_checksum", "paths"]


def read_table(path):
    header, rows = {}, []
    with open(path, newline="") as f:
        lines = f.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            header[key] = value
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [r for r in reader]
    return header, columns, rows


def check(cond, msg):
    if not cond:
        raise AssertionError(msg)


def check_number(cell, where):
    value = float(cell)
    check(math.isfinite(value), f"{where}: non-finite value {cell}")
    if cell not in ("0", "-0") and "e" not in cell and "." in cell:
        digits = cell.lstrip("-").replace(".", "").lstrip("0")
        check(len(digits) <= 17, f"{where}: more than 17 significant digits in {cell}")
    return value


def main():
    binary, out = sys.argv[1], Path(sys.argv[2])
    shutil.rmtree(out, ignore_errors=True)
    subprocess.run([binary, "run", "preset:below-curie", "--paths", "3", "--out", str(out)], check=True,
                   stdout=subprocess.DEVNULL)

    meta = json.loads((out / "meta.json").read_text())
    for key in META_KEYS:
        check(key in meta, f"meta.json lacks {key}")
    check(meta["columns"] == ",".join(TRAJECTORY_COLUMNS), "meta.json columns differ from the trajectory schema")
    check(meta["beta0"] >= 1.0, "beta0 below 1")
    check(len(meta["paths"]) == 3, "meta.json path list has the wrong length")

    times = None
    for entry in meta["paths"]:
        pid = entry["path_id"]
        header, columns, rows = read_table(out / f"path_{pid:04d}" / "trajectory.csv")
        check(list(header) == TRAJECTORY_HEADER, f"trajectory header keys {list(header)}")
        check(header["config_hash"] == meta["config_hash"], "config hash mismatch")
        check(header["noise_checksum"] == entry["noise_checksum"], "noise checksum mismatch")
        check(float(header["beta0"]) == meta["beta0"], "beta0 mismatch")
        check(columns == TRAJECTORY_COLUMNS, f"trajectory columns {columns}")
        t = [check_number(r[0], "trajectory t") for r in rows]
        for r in rows:
            check(len(r) == len(TRAJECTORY_COLUMNS), "ragged trajectory row")
            for cell in r:
                check_number(cell, "trajectory")
        check(all(b > a for a, b in zip(t, t[1:])), "trajectory times not increasing")
        times = times or t
        check(t == times, "paths recorded at different times")

    header, columns, rows = read_table(out / "ensemble.csv")
    check(columns == ENSEMBLE_COLUMNS, f"ensemble columns {columns}")
    check(header["config_hash"] == meta["config_hash"], "ensemble config hash mismatch")
    check(len(rows) == len(times), "ensemble rows do not match trajectory records")
    for r, t in zip(rows, times):
        check(float(r[0]) == t, "ensemble times differ from trajectory times")
        check(int(r[1]) == 3, "ensemble path count")
        for cell in r[2:]:
            check_number(cell, "ensemble")
        check(float(r[3]) >= 0.0, "negative confidence half-width")
    print("output schema OK")


if __name__ == "__main__":
    main()
