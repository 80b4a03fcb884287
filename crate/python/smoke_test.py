#!/usr/bin/env python3
"""Smoke test for the abptk_py extension module.

Build the module first, then run this script from the repository root:

    cargo build -p abptk-py --release
    python3 python/smoke_test.py
"""

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    """Copy the built cdylib next to this script under the import name."""
    target = ROOT / "python" / "abptk_py.so"
    for profile in ("release", "debug"):
        built = ROOT / "target" / profile / "libabptk_py.so"
        if built.exists():
            if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
                shutil.copy2(built, target)
            sys.path.insert(0, str(target.parent))
            return
    sys.exit("libabptk_py.so not found; run: cargo build -p abptk-py --release")


stage_module()
import abptk_py as tk  # noqa: E402

P = tk.DEFAULT_PRIME


def check(name, cond):
    print(f"{name}: {'ok' if cond else 'FAIL'}")
    if not cond:
        sys.exit(1)


# polynomial round trip and arithmetic
f = tk.gen_ry(6, seed=1, prime=P)
check("ry generation", f.num_vars() == 6 and not f.is_zero())
g = tk.Poly.from_json(f.to_json())
check("poly json round trip", g == f)

# full rank under a balanced partition
part = tk.sample_equipartition(6, seed=2)
check("full rank", tk.pd_rank(f, part) == 8)

# product polynomial and block partitions
h = tk.gen_pry(8, 4, seed=3, prime=P)
db = tk.sample_db(8, 4, seed=4)
check("blockwise full rank", tk.pd_rank(h, db) == 16)

# formulas: expansion agrees with evaluation
rof = tk.random_rof(8, seed=5, prime=P)
point = [(3 * i + 1) % P for i in range(8)]
check("rof read-once", rof.is_read_once())
check("formula eval", rof.expand().eval(point) == rof.eval(point))

# depth reduction keeps the polynomial
iv = tk.random_interval_formula(8, 60, seed=6, prime=P)
red = iv.depth_reduce()
check("depth reduction", red.is_interval() and red.expand() == iv.expand())
check("depth shrinks or holds", red.depth() <= max(iv.depth(), red.depth()))

# branching programs: conversion and identity testing
abp = tk.random_strict_interval_abp(8, 40, seed=7, prime=P)
check("strict interval", abp.is_strict_interval())
ro = abp.to_roabp()
check("conversion is oblivious", ro.roabp_order() is not None)
check("conversion is exact", ro.expand() == abp.expand())

res = abp.pit()
expanded = abp.expand()
if res is None:
    check("pit zero verdict", expanded.is_zero())
else:
    mask, point = res
    check("pit witness monomial", expanded.coeff(mask) != 0)
    check("pit witness point", abp.eval(point) != 0)

# smABP family expands to a full-rank polynomial
sm = tk.gen_dmpy_smabp(6, seed=8, prime=P)
check("smabp expands", not sm.expand().is_zero())

# experiment reports are deterministic
r1, ok1 = tk.run_experiment("convert-corpus", json.dumps({"trials": 20}), P, 9)
r2, ok2 = tk.run_experiment("convert-corpus", json.dumps({"trials": 20}), P, 9)
check("experiment passes", ok1 and ok2)
check("experiment deterministic", r1 == r2)

print("all smoke tests passed")
