"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import time

import pytest

from probgsp.selftest import CHECKS

# Wall-clock budget per criterion in seconds (None: no limit).
LIMITS = {1: 5, 2: 10, 3: 1, 4: 10, 5: 10, 6: 10, 7: 30, 8: 10, 9: 60, 10: 300, 11: None}


@pytest.mark.parametrize("cid, name, fn", CHECKS, ids=[f"{c[0]:02d}-{c[1]}" for c in CHECKS])
def test_criterion(cid, name, fn, capsys):
    t0 = time.perf_counter()
    passed, detail = fn()
    seconds = time.perf_counter() - t0
    limit = LIMITS[cid]
    in_time = limit is None or seconds < limit
    ok = passed and in_time
    budget = "" if limit is None else f" (limit {limit}s)"
    with capsys.disabled():
        print(f"\ncriterion {cid:2d} {name}: {'PASS' if ok else 'FAIL'} in {seconds:.2f}s{budget}: {detail}")
    assert passed, detail
    assert in_time, f"took {seconds:.2f}s, limit {limit}s"
