import json
import os
from pathlib import Path

import pytest

import relcheck

PROGRAMS = Path(os.environ.get("RELCHECK_PROGRAMS", Path(__file__).resolve().parents[2] / "programs"))


def source(name):
    return (PROGRAMS / name).read_text()


def test_block_bounds_remainder_goes_low():
    assert [relcheck.block_bounds(0, 9, 3, r) for r in range(3)] == [(0, 3), (4, 6), (7, 9)]


def test_checksum_is_plain_sum():
    assert relcheck.checksum([0.5, 1.5, 2.0]) == 4.0
    assert relcheck.compare_global(10.0, [4.0, 6.0], 0.0)
    assert not relcheck.compare_global(10.0, [4.0, 6.5], 0.1)


def test_errors_carry_codes():
    with pytest.raises(relcheck.RelcheckError) as info:
        relcheck.block_bounds(1, 4, 0, 0)
    assert info.value.code == "InvalidRank"


def test_analyze_lists_jacobi_edges():
    lines = relcheck.analyze(source("jacobi.mf")).splitlines()
    edge = next(l for l in lines if l.startswith("#1 "))
    assert "oldphi8(i+1,j)" in edge


def test_parallelize_then_execute_matches_serial():
    src = source("fig1.mf")
    spmd, db = relcheck.parallelize(src, "u", dim=1, nranks=4)
    assert json.loads(db)["distributions"][0]["nranks"] == 4
    serial = relcheck.execute(src)
    ranks = relcheck.execute(spmd, nranks=4)
    assert len(serial) == 1 and len(ranks) == 4


def test_run_flags_dropped_edge():
    src = source("jacobi.mf")
    ok = relcheck.run(src, ["phi2@jacobi"], "phi2@jacobi:dim1", nranks=4, tolerance=1e-12)
    assert ok["outcome"] == "NoDivergence" and ok["exit_code"] == 0 and ok["report"] is None
    bad = relcheck.run(src, ["phi2@jacobi"], "phi2@jacobi:dim1", nranks=4, drop_edges=[1])
    assert bad["outcome"] == "Divergence" and bad["exit_code"] == 1
    report = json.loads(bad["report"])
    assert report["routine"] == "update" and report["site"] == "exit"
