import json

import numpy as np
import pytest

from vsep.bench import BenchReport, bench_slopes, make_instance, reverify, run_bench
from vsep.errors import PreconditionError


def _rows(ns, f):
    return [{"n": n, "separator_size": f(n), "gamma_1": 1 / n, "spread_s2": None} for n in ns]


def test_slopes_recover_power_laws():
    s = bench_slopes(_rows([16, 64, 256, 1024], lambda n: 3 * np.sqrt(n)))
    assert s["separator_slope"] == pytest.approx(0.5)
    assert s["gamma_slope"] == pytest.approx(-1.0)
    assert s["spread_slope"] is None


def test_constant_metric_has_zero_slope():
    s = bench_slopes(_rows([10, 20, 30, 40], lambda n: 5))
    assert s["separator_slope"] == pytest.approx(0.0, abs=1e-12)


def test_needs_four_sizes():
    with pytest.raises(PreconditionError):
        bench_slopes(_rows([10, 20, 30], lambda n: n))


def test_unknown_family():
    with pytest.raises(PreconditionError):
        make_instance("hypercube", 16, 0)


def test_run_and_reverify(tmp_path):
    rep = run_bench("grid", [9, 16, 25, 36], seed=1, spread=True, spread_iters=30, artifacts=str(tmp_path), pipeline={"iters": 40, "trials": 8})
    assert isinstance(rep, BenchReport)
    assert len(rep.rows) == 4 and set(rep.slopes) == {"separator_slope", "gamma_slope", "spread_slope"}
    assert reverify(rep) == []
    assert all(r["separator_valid"] and r["certificates_feasible"] for r in rep.rows)
    json.dumps(rep.to_dict())
    assert rep.to_tsv().splitlines()[0].startswith("family\tn")


def test_same_seed_same_artifacts(tmp_path):
    a = run_bench("delaunay", [20], seed=3, artifacts=str(tmp_path / "a"), pipeline={"iters": 30, "trials": 4})
    b = run_bench("delaunay", [20], seed=3, artifacts=str(tmp_path / "b"), pipeline={"iters": 30, "trials": 4})
    for ra, rb in zip(a.rows, b.rows):
        for key in ra["certificate_files"]:
            with open(ra["certificate_files"][key]) as fa, open(rb["certificate_files"][key]) as fb:
                assert fa.read() == fb.read()
