import numpy as np
import pytest

from ipursuit.errors import DomainError
from ipursuit.experiments import (
    SweepCell,
    cluster_sweep_cells,
    fig_cluster_cells,
    fig_intersection_cells,
    intersection_sweep_cells,
    run_sweep,
    theory_check_synthetic,
)
from ipursuit.solver import SolverConfig

FAST = SolverConfig(primal_tol=1e-4, dual_tol=1e-4, max_iters=1000)


class TestSweepCells:
    def test_intersection_grid(self):
        cells = intersection_sweep_cells(60, 10, [10, 20])
        assert [c.s for c in cells] == [10, 20]
        assert [c.m for c in cells] == [12, 22]
        assert [c.shat for c in cells] == [5, 15]
        assert all(c.param == "s" and c.K == 10 for c in cells)
        for c in cells:
            c.validate()

    def test_cluster_grid(self):
        cells = cluster_sweep_cells(60, 40, 42, [5, 6], 35)
        assert [c.K for c in cells] == [5, 6]
        assert all(c.param == "K" and c.value == c.K for c in cells)
        for c in cells:
            c.validate()

    def test_preset_shapes(self):
        a = fig_intersection_cells()
        assert len(a) == 31
        assert a[0].s == 10 and a[-1].s == 40
        assert all(c.m == c.s + 2 for c in a)
        b = fig_cluster_cells()
        assert [c.K for c in b] == [5, 6, 7, 8, 9, 10]
        assert all(c.s == 40 and c.m == 42 and c.shat == 35 for c in b)

    def test_validate_rejects_overfull(self):
        with pytest.raises(DomainError):
            SweepCell("s", 2, 5, 4, 4, 2, 0).validate()
        with pytest.raises(DomainError):
            SweepCell("s", 2, 10, 1, 4, 2, 0).validate()
        with pytest.raises(DomainError):
            SweepCell("s", 2, 10, 2, 4, 2, -1).validate()


class TestRunSweep:
    CELLS = [SweepCell("s", 1, 12, 2, 3, 1, 1)]

    def test_row_structure(self):
        rows = run_sweep(self.CELLS, n_per_cluster=6, trials=2, seed=0,
                         config=FAST)
        assert [r["method"] for r in rows] == ["plain", "enhanced"]
        for r in rows:
            assert 0.0 <= r["mean_accuracy"] <= 1.0
            assert r["std_accuracy"] >= 0.0
            assert r["trials"] == 2
            assert r["n_per_cluster"] == 6

    def test_deterministic(self):
        a = run_sweep(self.CELLS, n_per_cluster=6, trials=2, seed=1, config=FAST)
        b = run_sweep(self.CELLS, n_per_cluster=6, trials=2, seed=1, config=FAST)
        assert a == b

    def test_worker_count_does_not_change_results(self):
        serial = run_sweep(self.CELLS, n_per_cluster=6, trials=2, seed=2,
                           config=FAST, workers=1)
        parallel = run_sweep(self.CELLS, n_per_cluster=6, trials=2, seed=2,
                             config=FAST, workers=2)
        assert serial == parallel

    def test_zero_drop_duplicates_plain(self):
        cells = [SweepCell("s", 1, 12, 2, 3, 1, 0)]
        rows = run_sweep(cells, n_per_cluster=6, trials=2, seed=3, config=FAST)
        assert rows[0]["mean_accuracy"] == rows[1]["mean_accuracy"]

    def test_validation(self):
        with pytest.raises(DomainError):
            run_sweep(self.CELLS, trials=0)
        with pytest.raises(DomainError):
            run_sweep(self.CELLS, n_per_cluster=0)


class TestTheoryCheckSynthetic:
    def test_record_shape(self):
        record = theory_check_synthetic(20, 3, 4, 2, 10, kappa=0.6, seed=0,
                                        config=FAST)
        assert record["config"]["M"] == 20
        assert record["config"]["kappa"] == 0.6
        report = record["report"]
        assert report["n_points"] == 30
        assert 0.0 <= report["accuracy"] <= 1.0
        assert report["alignment_bound"] is not None

    def test_deterministic(self):
        a = theory_check_synthetic(20, 3, 4, 2, 8, seed=5, config=FAST)
        b = theory_check_synthetic(20, 3, 4, 2, 8, seed=5, config=FAST)
        assert a == b

    def test_needs_two_points(self):
        with pytest.raises(DomainError):
            theory_check_synthetic(20, 3, 4, 2, 1)
