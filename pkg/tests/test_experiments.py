import csv
import math

import numpy as np
import pytest
from scipy import stats

from sparse_hermite.cli import read_config, run
from sparse_hermite.experiments import (
    ConfigError,
    ExperimentConfig,
    cmd_converge,
    cmd_counts,
    cmd_dimsweep,
    cmd_norms,
    fit_rate,
    gaussian_samples,
)
from sparse_hermite.lognormal import FieldConfig, h10_norm, solve_many

SMALL = dict(q=2.0, M_ref=8, n_max=12, n_mc=60, nx=64, seed=3)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- sampler and fitting ------------------------------------------------


def test_samples_depend_only_on_seed_and_index():
    a = gaussian_samples(7, 50, 4)
    b = gaussian_samples(7, 20, 4, start=30)
    np.testing.assert_array_equal(a[30:], b)
    # longer vectors extend shorter ones
    np.testing.assert_array_equal(gaussian_samples(7, 5, 9)[:, :4], a[:5])
    assert not np.array_equal(gaussian_samples(8, 5, 4), a[:5])


def test_samples_are_standard_normal():
    x = gaussian_samples(1, 4000, 3).ravel()
    assert abs(x.mean()) < 0.05
    assert abs(x.std() - 1) < 0.05
    assert stats.kstest(x, "norm").pvalue > 1e-3


def test_fit_rate_recovers_power_law():
    n = np.arange(10, 60)
    assert fit_rate(n, 3.0 * n**-1.7) == pytest.approx(1.7)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(M=10, M_ref=5)
    with pytest.raises(ConfigError):
        ExperimentConfig(algo="greedy")
    with pytest.raises(ConfigError):
        ExperimentConfig(n_mc=0)
    with pytest.raises(ConfigError):
        cmd_converge(ExperimentConfig(**{**SMALL, "seed": None}))
    assert ExperimentConfig(M_ref=12).M == 12
    assert ExperimentConfig(q=1.5, algo="apriori").tag == "apriori_q1.5"


# --- tables -------------------------------------------------------------


def test_norms_table(tmp_path):
    rows = cmd_norms(6, 6, tmp_path)
    assert len(rows) == 49
    table = {(i, nu): (u, d) for i, nu, u, d in rows}
    assert table[5, 3][0] == 1.0
    assert table[2, 3][0] == 0.0
    lines = read_rows(tmp_path / "norms.csv")
    assert lines[0] == ["i", "nu", "norm_U", "norm_Delta"]
    assert float(lines[1 + 7 * 2 + 5][2]) == table[2, 5][0]
    with pytest.raises(ConfigError):
        cmd_norms(65, 3)


def test_counts_table(tmp_path):
    rows = cmd_counts("hc", 3, 4, tmp_path)
    assert rows[0] == (1, 1, 1, 1)
    assert all(exact <= bound for _, _, exact, bound in rows)
    td = cmd_counts("td", 1, 5)
    assert [r[2] for r in td] == [1, 3, 5, 9, 13, 19]
    assert read_rows(tmp_path / "counts.csv")[0] == ["w", "n_indices", "n_points", "bound"]
    with pytest.raises(ConfigError):
        cmd_counts("box", 2, 3)


# --- convergence --------------------------------------------------------


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("conv")
    return cmd_converge(ExperimentConfig(**SMALL, out=str(out))), out


def test_converge_outputs(small_run):
    res, out = small_run
    names = sorted(p.name for p in out.iterdir())
    assert names == ["bestnterm.csv", "converge_aposteriori_q2.csv", "rates_aposteriori_q2.csv"]
    rows = read_rows(out / "converge_aposteriori_q2.csv")
    assert rows[0] == ["N", "n_indices", "n_points", "n_points_extended", "error", "n_active"]
    assert len(rows) == 1 + SMALL["n_max"]
    assert float(rows[1][4]) == res.records[0].error
    rates = read_rows(out / "rates_aposteriori_q2.csv")
    assert rates[0] == ["measure", "rate", "fit_start", "fit_end"]
    assert {r[0] for r in rates[1:]} == {"n_indices", "n_points", "n_points_extended"}
    assert res.fit_window == (7, 12)
    assert len(res.best_n_term) == SMALL["n_max"]


def test_converge_records_are_monotone(small_run):
    res, _ = small_run
    recs = res.records
    for a, b in zip(recs, recs[1:]):
        assert b.N == a.N + 1 == b.n_indices
        assert b.n_points >= a.n_points
        assert b.n_points_extended >= a.n_points_extended >= 0
        assert b.n_active >= a.n_active
    assert recs[-1].n_active <= SMALL["M_ref"]


def test_first_error_is_distance_to_mean_solution(small_run):
    res, _ = small_run
    X = gaussian_samples(SMALL["seed"], SMALL["n_mc"], SMALL["M_ref"])
    cfg = FieldConfig(q=SMALL["q"], M=SMALL["M_ref"], nx=SMALL["nx"])
    u = solve_many(cfg, X)
    u0 = solve_many(cfg, np.zeros((1, SMALL["M_ref"])))[0]
    expect = np.mean(h10_norm(u - u0))
    assert res.records[0].error == pytest.approx(expect, rel=1e-12)


def test_error_matches_direct_collocation(small_run):
    from sparse_hermite.collocation import build

    res, _ = small_run
    lam = res.state.lambda_at(res.records[-1].N)
    sc = build(lam, res.state.store)
    X = gaussian_samples(SMALL["seed"], SMALL["n_mc"], SMALL["M_ref"])
    cfg = FieldConfig(q=SMALL["q"], M=SMALL["M_ref"], nx=SMALL["nx"])
    direct = np.mean(h10_norm(solve_many(cfg, X) - sc.evaluate_many(X)))
    assert res.records[-1].error == pytest.approx(direct, rel=1e-8)


def test_apriori_run(tmp_path):
    res = cmd_converge(ExperimentConfig(**{**SMALL, "algo": "apriori", "out": str(tmp_path)}))
    assert res.best_n_term is None
    assert "n_points_extended" not in res.rates
    assert (tmp_path / "converge_apriori_q2.csv").exists()
    assert all(r.n_points == r.n_points_extended for r in res.records)


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cmd_converge(ExperimentConfig(**SMALL, out=str(a)))
    cmd_converge(ExperimentConfig(**SMALL, out=str(b)))
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_samples_shared_across_n_max(small_run):
    res, _ = small_run
    shorter = cmd_converge(ExperimentConfig(**{**SMALL, "n_max": 6}))
    assert [r.error for r in shorter.records] == [r.error for r in res.records[:6]]


def test_dimsweep(tmp_path):
    base = ExperimentConfig(q=2.0, seed=1, n_mc=200, n_max=20, M_ref=20, nx=256, out=str(tmp_path))
    res = cmd_dimsweep(base, [10, 20])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["dimsweep_M10.csv", "dimsweep_M20.csv"]
    small, big = res[10], res[20]
    single = cmd_converge(base.replace(M=10, M_ref=10, out=None))
    assert small.records[0].error == single.records[0].error
    # same index sequence until the smaller run has used all of its dimensions
    saturated = next(r.N for r in small.records if r.n_active == 10)
    assert small.state.order[:saturated] == big.state.order[:saturated]
    # superposed curves during the first half of the activation phase
    for a, b in zip(small.records, big.records):
        if a.n_active <= 5:
            assert 1 / 1.5 <= b.error / a.error <= 1.5


# --- CLI ----------------------------------------------------------------


def test_cli_counts(tmp_path, capsys):
    assert run(["counts", "--family", "td", "--M", "1", "--wmax", "3", "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.split("\n")[:2] == ["0 1 1 1", "1 2 3 3"]
    assert (tmp_path / "counts.csv").exists()


def test_cli_norms_with_plots(tmp_path):
    assert run(["norms", "--imax", "3", "--numax", "3", "--out", str(tmp_path), "--emit-plots"]) == 0
    assert "norms.csv" in (tmp_path / "norms.gp").read_text()


def test_cli_config_file_and_precedence(tmp_path, capsys):
    conf = tmp_path / "run.cfg"
    conf.write_text(
        "# small run\nq = 3\nmref = 6\nnmax = 5\nnmc = 20\nnx = 32\nseed = 4\nalgo = apriori\n"
    )
    assert read_config(conf)["q"] == 3.0
    out = tmp_path / "out"
    assert run(["converge", "--config", str(conf), "--q", "2", "--out", str(out), "--emit-plots"]) == 0
    assert (out / "converge_apriori_q2.csv").exists()
    assert "converge_apriori_q2.csv" in (out / "converge_apriori_q2.gp").read_text()
    assert len(read_rows(out / "converge_apriori_q2.csv")) == 6
    assert "rate vs n_indices" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    assert run(["converge", "--mref", "4", "--nmax", "3", "--nx", "16", "--out", str(tmp_path)]) == 1
    assert "seed" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        run(["converge", "--bogus"])
    assert info.value.code == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["norms", "--config", str(bad)]) == 1
    assert run(["counts", "--family", "box"]) == 1
    # sigma large enough that exp(log a) overflows at the outer Gauss-Hermite nodes
    args = ["converge", "--sigma", "2000", "--q", "1", "--mref", "2", "--nmax", "8",
            "--nmc", "5", "--nx", "16", "--seed", "1", "--out", str(tmp_path)]
    assert run(args) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_cli_dimsweep(tmp_path, capsys):
    args = ["dimsweep", "--M", "2,3", "--nmax", "4", "--nmc", "10", "--nx", "32", "--seed", "2",
            "--out", str(tmp_path), "--emit-plots"]
    assert run(args) == 0
    assert {p.name for p in tmp_path.iterdir()} == {"dimsweep_M2.csv", "dimsweep_M3.csv", "dimsweep.gp"}
    assert capsys.readouterr().out.count("final error") == 2


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "sparse_hermite", "counts", "--family", "hc",
                           "--M", "2", "--wmax", "2"], capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "1 1 1 1"
    assert math.isclose(float(proc.stdout.splitlines()[1].split()[2]), 5)
