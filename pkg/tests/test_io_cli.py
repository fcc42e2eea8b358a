import csv
import datetime as dt
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from pottsbeta import io as pio
from pottsbeta.benchmark import COLUMNS, loglog_slope, run_benchmark
from pottsbeta.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_OK, ORACLE_COLUMNS, main, oracle_rows
from pottsbeta.inference import ConfigError, FitConfig
from pottsbeta.lattice import build_lattice
from pottsbeta.mixture import default_priors
from pottsbeta.potts import LabelField
from pottsbeta.simulate import SimSpec, simulate, simulate_replicate

dims_st = st.one_of(st.tuples(st.integers(1, 6), st.integers(1, 6)),
                    st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4)))


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (Path(out.strip()) if code == EXIT_OK else None), err


# --------------------------------------------------------------------------
# file formats


@given(dims_st.flatmap(lambda d: st.tuples(st.just(d), hnp.arrays(
    float, int(np.prod(d)), elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))),
    st.booleans())
def test_image_round_trip(tmp_path_factory, case, binary):
    dims, values = case
    path = tmp_path_factory.mktemp("img") / ("im.bin" if binary else "im.txt")
    pio.save_image(path, pio.ImageFile(dims, values))
    back = pio.load_image(path)
    assert back.dims == dims
    np.testing.assert_array_equal(back.values, values)


@given(dims_st, st.integers(2, 9), st.integers(0, 2**31))
def test_label_round_trip(tmp_path_factory, dims, k, seed):
    labels = np.random.default_rng(seed).integers(0, k, size=int(np.prod(dims)))
    path = tmp_path_factory.mktemp("lab") / "labels.txt"
    pio.save_labels(path, dims, labels)
    back = pio.load_labels(path, k)
    assert back.dims == dims
    np.testing.assert_array_equal(back.values, labels)
    assert int(path.read_text().splitlines()[1].split()[0]) == labels[0] + 1


def test_image_text_layout(tmp_path):
    pio.save_image(tmp_path / "a.txt", pio.ImageFile((2, 3), [0.5, 1, 2, 3, 4, 5]))
    assert (tmp_path / "a.txt").read_text() == "dims: 2 3\n0.5 1.0 2.0\n3.0 4.0 5.0\n"


@pytest.mark.parametrize("text", ["dims: 2 2\n1 2 3\n", "size: 2 2\n1 2 3 4\n", "dims: 2 x\n1 2\n",
                                  "dims: 1 2\n1 nan\n", "dims: 4\n1 2 3 4\n", "dims: 1 2\n1 abc\n"])
def test_image_parse_errors(tmp_path, text):
    (tmp_path / "bad.txt").write_text(text)
    with pytest.raises(ValueError):
        pio.load_image(tmp_path / "bad.txt")


def test_label_errors(tmp_path):
    (tmp_path / "l.txt").write_text("dims: 1 3\n1 2 4\n")
    with pytest.raises(ValueError):
        pio.load_labels(tmp_path / "l.txt", 3)
    (tmp_path / "l.txt").write_text("dims: 1 3\n0 1 2\n")
    with pytest.raises(ValueError):
        pio.load_labels(tmp_path / "l.txt", 3)
    (tmp_path / "l.txt").write_text("dims: 1 3\n1 1.5 2\n")
    with pytest.raises(ValueError):
        pio.load_labels(tmp_path / "l.txt")


def test_save_rejects_nonfinite(tmp_path):
    with pytest.raises(ValueError):
        pio.save_image(tmp_path / "x.txt", pio.ImageFile((1, 2), [1.0, np.inf]))


def test_config_defaults_and_echo_round_trip():
    cfg, priors = pio.build_config({})
    assert cfg == FitConfig()
    assert priors.k == 3
    text = pio.config_text(cfg, priors)
    assert [line.split()[0] for line in text.splitlines()] == list(pio.CONFIG_KEYS)
    assert all("#" in line for line in text.splitlines())
    cfg2, priors2 = pio.build_config(pio.parse_config_text(text))
    assert cfg2 == cfg
    np.testing.assert_array_equal(priors2.mean, priors.mean)


def test_config_custom_round_trip(tmp_path):
    src = ("method = abc  # comment\niterations = 300\nburn_in = 100\nprior_beta = 0 1.5\nabc_epsilon = 2.5\n"
           "k = 2\nprior_mean = 0.1 0.9\nprior_sd = 0.2\nupdate_beta = no\n")
    (tmp_path / "c.txt").write_text(src)
    cfg, priors = pio.load_config(tmp_path / "c.txt")
    assert (cfg.method, cfg.iterations, cfg.prior_beta, cfg.abc_epsilon, cfg.update_beta) == \
        ("ABC", 300, (0.0, 1.5), 2.5, False)
    again = pio.build_config(pio.parse_config_text(pio.config_text(cfg, priors)))
    assert again[0] == cfg
    np.testing.assert_array_equal(again[1].sd, [0.2, 0.2])


@pytest.mark.parametrize("text", ["colour = red\n", "method PL\n", "iterations = ten\n", "prior_beta = 1\n",
                                  "k = 2\n", "update_beta = maybe\n", "method = EM\n", "prior_sd = -1\n"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        pio.build_config(pio.parse_config_text(text))


def test_run_directory_unique(tmp_path):
    now = dt.datetime(2024, 6, 11, 9, 30, 0)
    a = pio.run_directory(tmp_path, "fit", 4, now)
    b = pio.run_directory(tmp_path, "fit", 4, now)
    assert a.name == "fit-20240611-093000-seed4"
    assert b.name == "fit-20240611-093000-seed4-1"
    assert a.is_dir() and b.is_dir()


# --------------------------------------------------------------------------
# simulation


def test_zero_interval_gives_uniform_field():
    spec = SimSpec((20, 20), k=3, prior_beta=(0.0, 0.0), priors=default_priors(3), replicates=30, seed=1)
    reps = simulate(spec)
    lat = build_lattice((20, 20))
    stats = np.array([r.stat for r in reps], dtype=float)
    assert all(r.beta == 0.0 for r in reps)
    se = math.sqrt(lat.edge_count * (1 / 3) * (2 / 3) / len(reps))
    assert abs(stats.mean() - lat.edge_count / 3) < 3 * se


def test_replicate_depends_on_seed_and_index_only():
    spec = SimSpec((8, 8), k=3, prior_beta=(0.0, 1.3), priors=default_priors(3), replicates=3, seed=5)
    a = simulate_replicate(spec, 2)
    b = simulate(spec)[2]
    np.testing.assert_array_equal(a.y, b.y)
    assert a.beta == b.beta
    lat = build_lattice((8, 8))
    assert a.stat == LabelField(a.labels, 3, lat).stat


def test_simspec_validation():
    with pytest.raises(ValueError):
        SimSpec((8, 8), k=3, prior_beta=(0, 1), priors=default_priors(3), replicates=0)
    with pytest.raises(ValueError):
        SimSpec((8, 8), k=2, prior_beta=(0, 1), priors=default_priors(3))


# --------------------------------------------------------------------------
# command line


def test_cli_simulate_deterministic_across_workers(tmp_path, capsys):
    args = ["simulate", "--dims", "8", "8", "--replicates", "3", "--sw-steps", "50", "--seed", "3"]
    code, a, _ = _run(args + ["--out", str(tmp_path / "a")], capsys)
    assert code == EXIT_OK
    code, b, _ = _run(args + ["--out", str(tmp_path / "b"), "--workers", "2"], capsys)
    assert code == EXIT_OK
    names = sorted(p.relative_to(a).as_posix() for p in a.rglob("*") if p.is_file())
    assert "replicate_000/image.txt" in names and "truth.csv" in names and "spec.json" in names
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    truth = json.loads((a / "replicate_001" / "truth.json").read_text())
    spec = json.loads((a / "spec.json").read_text())
    assert 0 <= truth["beta"] <= spec["prior_beta"][1] == pytest.approx(1.3 * 1.005)


def test_cli_simulate_binary(tmp_path, capsys):
    code, root, _ = _run(["simulate", "--dims", "4", "5", "--replicates", "1", "--sw-steps", "5", "--binary",
                          "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    img = pio.load_image(root / "replicate_000" / "image.bin")
    assert img.dims == (4, 5)
    assert (root / "replicate_000" / "image.bin.hdr").read_text() == "dims: 4 5\n"


@pytest.fixture
def small_image(tmp_path, capsys):
    code, root, _ = _run(["simulate", "--dims", "8", "8", "--replicates", "2", "--sw-steps", "50", "--seed", "1",
                          "--out", str(tmp_path / "sim")], capsys)
    assert code == EXIT_OK
    return root


def test_cli_fit_pl_smoke(tmp_path, capsys, small_image):
    code, root, _ = _run(["fit", str(small_image / "replicate_000" / "image.txt"), "--method", "PL",
                          "--iterations", "400", "--burnin", "200", "--prior-beta", "0", "1.3065",
                          "--out", str(tmp_path / "fit")], capsys)
    assert code == EXIT_OK
    summary = json.loads((root / "summary.json").read_text())
    lo, hi = summary["beta"]["hpd_95"]
    assert 0 <= lo <= hi <= 1.3065
    assert summary["config"]["abc_epsilon"] == pytest.approx(1.12)
    assert summary["dims"] == [8, 8]
    cfg, _ = pio.load_config(root / "config.txt")
    assert cfg.iterations == 400 and cfg.prior_beta == (0.0, 1.3065)
    header = (root / "trace.csv").read_text().splitlines()[0]
    assert header == "iteration,beta,stat,accepted,mu_1,mu_2,mu_3,sigma2_1,sigma2_2,sigma2_3"
    assert pio.load_labels(root / "segmentation.txt", 3).dims == (8, 8)


def test_cli_fit_deterministic(tmp_path, capsys, small_image):
    base = ["fit", str(small_image / "replicate_000" / "image.txt"), str(small_image / "replicate_001" / "image.txt"),
            "--method", "MAVM", "--iterations", "60", "--burnin", "20", "--aux-sweeps", "20", "--seed", "4"]
    outs = []
    for i, workers in enumerate(("1", "1", "2")):
        code, root, _ = _run(base + ["--workers", workers, "--out", str(tmp_path / str(i))], capsys)
        assert code == EXIT_OK
        outs.append(root)
    for sub in ("000_image", "001_image"):
        traces = [(r / sub / "trace.csv").read_bytes() for r in outs]
        assert traces[0] == traces[1] == traces[2]
        configs = [(r / sub / "config.txt").read_bytes() for r in outs]
        assert configs[0] == configs[1] == configs[2]


def test_cli_rerun_from_echoed_config(tmp_path, capsys, small_image):
    image = str(small_image / "replicate_000" / "image.txt")
    code, first, _ = _run(["fit", image, "--iterations", "50", "--burnin", "10", "--seed", "9",
                           "--out", str(tmp_path / "a")], capsys)
    assert code == EXIT_OK
    code, second, _ = _run(["fit", image, "--config", str(first / "config.txt"), "--out", str(tmp_path / "b")],
                           capsys)
    assert code == EXIT_OK
    assert (first / "trace.csv").read_bytes() == (second / "trace.csv").read_bytes()


def test_cli_fit_ti_without_grid(tmp_path, capsys, small_image):
    out = tmp_path / "fit"
    code, _, err = _run(["fit", str(small_image / "replicate_000" / "image.txt"), "--method", "TI",
                         "--out", str(out)], capsys)
    assert code == EXIT_CONFIG
    assert "precompute" in err
    assert not out.exists()


def test_cli_precompute_then_ti(tmp_path, capsys, small_image):
    image = str(small_image / "replicate_000" / "image.txt")
    code, groot, _ = _run(["precompute", "--image", image, "--k", "3", "--beta-max", "1.35", "--sweeps", "10",
                           "--burn", "5", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    grid = groot / "grid.csv"
    assert grid.read_text().startswith("# dims: 8 8\n# k: 3\n")
    code, root, _ = _run(["fit", image, "--method", "TI", "--grid", str(grid), "--iterations", "100",
                          "--burnin", "50", "--prior-beta", "0", "1.3", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    assert (root / "trace.csv").exists()
    code, _, err = _run(["fit", image, "--method", "TI", "--grid", str(grid), "--iterations", "100",
                         "--burnin", "50", "--prior-beta", "0", "2", "--out", str(tmp_path)], capsys)
    assert code == EXIT_CONFIG and "prior support" in err


def test_cli_fit_observed_labels(tmp_path, capsys, small_image):
    code, root, _ = _run(["fit", "--labels", str(small_image / "replicate_000" / "labels.txt"), "--iterations",
                          "200", "--burnin", "50", "--prior-beta", "0", "1.3", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    truth = json.loads((small_image / "replicate_000" / "truth.json").read_text())
    stats = {int(r["stat"]) for r in csv.DictReader(open(root / "trace.csv"))}
    assert stats == {truth["stat"]}


@pytest.mark.parametrize("argv", [
    ["fit"],
    ["fit", "missing.txt"],
    ["fit", "x.txt", "--config", "nowhere.cfg"],
    ["fit", "x.txt", "--iterations", "10", "--burnin", "20"],
    ["simulate", "--dims", "4", "--replicates", "1"],
    ["simulate", "--dims", "4", "4", "--replicates", "0"],
    ["oracle", "--dims", "2", "2", "--betas", "-1"],
    ["precompute", "--dims", "4", "4", "--step", "0"],
    ["benchmark", "--sizes", "1"],
])
def test_cli_config_errors(tmp_path, capsys, argv):
    code, _, err = _run(argv + ["--out", str(tmp_path)], capsys)
    assert code == EXIT_CONFIG
    assert err.startswith("error:")


def test_cli_oracle(tmp_path, capsys):
    code, root, _ = _run(["oracle", "--dims", "3", "4", "--k", "3", "--betas", "0", "0.5", "2",
                          "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.reader(open(root / "oracle.csv")))
    assert tuple(rows[0]) == ORACLE_COLUMNS
    beta0 = [float(v) for v in rows[1]]
    assert beta0[1] == pytest.approx(17 / 3, rel=1e-12) and beta0[3] == pytest.approx(beta0[1], rel=1e-10)
    assert beta0[5] == pytest.approx(12 * math.log(3))
    top = [float(v) for v in rows[3]]
    assert top[3] < top[1]


def test_cli_oracle_budget(tmp_path, capsys):
    code, _, err = _run(["oracle", "--dims", "6", "6", "--k", "3", "--out", str(tmp_path)], capsys)
    assert code == EXIT_BUDGET
    assert "sites" in err


def test_oracle_transition_steeper_for_larger_lattice():
    betas = np.linspace(0, 2, 41)
    curves = {}
    for dims in ((2, 2), (3, 4)):
        lat = build_lattice(dims)
        rows = oracle_rows(dims, 3, betas)
        curves[dims] = np.array([r[1] for r in rows]) / lat.edge_count
    slope = {d: np.max(np.diff(c)) for d, c in curves.items()}
    assert slope[(3, 4)] > slope[(2, 2)]


def test_cli_benchmark_smoke(tmp_path, capsys):
    code, root, _ = _run(["benchmark", "--sizes", "8", "12", "--methods", "PL", "MAVM", "--iterations", "20",
                          "--aux-sweeps", "5", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.reader(open(root / "benchmark.csv")))
    assert tuple(rows[0]) == COLUMNS
    assert len(rows) == 5


def test_benchmark_aux_cost_dominance():
    rows = run_benchmark([24], ["PL", "MAVM"], iterations=100, aux_sweeps=1, repeats=3)
    pl, mavm = rows
    assert mavm.auxiliary_seconds < mavm.elapsed_seconds
    # a single auxiliary sweep costs about one label sweep, so MAVM stays within a small factor of PL
    assert mavm.elapsed_seconds < 4 * pl.elapsed_seconds
    assert loglog_slope(run_benchmark([16, 32], ["PL"], iterations=50), "PL") > 0


@pytest.mark.parametrize("name,k", [("synthetic_k3.cfg", 3), ("satellite_k6.cfg", 6), ("ct_k9.cfg", 9)])
def test_example_configs_load(name, k):
    cfg, priors = pio.load_config(Path(__file__).parents[1] / "configs" / name)
    assert priors.k == k
    assert cfg.prior_beta[0] == 0.0
