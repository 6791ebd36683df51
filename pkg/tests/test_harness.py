import os

import numpy as np
import pytest

from compressed_pd.harness.cli import main
from compressed_pd.harness.config import (
    TUNED_COMBOS,
    ConfigError,
    ExperimentConfig,
    combo_config,
    load_config,
    parse_config,
)
from compressed_pd.harness.data import (
    build_problem,
    export_problem,
    generate_dataset,
    load_dataset,
    save_dataset,
)
from compressed_pd.harness.runner import run_experiment, run_suite
from compressed_pd.metrics import read_records

SMALL = "problem.n = 6\nproblem.d = 5\nproblem.m_i = 30\ncompressor.k = 2\nrun.T = 10\n"


def _body(path):
    return "".join(line for line in open(path) if not line.startswith("#"))


def test_defaults():
    cfg = ExperimentConfig()
    assert (cfg.n, cfg.d, cfg.m_i, cfg.lam, cfg.mu, cfg.radius) == (20, 50, 200, 0.001, 1.0, 0.5)
    assert cfg.threshold == 1e-20
    cfg.validate()


def test_parse_config():
    cfg = parse_config(
        "# comment\n\nalgorithm.variant = alg3\ncompressor.kind = uniform\n"
        "hyper.eta = 0.46\nhyper.s0 = 0.01\nhyper.gamma = 0.99\nrun.seed = 12\n"
        "run.stop_at_threshold = true\nproblem.lambda = 1e-3\n"
    )
    assert (cfg.variant, cfg.compressor, cfg.s0, cfg.seed, cfg.stop_at_threshold) == (
        "alg3", "uniform", 0.01, 12, True,
    )
    cfg.validate()


@pytest.mark.parametrize(
    "text, match",
    [
        ("compressor.kind = gzip", "unknown compressor"),
        ("algorithm.variant = alg7", "unknown variant"),
        ("algorithm.variant = alg1", "psi"),
        ("problem.n = 0", "n must be"),
        ("compressor.kind = topk\ncompressor.k = 60", "k <= d"),
        ("graph.kind = edge_list", "graph.path"),
        ("hyper.gamma = 1.5", "gamma"),
    ],
)
def test_invalid_configs(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text).validate()


@pytest.mark.parametrize("text", ["problem.n = 2.5", "nonsense", "foo.bar = 1", "run.stop_at_threshold = maybe"])
def test_malformed_lines(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_combo_table():
    assert len(TUNED_COMBOS) == 10
    base = ExperimentConfig()
    c = combo_config(base, "alg1-unbiased_lbit")
    assert (c.alpha, c.beta, c.eta, c.psi) == (85, 5, 1.4, 0.2)
    c = combo_config(base, "alg3-uniform")
    assert (c.eta, c.s0, c.gamma) == (0.46, 0.01, 0.99)
    for name, *_ in TUNED_COMBOS:
        cfg = combo_config(base, name).validate()
        assert cfg.combo == name and not cfg.warnings()


def test_inadmissible_combination_warns(tmp_path):
    cfg = parse_config(
        SMALL + f"algorithm.variant = alg1\ncompressor.kind = uniform\nhyper.psi = 0.05\nrun.out = {tmp_path}\n"
    )
    assert cfg.warnings()
    res = run_experiment(cfg)
    assert "# warning: compressor uniform is outside" in open(res.path).read()


def test_dataset_shape_and_determinism():
    f, y = generate_dataset(20, 50, 200, seed=0)
    assert len(f) == 20 and all(z.shape == (200, 50) for z in f)
    assert sum(len(v) for v in y) == 4000
    f2, y2 = generate_dataset(20, 50, 200, seed=0)
    assert all(np.array_equal(a, b) for a, b in zip(f + y, f2 + y2))


def test_label_balance_over_seeds():
    for seed in range(100):
        _, y = generate_dataset(20, 50, 200, seed=seed, signal_scale=1.0)
        assert 0.2 < np.concatenate(y).mean() < 0.8


def test_dataset_files_round_trip(tmp_path):
    f, y = generate_dataset(3, 4, 7, seed=1)
    save_dataset(tmp_path, f, y)
    f2, y2 = load_dataset(tmp_path)
    assert all(np.array_equal(a, b) for a, b in zip(f + y, f2 + y2))


def test_table_rows_accepted_and_run(tmp_path):
    base = parse_config(SMALL + f"run.out = {tmp_path}\n")
    for name in ("alg1-unbiased_lbit", "alg3-uniform"):
        res = run_experiment(combo_config(base, name))
        assert len(res.records) == 10


def test_csv_header_round_trip(tmp_path):
    cfg = parse_config(SMALL + f"algorithm.variant = alg1\ncompressor.kind = unbiased_lbit\nhyper.psi = 0.2\nrun.seed = 77\nrun.out = {tmp_path}/a\n")
    first = run_experiment(cfg)
    again = load_config(first.path, out=str(tmp_path / "b"))
    assert again == parse_config(SMALL + f"algorithm.variant = alg1\ncompressor.kind = unbiased_lbit\nhyper.psi = 0.2\nrun.seed = 77\nrun.out = {tmp_path}/b\n")
    second = run_experiment(again)
    assert _body(first.path) == _body(second.path)


def test_suite_small(tmp_path):
    cfg = parse_config(SMALL + f"run.out = {tmp_path}\nrun.threshold = 1e-3\n")
    results, summary = run_suite(cfg)
    assert len(results) == 10
    csvs = [p for p in os.listdir(tmp_path) if p.endswith(".csv") and not p.startswith("summary")]
    assert len(csvs) == 10
    for res in results:
        assert len(read_records(res.path)) == 10
    lines = [l for l in open(summary).read().splitlines() if not l.startswith("#")]
    assert lines[0] == "combo,bits_to_threshold,reached"
    assert len(lines) == 11


def test_suite_shares_problem(tmp_path):
    cfg = parse_config(SMALL + f"run.out = {tmp_path}\n")
    results, _ = run_suite(cfg, combos=["dpda", "alg3-one_bit"])
    a, b = (r.records[0] for r in results)
    assert (a.grad_norm_sq, a.consensus_err) == (b.grad_norm_sq, b.consensus_err)


def test_suite_continues_after_failure(tmp_path):
    cfg = parse_config(SMALL + f"run.out = {tmp_path}\ngraph.rho_target = 5\nrun.T = 3000\n")
    results, summary = run_suite(cfg, combos=["dpda", "alg3-one_bit"])
    assert results[0].error
    assert len(results) == 2
    assert "dpda,,false" in open(summary).read()


def test_edge_list_graph(tmp_path):
    cfg = parse_config(SMALL + f"run.out = {tmp_path}\n")
    _, graph = export_problem(cfg, tmp_path)
    via_file = parse_config(SMALL + f"graph.kind = edge_list\ngraph.path = {graph}\n")
    a, b = build_problem(cfg)[0], build_problem(via_file)[0]
    np.testing.assert_allclose(a.adjacency, b.adjacency, rtol=1e-15)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# command line


def test_cli_run_and_determinism(tmp_path, capsys):
    cfg = _write(tmp_path, "a.cfg", SMALL + "algorithm.variant = alg2\ncompressor.kind = topk\ncompressor.k = 2\nhyper.psi = 0.05\nhyper.sigma = 0.03\n")
    assert main(["run", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "x")]) == 0
    assert main(["run", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "y")]) == 0
    name = "alg2-topk_seed3.csv"
    assert _body(tmp_path / "x" / name) == _body(tmp_path / "y" / name)


def test_cli_exit_codes(tmp_path):
    bad = _write(tmp_path, "bad.cfg", "compressor.kind = nope\n")
    assert main(["run", "--config", bad]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    diverge = _write(tmp_path, "div.cfg", SMALL.replace("run.T = 10", "run.T = 3000") + "graph.rho_target = 5\n")
    assert main(["run", "--config", diverge, "--out", str(tmp_path)]) == 2
    assert "# error:" in open(tmp_path / "dpda_seed0.csv").read()


def test_cli_suite_and_gen_data(tmp_path, capsys):
    cfg = _write(tmp_path, "s.cfg", SMALL + f"run.out = {tmp_path}/suite\n")
    assert main(["suite", "--config", cfg, "--threshold", "1e-2"]) == 0
    assert "# threshold = 0.01" in open(tmp_path / "suite" / "summary_seed0.csv").read()
    assert main(["gen-data", "--config", cfg, "--out", str(tmp_path / "data")]) == 0
    assert len(os.listdir(tmp_path / "data" / "data")) == 6
    assert (tmp_path / "data" / "graph.txt").exists()


def test_cli_verify_compressors(capsys):
    assert main(["verify-compressors", "--trials", "500"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 8
    assert main(["verify-compressors", "--trials", "0"]) == 1
