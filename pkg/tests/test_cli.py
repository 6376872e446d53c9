import csv

import pytest
from click.testing import CliRunner

from adasub import generate_coverage, save_instance
from adasub.cli import main
from adasub.instances import (
    complementarity_counterexample,
    dumps_instance,
)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def instance_a_path(tmp_path, prior_a):
    # serialize the two-item fixture through the instance machinery
    from adasub.instances import Instance
    inst = Instance(2, 2, prior_a,
                    {"type": "coverage", "weights": [1.0, 1.0],
                     "covers": [[[0], [0, 1]], [[], [1]]]},
                    __import__("adasub").CardinalityConstraint(2))
    path = tmp_path / "a.json"
    save_instance(inst, path)
    return str(path)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestGen:
    def test_writes_instance(self, runner, tmp_path):
        out = tmp_path / "inst.json"
        res = runner.invoke(main, ["gen", "--n", "6", "--seed", "3", "--k", "2",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert out.read_text() == dumps_instance(generate_coverage(6, 2, 8, 0.3, seed=3, k=2))

    def test_partition_gen(self, runner, tmp_path):
        out = tmp_path / "inst.json"
        res = runner.invoke(main, ["gen", "--n", "6", "--seed", "3",
                                   "--groups", "0,1,2;3,4,5", "--limits", "1,2",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output


class TestRun:
    def test_greedy_attains_optimum_on_instance_a(self, runner, instance_a_path, tmp_path):
        out = tmp_path / "run.csv"
        res = runner.invoke(main, ["run", "--instance", instance_a_path,
                                   "--policy", "greedy(k=2)",
                                   "--policy", "asg(k=2,eps=0.01)",
                                   "--policy", "random(k=2)",
                                   "--seed", "5", "--replicates", "20",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        rows = read_rows(out)
        assert [r["policy"] for r in rows] == ["greedy", "asg", "random", "oracle"]
        greedy = rows[0]
        assert float(greedy["ratio"]) == pytest.approx(1.0)
        assert float(greedy["f_avg"]) == pytest.approx(1.75)

    def test_empty_policy_list_gives_header_only(self, runner, instance_a_path, tmp_path):
        out = tmp_path / "run.csv"
        res = runner.invoke(main, ["run", "--instance", instance_a_path,
                                   "--seed", "5", "--out", str(out)])
        assert res.exit_code == 0
        assert read_rows(out) == []

    def test_unknown_policy_is_usage_error(self, runner, instance_a_path, tmp_path):
        res = runner.invoke(main, ["run", "--instance", instance_a_path,
                                   "--policy", "frobnicate(k=2)",
                                   "--seed", "5", "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 2
        assert "frobnicate" in res.output

    def test_reproducible_modulo_wall_time(self, runner, instance_a_path, tmp_path):
        outs = []
        for name in ("r1.csv", "r2.csv"):
            out = tmp_path / name
            res = runner.invoke(main, ["run", "--instance", instance_a_path,
                                       "--policy", "asg(k=2,eps=0.1)",
                                       "--seed", "9", "--replicates", "30",
                                       "--out", str(out)])
            assert res.exit_code == 0, res.output
            with open(out) as fh:
                outs.append([line.rsplit(",", 1)[0] for line in fh])
        assert outs[0] == outs[1]


class TestVerify:
    def test_clean_instance_exits_zero(self, runner, instance_a_path):
        res = runner.invoke(main, ["verify", "--instance", instance_a_path,
                                   "--checks", "monotone,submodular,fully"])
        assert res.exit_code == 0, res.output
        assert "PASS" in res.output

    def test_counterexample_exits_one_with_witness(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        save_instance(complementarity_counterexample(), path)
        res = runner.invoke(main, ["verify", "--instance", str(path),
                                   "--checks", "submodular"])
        assert res.exit_code == 1
        assert "FAIL" in res.output
        assert "psi2" in res.output

    def test_over_cap_exits_three(self, runner, tmp_path):
        path = tmp_path / "big.json"
        save_instance(generate_coverage(9, 2, 4, 0.2, seed=0), path)
        res = runner.invoke(main, ["verify", "--instance", str(path),
                                   "--checks", "fully"])
        assert res.exit_code == 3

    def test_unknown_check_is_usage_error(self, runner, instance_a_path):
        res = runner.invoke(main, ["verify", "--instance", instance_a_path,
                                   "--checks", "bogus"])
        assert res.exit_code == 2


class TestOracle:
    def test_reports_value_and_nodes(self, runner, instance_a_path):
        res = runner.invoke(main, ["oracle", "--instance", instance_a_path])
        assert res.exit_code == 0, res.output
        assert "value 1.75" in res.output
        assert "nodes_expanded" in res.output

    def test_too_large_exits_three(self, runner, tmp_path):
        path = tmp_path / "big.json"
        save_instance(generate_coverage(11, 2, 4, 0.2, seed=0), path)
        res = runner.invoke(main, ["oracle", "--instance", str(path)])
        assert res.exit_code == 3


class TestBench:
    def test_asg_counts_against_caps(self, runner, tmp_path):
        out = tmp_path / "bench.csv"
        res = runner.invoke(main, ["bench", "--policy", "asg", "--n", "100",
                                   "--k", "10", "--eps", "0.1",
                                   "--seed", "0", "--out", str(out)])
        assert res.exit_code == 0, res.output
        row = read_rows(out)[0]
        assert int(row["delta_measured"]) <= int(row["delta_cap"]) == 240
        assert int(row["naive_evals"]) == 1000

    def test_greedy_exhausts_pool(self, runner, tmp_path):
        out = tmp_path / "bench.csv"
        res = runner.invoke(main, ["bench", "--policy", "greedy", "--n", "8",
                                   "--k", "8", "--seed", "0", "--out", str(out)])
        assert res.exit_code == 0, res.output
        row = read_rows(out)[0]
        assert int(row["delta_measured"]) == 8 + 7 + 6 + 5 + 4 + 3 + 2 + 1

    def test_local_bench_counts(self, runner, tmp_path):
        inst_path = tmp_path / "part.json"
        save_instance(generate_coverage(8, 2, 8, 0.3, seed=1,
                                        groups=[[0, 1, 2, 3], [4, 5, 6, 7]],
                                        limits=[2, 1]), inst_path)
        out = tmp_path / "bench.csv"
        res = runner.invoke(main, ["bench", "--policy", "local",
                                   "--instance", str(inst_path),
                                   "--seed", "0", "--out", str(out)])
        assert res.exit_code == 0, res.output
        row = read_rows(out)[0]
        # per-round candidate counts: (4 + 3) for the first group, 4 for the second
        assert int(row["delta_measured"]) == (4 + 3) + 4
        assert int(row["delta_cap"]) == (4 + 3) + 4
