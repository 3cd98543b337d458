import json

import pytest

from bdtest import BoundingFamily, FunctionTable, HypergridDomain, ProductDistribution
from bdtest import io
from bdtest.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def line_files(tmp_path):
    B = BoundingFamily.constant(3, 1, -1, 1)
    io.write_bounds(tmp_path / "bounds.txt", B)
    f = FunctionTable.line([3, 1, 2], (1, 3))
    io.write_function(tmp_path / "f.txt", f)
    mono = BoundingFamily.monotone(3, 1)
    io.write_bounds(tmp_path / "mono.txt", mono)
    D = ProductDistribution(HypergridDomain(3, 1), ((1, 1, 2),), 4)
    io.write_distribution(tmp_path / "dist.txt", D)
    return tmp_path


class TestFileFormats:
    def test_function_roundtrip_exact(self, tmp_path):
        f = FunctionTable(HypergridDomain(2, 2), (1, -3, 4, 0), (-3, 4))
        io.write_function(tmp_path / "f.txt", f)
        g = io.read_function(tmp_path / "f.txt")
        assert g == f
        assert all(isinstance(v, int) for v in g.values)

    def test_bounds_roundtrip_with_infinities(self, tmp_path):
        B = BoundingFamily.monotone(4, 2)
        io.write_bounds(tmp_path / "b.txt", B)
        C = io.read_bounds(tmp_path / "b.txt")
        assert C.lower == B.lower and C.upper == B.upper

    def test_distribution_roundtrip(self, tmp_path):
        D = ProductDistribution(HypergridDomain(3, 2), ((1, 1, 2), (2, 1, 1)), 4)
        io.write_distribution(tmp_path / "d.txt", D)
        assert io.read_distribution(tmp_path / "d.txt") == D

    def test_float_values_survive(self, tmp_path):
        f = FunctionTable.line([0.1, 0.25, 1.0 / 3.0])
        io.write_function(tmp_path / "f.txt", f)
        assert io.read_function(tmp_path / "f.txt").values == f.values

    def test_malformed_header(self, tmp_path):
        (tmp_path / "bad.txt").write_text("3 1\n1 2 3\n")
        with pytest.raises(ValueError):
            io.read_function(tmp_path / "bad.txt")


class TestDistanceCommand:
    def test_distance_json(self, capsys, line_files):
        code, out, _ = run_cli(
            capsys,
            "distance",
            "--function", str(line_files / "f.txt"),
            "--bounds", str(line_files / "mono.txt"),
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["distance"] == pytest.approx(1 / 3)
        assert payload["matching_weight"] == 2
        assert payload["matching"] == [{"x": [1], "y": [2], "score": 2}]

    def test_distance_under_distribution(self, capsys, line_files):
        code, out, _ = run_cli(
            capsys,
            "distance",
            "--function", str(line_files / "f.txt"),
            "--bounds", str(line_files / "mono.txt"),
            "--dist", str(line_files / "dist.txt"),
        )
        assert code == 0
        payload = json.loads(out)
        # weighted: best monotone fit g=[2,2,2] costs 1+1+0 weighted (1,1,2)
        assert payload["matching_weight"] == 2
        assert payload["distance"] == pytest.approx(2 / (2 * 4))

    def test_p2_reports_interval_not_exact(self, capsys, line_files):
        code, out, _ = run_cli(
            capsys,
            "distance",
            "--function", str(line_files / "f.txt"),
            "--bounds", str(line_files / "mono.txt"),
            "-p", "2",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["exact"] is False
        assert payload["distance"] is None
        assert payload["l2_lower"] == pytest.approx(1 / 3)
        assert payload["l2_upper"] == pytest.approx((1 / 3) ** 0.5)

    def test_bad_file_is_clean_error(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "distance", "--function", str(tmp_path / "nope.txt"),
            "--bounds", str(tmp_path / "nope2.txt"),
        )
        assert code == 2
        assert "error:" in err


class TestGenerateAndTest:
    def test_member_pipeline(self, capsys, line_files):
        code, out, _ = run_cli(
            capsys,
            "generate",
            "--bounds", str(line_files / "bounds.txt"),
            "--out", str(line_files / "member.txt"),
            "--seed", "5",
        )
        assert code == 0
        assert json.loads(out)["kind"] == "member"

        code, out, _ = run_cli(
            capsys,
            "test",
            "--function", str(line_files / "member.txt"),
            "--bounds", str(line_files / "bounds.txt"),
            "--epsilon", "0.3",
            "--seed", "7",
        )
        assert code == 0
        verdict = json.loads(out)
        assert verdict["decision"] == "accept"
        assert verdict["queries"] == 2 * verdict["trials"]

    def test_far_pipeline_rejects(self, capsys, tmp_path):
        B = BoundingFamily.constant(16, 1, -1, 1)
        io.write_bounds(tmp_path / "b16.txt", B)
        code, out, _ = run_cli(
            capsys,
            "generate",
            "--bounds", str(tmp_path / "b16.txt"),
            "--out", str(tmp_path / "far.txt"),
            "--seed", "5",
            "--far", "0.25",
            "--integers",
        )
        assert code == 0
        meta = json.loads(out)
        assert meta["measured_eps"] >= 0.25

        code, out, _ = run_cli(
            capsys,
            "test",
            "--function", str(tmp_path / "far.txt"),
            "--bounds", str(tmp_path / "b16.txt"),
            "--epsilon", "0.25",
            "--seed", "3",
        )
        assert code == 1
        verdict = json.loads(out)
        assert verdict["decision"] == "reject"
        assert verdict["witness"] is not None

    def test_single_shot_flag(self, capsys, line_files):
        code, out, _ = run_cli(
            capsys,
            "test",
            "--function", str(line_files / "f.txt"),
            "--bounds", str(line_files / "bounds.txt"),
            "--epsilon", "0.2",
            "--seed", "1",
            "--single-shot",
        )
        verdict = json.loads(out)
        assert verdict["queries"] in (0, 2)

    def test_product_and_l2_paths(self, capsys, line_files):
        for extra in (["--dist", str(line_files / "dist.txt")], ["-p", "2"]):
            code, out, _ = run_cli(
                capsys,
                "test",
                "--function", str(line_files / "f.txt"),
                "--bounds", str(line_files / "bounds.txt"),
                "--epsilon", "0.4",
                "--seed", "2",
                *extra,
            )
            assert code in (0, 1)
            assert json.loads(out)["decision"] in ("accept", "reject")


class TestDistCommand:
    def test_check(self, capsys, line_files):
        code, out, _ = run_cli(capsys, "dist", "check", str(line_files / "dist.txt"))
        assert code == 0
        payload = json.loads(out)
        assert payload["ok"] is True
        assert payload["total_mass"] == "1"

    def test_bloat(self, capsys, line_files):
        code, out, _ = run_cli(capsys, "dist", "bloat", str(line_files / "dist.txt"), "--size")
        assert code == 0
        assert out.strip() == "4"

    def test_rationalize(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys,
            "dist", "rationalize",
            "--weights", "0.25,0.75;0.5,0.5",
            "--out", str(tmp_path / "r.txt"),
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["masses"] == [[1, 3], [2, 2]]
        D = io.read_distribution(tmp_path / "r.txt")
        assert D.denominator == payload["denominator"]


class TestExperimentCommand:
    def test_end_to_end_with_figures(self, capsys, tmp_path):
        cfg = {
            "grids": [{"n": 8, "d": 1}],
            "bounds": [{"kind": "constant", "lower": -1, "upper": 1}],
            "epsilons": [0.2],
            "kinds": ["member", "far"],
            "testers": ["hypergrid"],
            "trials": 120,
        }
        (tmp_path / "cfg.json").write_text(json.dumps(cfg))
        code, out, _ = run_cli(
            capsys,
            "experiment",
            "--config", str(tmp_path / "cfg.json"),
            "--seed", "11",
            "--out-dir", str(tmp_path / "out"),
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["all_passed"] is True
        assert (tmp_path / "out" / "report.csv").exists()
        assert (tmp_path / "out" / "report.json").exists()
        assert (tmp_path / "out" / "soundness_rates.png").exists()
        assert (tmp_path / "out" / "query_scaling.png").exists()

    def test_failing_row_sets_exit_code(self, capsys, tmp_path):
        cfg = {
            "grids": [{"n": 8, "d": 1}],
            "bounds": [{"kind": "monotone"}],  # unsupported by hypergrid tester
            "epsilons": [0.2],
            "kinds": ["member"],
            "testers": ["hypergrid"],
            "trials": 120,
        }
        (tmp_path / "cfg.json").write_text(json.dumps(cfg))
        code, out, _ = run_cli(
            capsys,
            "experiment",
            "--config", str(tmp_path / "cfg.json"),
            "--seed", "11",
            "--out-dir", str(tmp_path / "out"),
            "--no-figures",
        )
        assert code == 1
        assert json.loads(out)["all_passed"] is False
