import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from frontrank.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def bench_file(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    path = root / "bench.bin"
    CliRunner().invoke(
        main,
        ["ingest", "--synthetic-bridge", "--sizes", "30,15,20", "--seed", "0",
         "--output", str(path)],
        catch_exceptions=False,
    )
    return path


class TestIngest:
    def test_synthetic_bridge_summary(self, runner, tmp_path):
        out = tmp_path / "d.bin"
        result = runner.invoke(
            main, ["ingest", "--synthetic-bridge", "--output", str(out)]
        )
        assert result.exit_code == 0, result.output
        summary = json.loads(result.output)
        assert summary["n"] == 190 and summary["classes"] == 3
        assert out.exists()

    def test_csv_to_binary_with_normalization(self, runner, tmp_path):
        src = tmp_path / "in.csv"
        src.write_text("item_id,f0,f1\na,1.0,10.0\nb,2.0,20.0\nc,3.0,30.0\n")
        out = tmp_path / "out.bin"
        result = runner.invoke(
            main,
            ["ingest", "--input", str(src), "--normalize", "zscore",
             "--output", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["normalize"] == "zscore"

    def test_input_and_synthetic_mutually_exclusive(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["ingest", "--input", "x.csv", "--synthetic-bridge",
             "--output", str(tmp_path / "o.bin")],
        )
        assert result.exit_code == 2

    def test_parse_error_exits_one(self, runner, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("item_id,f0\na,NaN\n")
        result = runner.invoke(
            main, ["ingest", "--input", str(src), "--output", str(tmp_path / "o.bin")]
        )
        assert result.exit_code == 1
        assert "error:" in result.output or "error:" in (result.stderr or "")

    def test_unknown_flag_exits_two(self, runner):
        result = runner.invoke(main, ["ingest", "--bogus"])
        assert result.exit_code == 2


class TestBuildModel:
    def test_twice_byte_identical(self, runner, bench_file, tmp_path):
        a, b = tmp_path / "a.emr", tmp_path / "b.emr"
        for out in (a, b):
            result = runner.invoke(
                main,
                ["build-model", "--dataset", str(bench_file), "--anchors", "16",
                 "--seed", "7", "--output", str(out)],
            )
            assert result.exit_code == 0, result.output
        assert a.read_bytes() == b.read_bytes()

    def test_register_into_data_dir(self, runner, bench_file, tmp_path):
        result = runner.invoke(
            main,
            ["build-model", "--dataset", str(bench_file), "--anchors", "16",
             "--seed", "1", "--data-dir", str(tmp_path / "data")],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert (tmp_path / "data" / "registry.json").exists()
        assert Path(body["model_file"]).exists()


class TestRetrieve:
    def test_pfm_json_response(self, runner, bench_file, tmp_path):
        model = tmp_path / "m.emr"
        runner.invoke(
            main,
            ["build-model", "--dataset", str(bench_file), "--anchors", "16",
             "--seed", "0", "--output", str(model)],
            catch_exceptions=False,
        )
        result = runner.invoke(
            main,
            ["retrieve", "--model", str(model), "--dataset", str(bench_file),
             "--queries", "3,17", "--k", "20", "--method", "pfm"],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        items = [it for front in body["fronts"] for it in front]
        assert 0 < len(items) <= 20
        assert body["method"] == "pfm"
        indices = {it["item_index"] for it in items}
        assert {3, 17}.isdisjoint(indices)

    def test_scalarized_with_weights(self, runner, bench_file, tmp_path):
        model = tmp_path / "m.emr"
        runner.invoke(
            main,
            ["build-model", "--dataset", str(bench_file), "--anchors", "16",
             "--seed", "0", "--output", str(model)],
            catch_exceptions=False,
        )
        result = runner.invoke(
            main,
            ["retrieve", "--model", str(model), "--dataset", str(bench_file),
             "--queries", "3,17", "--k", "10", "--method", "scalarized",
             "--weights", "0.7,0.3"],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["method"] == "scalarized"
        scores = [it["score"] for it in body["fronts"][0]]
        assert scores == sorted(scores, reverse=True)

    def test_bad_queries_usage_error(self, runner, bench_file, tmp_path):
        model = tmp_path / "m.emr"
        runner.invoke(
            main,
            ["build-model", "--dataset", str(bench_file), "--anchors", "8",
             "--seed", "0", "--output", str(model)],
            catch_exceptions=False,
        )
        result = runner.invoke(
            main,
            ["retrieve", "--model", str(model), "--dataset", str(bench_file),
             "--queries", "x,y"],
        )
        assert result.exit_code == 2


class TestEvaluate:
    def test_writes_tables_and_figures(self, runner, tmp_path):
        outdir = tmp_path / "report"
        result = runner.invoke(
            main,
            ["evaluate", "--pairs", "5", "--models", "2", "--k-max", "10",
             "--anchors", "16", "--seed", "0", "--outdir", str(outdir)],
        )
        assert result.exit_code == 0, result.output
        with open(outdir / "ndcg.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert set(rows[0]) == {"k", "pfm", "mq_avg", "mq_max"}
        assert len(rows) == 10
        assert (outdir / "ndcg_long.csv").exists()
        assert (outdir / "profiles.csv").exists()
        assert (outdir / "report.json").exists()
        assert (outdir / "ndcg.png").stat().st_size > 0
        assert (outdir / "profiles.png").stat().st_size > 0


class TestServe:
    def test_data_dir_comes_from_env_var(self, runner, tmp_path, monkeypatch):
        captured = {}

        def fake_run(app, host, port):
            captured["host"], captured["port"] = host, port

        monkeypatch.setattr("uvicorn.run", fake_run)
        result = runner.invoke(
            main, ["serve", "--port", "9999"],
            env={"FRONTRANK_DATA": str(tmp_path / "envdata")},
        )
        assert result.exit_code == 0, result.output
        assert captured == {"host": "127.0.0.1", "port": 9999}
        assert (tmp_path / "envdata" / "models").is_dir()


class TestAsymptotics:
    def test_writes_error_table_probe_and_figures(self, runner, tmp_path):
        outdir = tmp_path / "asym"
        result = runner.invoke(
            main,
            ["asymptotics", "--n-schedule", "500,2000", "--reps", "1",
             "--probe-n", "4000", "--levels", "0.5,0.8", "--seed", "0",
             "--outdir", str(outdir)],
        )
        assert result.exit_code == 0, result.output
        with open(outdir / "continuum.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [int(r["n"]) for r in rows] == [500, 2000]
        assert (outdir / "continuum.json").exists()
        assert (outdir / "continuum.png").stat().st_size > 0
        assert (outdir / "probe.json").exists()
        assert (outdir / "levels.png").exists()
        dats = list(outdir.glob("level_*.dat"))
        assert dats, "gnuplot-style level curve files expected"
        first = dats[0].read_text().splitlines()[0].split()
        assert len(first) == 2 and all(float(v) >= 0 for v in first)

    def test_unknown_density_exits_two(self, runner, tmp_path):
        result = runner.invoke(
            main, ["asymptotics", "--density", "cauchy", "--outdir", str(tmp_path)]
        )
        assert result.exit_code == 2
