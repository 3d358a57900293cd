import json

import numpy as np
import pytest

from evoboss import RunTrace, load_store
from evoboss.cli import main

from .conftest import planted_landscape


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    """Landscape CSV + meta + synthetic store on disk for CLI runs."""
    d = tmp_path_factory.mktemp("cli_data")
    landscape, store, variants, f, g = planted_landscape()
    lines = ["variant,fitness"]
    lines += [f"{w},{y!r}" for w, y in landscape.measured.items()]
    (d / "planted.csv").write_text("\n".join(lines) + "\n")
    (d / "planted.meta").write_text(
        f"name=planted\nn=2\npositions=P0,P1\nwild_type={landscape.wild_type.residues}\n"
    )
    main(["synth-embed", "--n", "2", "--dim", "32", "--seed", "7",
          "--out", str(d / "store")])
    return d


class TestValidateData:
    def test_valid_csv(self, data_dir, capsys):
        code = main(["validate-data", str(data_dir / "planted.csv"),
                     str(data_dir / "planted.meta"), "--n", "2"])
        assert code == 0
        assert "fitness_max" in capsys.readouterr().out

    def test_malformed_csv_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("variant,fitness\nAZ!,1.0\n")
        meta = tmp_path / "bad.meta"
        meta.write_text("name=bad\nn=3\n")
        assert main(["validate-data", str(bad), str(meta), "--n", "3"]) == 2

    def test_known_dataset_range_check(self, tmp_path):
        csv = tmp_path / "gb1.csv"
        csv.write_text("variant,fitness\nVDGV,1.0\nWWCA,8.76\n")
        meta = tmp_path / "gb1.meta"
        meta.write_text("name=GB1\nn=4\nwild_type=VDGV\n")
        assert main(["validate-data", str(csv), str(meta), "--n", "4"]) == 0
        # wrong wild-type fitness fails the published-range check
        csv.write_text("variant,fitness\nVDGV,2.0\nWWCA,8.76\n")
        assert main(["validate-data", str(csv), str(meta), "--n", "4"]) == 2

    def test_usage_error_exit_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["validate-data"])
        assert exc.value.code == 1


class TestEmbedCommands:
    def test_synth_store_loads(self, data_dir):
        store = load_store(data_dir / "store.index", data_dir / "store.matrix")
        assert store.count == 400 and store.dim == 32

    def test_onehot(self, tmp_path):
        assert main(["onehot-embed", "--n", "1", "--out", str(tmp_path / "oh")]) == 0
        store = load_store(tmp_path / "oh.index", tmp_path / "oh.matrix")
        assert store.count == 20 and store.dim == 20
        assert np.all(store.matrix.sum(axis=1) == 1.0)


class TestRun:
    def test_budget_one_trace(self, data_dir, tmp_path):
        out = tmp_path / "t.jsonl"
        code = main([
            "run", "--method", "boes",
            "--landscape", str(data_dir / "planted.csv"),
            "--meta", str(data_dir / "planted.meta"), "--n", "2",
            "--store", str(data_dir / "store"),
            "--budget", "1", "--out", str(out),
        ])
        assert code == 0
        trace = RunTrace.load(out)
        assert len(trace) == 1
        assert trace.records[0].variant != ""

    def test_refuses_overwrite_without_force(self, data_dir, tmp_path):
        out = tmp_path / "t.jsonl"
        args = [
            "run", "--method", "random",
            "--landscape", str(data_dir / "planted.csv"), "--n", "2",
            "--budget", "3", "--out", str(out),
        ]
        assert main(args) == 0
        assert main(args) == 3
        assert main(args + ["--force"]) == 0

    def test_deterministic_bit_identical(self, data_dir, tmp_path):
        outs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            main([
                "run", "--method", "boes",
                "--landscape", str(data_dir / "planted.csv"),
                "--meta", str(data_dir / "planted.meta"), "--n", "2",
                "--store", str(data_dir / "store"),
                "--budget", "6", "--seed", "5", "--start", "CC",
                "--out", str(out),
            ])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_smw_run(self, data_dir, tmp_path):
        out = tmp_path / "smw.jsonl"
        code = main([
            "run", "--method", "smw",
            "--landscape", str(data_dir / "planted.csv"),
            "--meta", str(data_dir / "planted.meta"), "--n", "2",
            "--budget", "39", "--out", str(out),
        ])
        assert code == 0
        assert len(RunTrace.load(out)) == 39


class TestSweepAndReport:
    def test_sweep_then_report(self, data_dir, tmp_path, capsys):
        sweep_dir = tmp_path / "traces"
        code = main([
            "sweep", "--method", "random",
            "--landscape", str(data_dir / "planted.csv"), "--n", "2",
            "--budget", "20", "--runs", "8", "--seed", "1",
            "--jobs", "1", "--out-dir", str(sweep_dir),
        ])
        assert code == 0
        assert len(list(sweep_dir.glob("*.jsonl"))) == 8

        code = main([
            "report", "--traces-dir", str(sweep_dir),
            "--grid", "5,10,20", "--snapshots", "10,20",
            "--out", str(tmp_path / "rep"),
        ])
        assert code == 0
        curves = (tmp_path / "rep_curves.csv").read_text().splitlines()
        assert curves[0] == "count,q1,median,q3"
        assert len(curves) == 4
        snaps = (tmp_path / "rep_snapshots.csv").read_text().splitlines()
        assert snaps[0] == "count,value"
        assert len(snaps) == 1 + 2 * 8

    def test_sweep_jobs_independent(self, data_dir, tmp_path):
        dirs = []
        for jobs, name in ((1, "j1"), (3, "j3")):
            d = tmp_path / name
            main([
                "sweep", "--method", "smw",
                "--landscape", str(data_dir / "planted.csv"),
                "--meta", str(data_dir / "planted.meta"), "--n", "2",
                "--budget", "15", "--runs", "6", "--seed", "2",
                "--jobs", str(jobs), "--out-dir", str(d),
            ])
            dirs.append(d)
        a = [p.read_bytes() for p in sorted(dirs[0].glob("*.jsonl"))]
        b = [p.read_bytes() for p in sorted(dirs[1].glob("*.jsonl"))]
        assert a == b


class TestNdcgCommand:
    def test_perfect_ranking(self, tmp_path, capsys):
        (tmp_path / "pred.txt").write_text("3\n2\n1\n")
        (tmp_path / "truth.txt").write_text("9\n4\n1\n")
        code = main(["ndcg", "--pred", str(tmp_path / "pred.txt"),
                     "--truth", str(tmp_path / "truth.txt"),
                     "--out", str(tmp_path / "n.csv")])
        assert code == 0
        assert "ndcg=1.0" in capsys.readouterr().out
        assert (tmp_path / "n.csv").read_text() == "ndcg,value\nndcg,1.0\n"


class TestPcaCommand:
    def test_projection_csv(self, data_dir, tmp_path, capsys):
        out = tmp_path / "pca.csv"
        code = main(["pca", "--store", str(data_dir / "store"),
                     "--k", "2", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "variant,pc1,pc2"
        assert len(lines) == 401
        assert "explained_variance_ratio=" in capsys.readouterr().out
