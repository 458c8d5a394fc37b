import io
import json
import math
import subprocess
import sys

import pytest

from khh_tiling import CSV_HEADER, new_graph, write_sweep_csv
from khh_tiling.cli import main
from khh_tiling.graph import format_graph_text

from test_harness import mk_row


def run(argv, capsys):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def write_half_half(path, n=8):
    g = new_graph(n, n, [(a, b) for a in range(n) for b in range(n // 2)])
    path.write_text(format_graph_text(g))


class TestGen:
    def test_stdout_text(self, capsys):
        rc, out, _ = run(["gen", "--model", "random", "--n", "4", "--p", "1.0"], capsys)
        assert rc == 0
        lines = out.splitlines()
        assert lines[0].startswith("# meta ")
        meta = json.loads(lines[0][len("# meta ") :])
        assert meta["model"] == "random" and meta["seed"] == 0
        assert lines[1] == "p 4 4"
        assert sum(1 for ln in lines if ln.startswith("e ")) == 16

    def test_extremal_meta_records_split(self, capsys):
        rc, out, _ = run(
            ["gen", "--model", "lower_extremal", "--n", "10", "--h", "2",
             "--alpha", "0.2"],
            capsys,
        )
        assert rc == 0
        meta = json.loads(out.splitlines()[0][len("# meta ") :])
        assert meta["a1_size"] == 2 and meta["b1_size"] == 2

    def test_out_file(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        rc, out, _ = run(
            ["gen", "--model", "random", "--n", "3", "--p", "0.5", "--seed", "9",
             "--out", str(f)],
            capsys,
        )
        assert rc == 0 and out == ""
        assert f.read_text().splitlines()[1] == "p 3 3"


class TestSolve:
    def test_round_trip(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        run(["gen", "--model", "random", "--n", "6", "--p", "0.9", "--seed", "5",
             "--out", str(f)], capsys)
        rc, out, _ = run(["solve", "--in", str(f)], capsys)
        assert rc == 0
        payload = json.loads(out)
        assert payload["h"] == 1
        assert payload["seed_echo"] == 5
        assert isinstance(payload["exists"], bool)
        assert payload["undecided"] is False
        assert isinstance(payload["nodes_explored"], int)
        assert isinstance(payload["elapsed_ms"], float)
        if payload["exists"]:
            tiling = payload["tiling"]
            assert isinstance(tiling, list) and len(tiling) == 6
            for a_set, b_set in tiling:
                assert len(a_set) == 1 and len(b_set) == 1

    def test_empty_graph_reports_deficiency(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        run(["gen", "--model", "random", "--n", "6", "--p", "0.0", "--out", str(f)],
            capsys)
        rc, out, _ = run(["solve", "--in", str(f)], capsys)
        payload = json.loads(out)
        assert payload["exists"] is False and payload["tiling"] is None
        assert payload["deficiency"] == 6

    def test_h_override(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        run(["gen", "--model", "random", "--n", "6", "--p", "1.0", "--out", str(f)],
            capsys)
        rc, out, _ = run(["solve", "--in", str(f), "--h", "3"], capsys)
        payload = json.loads(out)
        assert payload["h"] == 3 and payload["exists"] is True
        assert len(payload["tiling"]) == 2

    def test_stdin_input(self, capsys, monkeypatch):
        g = new_graph(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
        monkeypatch.setattr(sys, "stdin", io.StringIO(format_graph_text(g)))
        rc, out, _ = run(["solve", "--in", "-"], capsys)
        assert rc == 0 and json.loads(out)["exists"] is True

    def test_missing_file_exits_2(self, capsys):
        rc, _, err = run(["solve", "--in", "/nonexistent/g.txt"], capsys)
        assert rc == 2 and err != ""


class TestRegcheck:
    def test_exact_irregular(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        write_half_half(f)
        rc, out, _ = run(["regcheck", "--in", str(f), "--epsilon", "0.1"], capsys)
        assert rc == 0
        payload = json.loads(out)
        assert payload["verdict"] == "irregular" and payload["mode"] == "exact"
        assert payload["density"] == 0.5
        assert payload["params"]["epsilon"] == 0.1
        w = payload["witness"]
        assert isinstance(w["x"], list) and isinstance(w["y"], list)

    def test_subset_selection(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        write_half_half(f)
        rc, out, _ = run(
            ["regcheck", "--in", str(f), "--a", "0-7", "--b", "0,1,2,3",
             "--epsilon", "0.4"],
            capsys,
        )
        payload = json.loads(out)
        # the selected block is complete
        assert payload["density"] == 1.0 and payload["verdict"] == "regular"

    def test_sampled_mode(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        write_half_half(f, n=20)
        rc, out, _ = run(
            ["regcheck", "--in", str(f), "--epsilon", "0.1", "--mode", "sampled",
             "--trials", "500", "--seed", "3"],
            capsys,
        )
        payload = json.loads(out)
        assert payload["mode"] == "sampled"
        assert payload["verdict"] in ("irregular", "unknown")
        assert payload["params"]["trials"] == 500

    def test_super_check(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        g = new_graph(5, 5, [(a, b) for a in range(5) for b in range(5)])
        f.write_text(format_graph_text(g))
        rc, out, _ = run(
            ["regcheck", "--in", str(f), "--epsilon", "0.25", "--d", "0.5"], capsys
        )
        payload = json.loads(out)
        assert payload["verdict"] == "regular"
        assert payload["params"]["d"] == 0.5
        assert payload["bad_vertex"] is None

    def test_super_flags_low_degree_vertex(self, tmp_path, capsys):
        f = tmp_path / "g.txt"
        write_half_half(f)  # columns 4..7 are empty
        rc, out, _ = run(
            ["regcheck", "--in", str(f), "--epsilon", "0.25", "--d", "0.25"], capsys
        )
        payload = json.loads(out)
        assert payload["verdict"] == "irregular"
        assert payload["bad_vertex"] == {"side": "B", "index": 4}


class TestSweep:
    def test_tiny_sweep(self, tmp_path, capsys):
        out_csv = tmp_path / "rows.csv"
        rc, out, _ = run(
            ["sweep", "--model", "random", "--h", "1", "--n", "4", "--n", "6",
             "--c-grid", "0.5:2.0:2.0", "--trials", "3", "--seed", "1",
             "--out", str(out_csv)],
            capsys,
        )
        assert rc == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 2 * 3  # two n values, grid {0.5, 1.0, 2.0}
        summary = json.loads(out)
        assert summary["rows"] == 6
        assert summary["csv"] == str(out_csv)
        assert isinstance(summary["crossovers"], list)
        assert isinstance(summary["skipped"], list)

    def test_comma_grid_and_partial_mode(self, tmp_path, capsys):
        out_csv = tmp_path / "rows.csv"
        rc, out, _ = run(
            ["sweep", "--model", "random", "--h", "2", "--n", "6",
             "--c-grid", "0.5,1.0", "--trials", "2", "--mode", "partial:0.3",
             "--out", str(out_csv)],
            capsys,
        )
        assert rc == 0
        assert json.loads(out)["rows"] == 2

    def test_bad_grid_exits_2(self, tmp_path, capsys):
        rc, _, err = run(
            ["sweep", "--model", "random", "--n", "4", "--c-grid", "2.0:1.0:1.25",
             "--trials", "1", "--out", str(tmp_path / "x.csv")],
            capsys,
        )
        assert rc == 2 and err != ""


class TestFit:
    def make_csv(self, path, n_values=(100, 200, 400)):
        rows = []
        for n in n_values:
            for c, frac in [(1, 0.0), (2, 0.0), (4, 1.0), (8, 1.0)]:
                rows.append(mk_row(n, float(c), round(20 * frac), p=c / n))
        write_sweep_csv(rows, path)

    def test_fit_recovers_planted_slope(self, tmp_path, capsys):
        f = tmp_path / "rows.csv"
        self.make_csv(f)
        rc, out, _ = run(["fit", "--in", str(f)], capsys)
        assert rc == 0
        payload = json.loads(out)
        assert len(payload["per_n_crossover"]) == 3
        for entry in payload["per_n_crossover"]:
            assert entry["p_half"] == pytest.approx(math.sqrt(8) / entry["n"])
        assert payload["slope"] == pytest.approx(-1.0, abs=1e-9)
        assert payload["residual"] == pytest.approx(0.0, abs=1e-9)
        assert payload["predicted_slope"] == -1.0
        assert payload["skipped"] == []

    def test_two_crossovers_no_merged_fit(self, tmp_path, capsys):
        f = tmp_path / "rows.csv"
        self.make_csv(f, n_values=(100, 200))
        rc, out, _ = run(["fit", "--in", str(f)], capsys)
        payload = json.loads(out)
        assert len(payload["per_n_crossover"]) == 2
        assert payload["slope"] is None

    def test_mixed_models_rejected(self, tmp_path, capsys):
        f = tmp_path / "rows.csv"
        import dataclasses

        rows = [mk_row(100, 1.0, 0), mk_row(100, 2.0, 20)]
        rows[1] = dataclasses.replace(rows[1], model="perturbed_lower")
        write_sweep_csv(rows, f)
        rc, _, err = run(["fit", "--in", str(f)], capsys)
        assert rc == 2 and "model" in err


class TestPlot:
    def test_text_data_output(self, tmp_path, capsys):
        csv_f = tmp_path / "rows.csv"
        TestFit().make_csv(csv_f)
        dat = tmp_path / "curves.dat"
        rc, _, _ = run(["plot", "--in", str(csv_f), "--out", str(dat)], capsys)
        assert rc == 0
        text = dat.read_text()
        assert text.splitlines()[1] == "# n c p success_rate wilson_lo wilson_hi"
        assert "\n\n" in text  # blank line between per-n blocks

    def test_png_output(self, tmp_path, capsys):
        pytest.importorskip("matplotlib")
        csv_f = tmp_path / "rows.csv"
        TestFit().make_csv(csv_f)
        img = tmp_path / "curves.png"
        rc, _, _ = run(["plot", "--in", str(csv_f), "--out", str(img)], capsys)
        assert rc == 0
        assert img.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "khh_tiling", "gen", "--model", "random",
         "--n", "2", "--p", "1.0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "p 2 2" in proc.stdout
