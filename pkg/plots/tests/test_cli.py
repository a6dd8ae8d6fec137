import pytest

from rdch_plots.cli import main

from conftest import write_sweep_report


class TestCli:
    def test_timeseries(self, run_dir, tmp_path):
        out = tmp_path / "ts.png"
        assert main(["timeseries", "--in", str(run_dir), "--out", str(out)]) == 0
        assert out.exists()

    def test_fields(self, run_dir, tmp_path):
        out = tmp_path / "fields.png"
        assert main(["fields", "--in", str(run_dir), "--out", str(out)]) == 0
        assert out.exists()

    def test_sweep(self, tmp_path):
        write_sweep_report(tmp_path / "report.json", [5.0, 20.0],
                           {"terminal_complementarity": [0.1, 0.01]})
        out = tmp_path / "sweep.png"
        assert main(["sweep", "--in", str(tmp_path), "--out", str(out)]) == 0
        assert out.exists()

    def test_schema_error_exit_code(self, tmp_path, capsys):
        (tmp_path / "diagnostics.csv").write_text("t,mass\n0,1\n")
        code = main(["timeseries", "--in", str(tmp_path),
                     "--out", str(tmp_path / "x.png")])
        assert code == 1
        assert "schema error" in capsys.readouterr().err

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["pie", "--in", str(tmp_path), "--out", "x.png"])
