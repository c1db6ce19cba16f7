import numpy as np
import pytest

from render import DEFAULT_METHODS, FIGURES, RenderError, main, read_csv, render_figure


def synthesize_outputs(out_dir, n_rows=40, drop_column=None):
    """Write minimal CSVs shaped like a completed simulator figures run."""
    rng = np.random.default_rng(3)
    needed = {}
    for panels in FIGURES.values():
        for panel in panels:
            needed.setdefault(panel.csv_name, set()).update(panel.columns())
    for name, columns in needed.items():
        columns = sorted(columns)
        if drop_column is not None and drop_column in columns:
            columns.remove(drop_column)
        t = np.linspace(0.0, 10.0, n_rows)
        table = [t] + [0.5 + 0.1 * rng.standard_normal(n_rows) for _ in columns]
        header = ",".join(["t"] + columns)
        rows = [",".join(repr(float(x)) for x in row) for row in np.array(table).T]
        (out_dir / f"{name}.csv").write_text(header + "\n" + "\n".join(rows) + "\n")
    return needed


class TestRender:
    def test_renders_four_figures_with_expected_curves(self, tmp_path, capsys):
        in_dir = tmp_path / "results"
        in_dir.mkdir()
        synthesize_outputs(in_dir)
        out_dir = tmp_path / "plots"
        assert main(["--in", str(in_dir), "--out", str(out_dir)]) == 0
        images = sorted(p.name for p in out_dir.glob("*.png"))
        assert images == ["fig1.png", "fig2.png", "fig3.png", "fig4.png"]
        for img in out_dir.glob("*.png"):
            assert img.stat().st_size > 0

    def test_one_curve_per_method_channel(self, tmp_path):
        in_dir = tmp_path / "results"
        in_dir.mkdir()
        synthesize_outputs(in_dir)
        for name, panels in FIGURES.items():
            summary = render_figure(panels, in_dir, tmp_path / "plots" / f"{name}.png")
            assert [count for _, count in summary] == [len(DEFAULT_METHODS)] * len(panels)

    def test_missing_column_is_named(self, tmp_path, capsys):
        in_dir = tmp_path / "results"
        in_dir.mkdir()
        synthesize_outputs(in_dir, drop_column="qcme2.pop_g")
        out_dir = tmp_path / "plots"
        assert main(["--in", str(in_dir), "--out", str(out_dir)]) == 1
        err = capsys.readouterr().err
        assert "qcme2.pop_g" in err

    def test_missing_file_is_named(self, tmp_path, capsys):
        in_dir = tmp_path / "results"
        in_dir.mkdir()
        synthesize_outputs(in_dir)
        (in_dir / "fig3B.csv").unlink()
        assert main(["--in", str(in_dir), "--out", str(tmp_path / "plots")]) == 1
        assert "fig3B" in capsys.readouterr().err

    def test_rerun_is_stable(self, tmp_path):
        in_dir = tmp_path / "results"
        in_dir.mkdir()
        synthesize_outputs(in_dir)
        out = tmp_path / "plots" / "fig1.png"
        s1 = render_figure(FIGURES["fig1"], in_dir, out)
        size1 = out.stat().st_size
        s2 = render_figure(FIGURES["fig1"], in_dir, out)
        assert s1 == s2
        assert out.stat().st_size == size1

    def test_read_csv_rejects_ragged_file(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,a,b\n0.0,1.0\n")
        with pytest.raises(Exception):
            read_csv(bad)
