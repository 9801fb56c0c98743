import numpy as np
import pytest

from usc_figures import FigureDataError, FigureJob, render, split_by_flag
from usc_figures.data import flags, floats, read_table


class TestAllKindsRender:
    def test_dispatch_week(self, default_run, tmp_path):
        out = render(FigureJob(
            kind="dispatch_week",
            inputs={"dispatch": default_run / "dispatch.csv"},
            output=tmp_path / "dispatch.svg",
        ))
        assert out.exists() and out.stat().st_size > 0

    def test_rldc(self, default_run, tmp_path):
        out = render(FigureJob(
            kind="rldc",
            inputs={"rldc": default_run / "rldc.csv"},
            output=tmp_path / "rldc.svg",
        ))
        assert out.exists() and out.stat().st_size > 0

    def test_price_violin(self, default_run, tmp_path):
        out = render(FigureJob(
            kind="price_violin",
            inputs={"dispatch": default_run / "dispatch.csv"},
            output=tmp_path / "violin.svg",
        ))
        assert out.exists() and out.stat().st_size > 0

    def test_sensitivity_panel(self, sweep_csv, tmp_path):
        out = render(FigureJob(
            kind="sensitivity_panel",
            inputs={"sweep": sweep_csv},
            output=tmp_path / "panel.svg",
        ))
        assert out.exists() and out.stat().st_size > 0

    def test_capacity_bars(self, default_run, complete_run, tmp_path):
        out = render(FigureJob(
            kind="capacity_bars",
            inputs={"results": [default_run / "results.json", complete_run / "results.json"]},
            output=tmp_path / "bars.svg",
        ))
        assert out.exists() and out.stat().st_size > 0

    def test_energy_flow(self, default_run, tmp_path):
        out = render(FigureJob(
            kind="energy_flow",
            inputs={"dispatch": default_run / "dispatch.csv"},
            output=tmp_path / "flow.png",
        ))
        assert out.exists() and out.stat().st_size > 0


class TestViolinPartition:
    def test_split_matches_cycling_flag_exactly(self, default_run):
        table = read_table(default_run / "dispatch.csv")
        prices = floats(table, "lambda")
        cycling = flags(table, "cycling")
        quiet, busy = split_by_flag(prices, cycling)
        assert len(quiet) + len(busy) == len(prices)
        assert len(busy) == int(cycling.sum())
        np.testing.assert_array_equal(busy, prices[cycling])
        np.testing.assert_array_equal(quiet, prices[~cycling])
        assert len(busy) > 0  # the proportionate run cycles

    def test_degenerate_single_sided_violin(self, complete_run, tmp_path):
        # The complete-SLCR run has no cycling hours: one empty side.
        table = read_table(complete_run / "dispatch.csv")
        cycling = flags(table, "cycling")
        assert int(cycling.sum()) == 0
        out = render(FigureJob(
            kind="price_violin",
            inputs={"dispatch": complete_run / "dispatch.csv"},
            output=tmp_path / "violin_one_sided.svg",
        ))
        assert out.exists() and out.stat().st_size > 0


class TestDeterminismAndErrors:
    def test_rerender_is_byte_stable(self, default_run, tmp_path):
        def once(name):
            return render(FigureJob(
                kind="rldc",
                inputs={"rldc": default_run / "rldc.csv"},
                output=tmp_path / name,
            )).read_bytes()

        assert once("a.svg") == once("b.svg")

    def test_rendering_does_not_mutate_inputs(self, default_run, tmp_path):
        src = default_run / "dispatch.csv"
        before = src.read_bytes()
        render(FigureJob(
            kind="dispatch_week", inputs={"dispatch": src}, output=tmp_path / "d.svg"
        ))
        assert src.read_bytes() == before

    def test_schema_mismatch_names_the_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("# schema_version=1\nt,price\n0,1.0\n")
        with pytest.raises(FigureDataError) as err:
            render(FigureJob(
                kind="price_violin", inputs={"dispatch": bad}, output=tmp_path / "x.svg"
            ))
        assert "lambda" in str(err.value) and "cycling" in str(err.value)

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(FigureDataError):
            FigureJob(kind="pie", inputs={}, output=tmp_path / "x.svg")

    def test_missing_file_is_reported(self, tmp_path):
        with pytest.raises(FigureDataError):
            render(FigureJob(
                kind="rldc", inputs={"rldc": tmp_path / "absent.csv"}, output=tmp_path / "x.svg"
            ))
