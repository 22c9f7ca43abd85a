import pytest

from stokes4d.cli import main
from stokes4d.errors import ConfigError
from stokes4d.io import (
    ResultTable,
    config_hash,
    load_config,
    normalize_config,
    parse_config,
    read_results,
    render_config,
    write_results,
)

SAMPLE = """
# minimal sweep for tests
constellation.n_r = 2
constellation.n_p = 4
constellation.delta_sq = 4.83
sweep.snr_db = 8, 12
block.length = 16
mc.max_blocks = 60
mc.target_errors = 1000000000
mc.batch_blocks = 30
mode = exact
seed = 42
rate.max_blocks = 20
"""


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "sweep.cfg"
    p.write_text(SAMPLE)
    return p


class TestConfig:
    def test_parse_normalize_render_round_trip(self):
        cfg = normalize_config(parse_config(SAMPLE))
        text = render_config(cfg)
        again = normalize_config(parse_config(text))
        assert again == cfg
        assert config_hash(again) == config_hash(cfg)

    def test_defaults_are_filled(self):
        cfg = normalize_config(parse_config("seed = 1"))
        assert cfg["constellation.n_r"] == 2
        assert cfg["feedback"] == "decision"

    def test_unknown_duplicate_and_bad_values(self):
        with pytest.raises(ConfigError):
            parse_config("nonsense.key = 1")
        with pytest.raises(ConfigError):
            parse_config("seed = 1\nseed = 2")
        with pytest.raises(ConfigError):
            parse_config("seed = not_an_int")
        with pytest.raises(ConfigError):
            parse_config("mode = sometimes")
        with pytest.raises(ConfigError):
            parse_config("just a line")

    def test_hash_changes_with_content(self):
        a = normalize_config(parse_config("seed = 1"))
        b = normalize_config(parse_config("seed = 2"))
        assert config_hash(a) != config_hash(b)


class TestResultTables:
    def test_write_read_write_is_byte_identical(self, tmp_path):
        rows = [
            (10.0, 1, "sym", "exact", 12, 3456, 12 / 3456, 0.001, 0.005),
            (12.0, 4, "suc", "high_snr", 0, 3456, 0.0, 0.0, 0.001),
        ]
        table = ResultTable("ser", rows, {"config_hash": "abc", "seed": "1"})
        p1 = tmp_path / "ser_abc.csv"
        write_results(table, p1)
        back = read_results(p1)
        assert back.kind == "ser"
        assert back.metadata["config_hash"] == "abc"
        p2 = tmp_path / "again.csv"
        write_results(back, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_table_is_header_only(self, tmp_path):
        p = tmp_path / "rate_x.csv"
        write_results(ResultTable("rate", []), p)
        assert p.read_text() == "snr_db,rate_bits,stderr,samples\n"
        assert read_results(p).rows == []

    def test_unknown_header_rejected(self, tmp_path):
        p = tmp_path / "weird.csv"
        p.write_text("alpha,beta\n1,2\n")
        with pytest.raises(ValueError):
            read_results(p)

    def test_row_width_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_results(ResultTable("rate", [(1.0, 2.0)]), tmp_path / "r.csv")


class TestCli:
    def test_validate_config(self, config_path, capsys):
        assert main(["validate-config", "--config", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert "constellation.n_r = 2" in out
        assert "config_hash" in out

    def test_validate_config_rejects_bad_file(self, tmp_path, capsys):
        p = tmp_path / "bad.cfg"
        p.write_text("bogus = 1")
        assert main(["validate-config", "--config", str(p)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_table1_values(self, capsys, tmp_path):
        assert main(["table1", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        expected = {
            (2, 4): 4.83,
            (4, 4): 20.20,
            (4, 8): 6.18,
            (8, 4): 52.08,
            (8, 8): 15.36,
            (8, 16): 4.10,
        }
        files = list(tmp_path.glob("table1_*.csv"))
        assert len(files) == 1
        table = read_results(files[0])
        assert len(table.rows) == 6
        for n_r, n_p, value in table.rows:
            assert value == pytest.approx(expected[(n_r, n_p)], abs=0.01)
        assert "n_r=2 n_p=4" in out

    def test_ser_is_seed_deterministic(self, config_path, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["ser", "--config", str(config_path), "--out", str(out1)]) == 0
        assert main(["ser", "--config", str(config_path), "--out", str(out2)]) == 0
        f1 = sorted(out1.glob("ser_*.csv"))
        f2 = sorted(out2.glob("ser_*.csv"))
        assert [f.name for f in f1] == [f.name for f in f2]
        for a, b in zip(f1, f2):
            assert a.read_bytes() == b.read_bytes()
            assert a.with_suffix(".meta").read_bytes() == b.with_suffix(".meta").read_bytes()

    def test_ser_thread_count_does_not_change_output(self, config_path, tmp_path):
        out1, out2 = tmp_path / "t1", tmp_path / "t4"
        assert main(["ser", "--config", str(config_path), "--out", str(out1)]) == 0
        assert main(
            ["ser", "--config", str(config_path), "--out", str(out2), "--threads", "4"]
        ) == 0
        (f1,) = sorted(out1.glob("ser_*.csv"))
        (f2,) = sorted(out2.glob("ser_*.csv"))
        assert f1.name == f2.name
        assert f1.read_bytes() == f2.read_bytes()

    def test_seed_override_changes_hash_and_rows(self, config_path, tmp_path):
        out = tmp_path / "o"
        assert main(["ser", "--config", str(config_path), "--out", str(out)]) == 0
        assert main(
            ["ser", "--config", str(config_path), "--out", str(out), "--seed", "7"]
        ) == 0
        files = sorted(out.glob("ser_*.csv"))
        assert len(files) == 2  # different hashes, both kept

    def test_rate_command(self, config_path, tmp_path):
        out = tmp_path / "r"
        assert main(["rate", "--config", str(config_path), "--out", str(out)]) == 0
        (f,) = out.glob("rate_*.csv")
        table = read_results(f)
        assert len(table.rows) == 2
        assert table.metadata["kind"] == "rate"
        assert "config.sweep.snr_db" in table.metadata

    def test_gap_command_reports_unbracketed(self, tmp_path, capsys):
        cfg = tmp_path / "gap.cfg"
        cfg.write_text(SAMPLE + "\ndetectors = sym, suc\ngap.target_ser = 1e-9\n")
        out = tmp_path / "g"
        code = main(["gap", "--config", str(cfg), "--out", str(out)])
        assert code == 1  # nothing bracketed at 1e-9 with this tiny budget
        assert "not bracketed" in capsys.readouterr().err

    def test_metadata_mentions_hash_and_version(self, config_path, tmp_path):
        out = tmp_path / "m"
        main(["ser", "--config", str(config_path), "--out", str(out)])
        (f,) = out.glob("ser_*.csv")
        table = read_results(f)
        assert table.metadata["config_hash"] in f.name
        assert table.metadata["code_version"]
        assert table.metadata["seed"] == "42"

    def test_unknown_flag_exits_nonzero(self, config_path):
        with pytest.raises(SystemExit) as exc:
            main(["ser", "--config", str(config_path), "--frobnicate"])
        assert exc.value.code == 2

    def test_mode_both_expands(self, config_path, tmp_path):
        out = tmp_path / "both"
        assert main(
            ["ser", "--config", str(config_path), "--out", str(out), "--mode", "both"]
        ) == 0
        (f,) = out.glob("ser_*.csv")
        modes = {row[3] for row in read_results(f).rows}
        assert modes == {"exact", "high_snr"}
