import numpy as np
import pytest

from kinosyn import fileio
from kinosyn.config import ENV_VAR, PipelineConfig, dump_config, load_config, parse_config_text
from kinosyn.errors import DataParseError, ParameterError
from kinosyn.nmf import SynergySet
from kinosyn.signal_model import EmgMatrix, ForceTrace, PositionTrace, PressureFrameSequence


def test_emg_round_trip(tmp_path, rng):
    m = EmgMatrix(rng.normal(size=(4, 30)), ("a", "b", "c", "d"), 200.0)
    fileio.write_emg(tmp_path / "e.csv", m)
    back = fileio.read_emg(tmp_path / "e.csv")
    assert back.data.tobytes() == m.data.tobytes()
    assert back.channel_labels == m.channel_labels
    assert back.sample_rate_hz == pytest.approx(200.0)
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "t,a,b,c,d"


def test_pressure_round_trip(tmp_path, rng):
    frames = PressureFrameSequence(rng.random((5, 16, 10)))
    fileio.write_pressure(tmp_path / "p.csv", frames)
    header = (tmp_path / "p.csv").read_text().splitlines()[0].split(",")
    assert header[:3] == ["t", "cell_1_1", "cell_1_2"] and header[-1] == "cell_16_10"
    back = fileio.read_pressure(tmp_path / "p.csv")
    np.testing.assert_array_equal(back.frames, frames.frames)


def test_force_and_position_round_trip(tmp_path, rng):
    f = ForceTrace(rng.random(12))
    p = PositionTrace(rng.normal(size=(2, 12)))
    fileio.write_force(tmp_path / "f.csv", f)
    fileio.write_position(tmp_path / "x.csv", p)
    np.testing.assert_array_equal(fileio.read_force(tmp_path / "f.csv").values, f.values)
    np.testing.assert_array_equal(fileio.read_position(tmp_path / "x.csv").points, p.points)


def test_synergy_file_round_trip(tmp_path, rng):
    s = SynergySet(rng.random((16, 3)), rng.random((3, 50)), 0.91234, seed=7)
    fileio.write_synergies(tmp_path / "s.txt", s)
    text = (tmp_path / "s.txt").read_text().splitlines()
    assert text[1:6] == ["d=16", "n=3", "k=50", "vaf=0.91234", "seed=7"]
    back = fileio.read_synergies(tmp_path / "s.txt")
    np.testing.assert_array_equal(back.W, s.W)
    np.testing.assert_array_equal(back.C, s.C)
    assert (back.vaf, back.seed) == (s.vaf, s.seed)


def test_parse_error_names_row_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,ch1,ch2\n0,1,2\n1,3,oops\n")
    with pytest.raises(DataParseError) as exc:
        fileio.read_emg(path)
    assert (exc.value.row, exc.value.column) == (3, 3)
    assert "row 3" in str(exc.value) and "column 3" in str(exc.value)


def test_parse_errors(tmp_path):
    (tmp_path / "a.csv").write_text("x,ch1\n0,1\n")
    with pytest.raises(DataParseError):
        fileio.read_emg(tmp_path / "a.csv")
    (tmp_path / "b.csv").write_text("t,ch1\n0,1,2\n")
    with pytest.raises(DataParseError) as exc:
        fileio.read_emg(tmp_path / "b.csv")
    assert exc.value.row == 2
    (tmp_path / "c.csv").write_text("t,ch1\n")
    with pytest.raises(DataParseError):
        fileio.read_emg(tmp_path / "c.csv")
    with pytest.raises(DataParseError):
        fileio.read_emg(tmp_path / "missing.csv")
    (tmp_path / "s.txt").write_text("# kinosyn synergy file v1\nd=2\nn=1\nk=2\nvaf=1\nseed=0\nW\n1\n")
    with pytest.raises(DataParseError):
        fileio.read_synergies(tmp_path / "s.txt")


def test_long_format(tmp_path):
    fileio.write_long(tmp_path / "l.csv", {"a": np.array([1.5, 2.0]), "b": ([10, 20], [3.0, 4.0])})
    assert (tmp_path / "l.csv").read_text() == (
        "series,t,value\na,0,1.5\na,1,2.0\nb,10,3.0\nb,20,4.0\n"
    )


def test_config_parsing_and_overrides(tmp_path, monkeypatch):
    path = tmp_path / "cfg.txt"
    path.write_text("# comment\nalpha = 10\nnmf.max_iters = 50\npreprocess.ma_window=4\n"
                    "preprocess.total_len = 939\nactuator.noise_sigma = 0.5\nseed = 3\n")
    cfg = load_config(path, {"alpha": "12"})
    assert cfg.alpha == 12.0
    assert cfg.nmf.max_iters == 50 and cfg.nmf.seed == 3
    assert cfg.preprocess.ma_window == 4 and cfg.preprocess.total_len == 939
    assert cfg.actuator.noise_sigma == 0.5

    monkeypatch.setenv(ENV_VAR, str(path))
    assert load_config().alpha == 10.0
    monkeypatch.delenv(ENV_VAR)
    assert load_config() == PipelineConfig()


def test_config_round_trip_through_dump():
    cfg = PipelineConfig.from_mapping({"alpha": "7.5", "preprocess.rectify": "false",
                                       "selection_method": "correlation"})
    again = PipelineConfig.from_mapping(parse_config_text(dump_config(cfg)))
    assert again == cfg
    assert again.preprocess.rectify is False


def test_config_errors():
    with pytest.raises(ParameterError):
        PipelineConfig.from_mapping({"bogus": "1"})
    with pytest.raises(ParameterError):
        PipelineConfig.from_mapping({"nmf.bogus": "1"})
    with pytest.raises(ParameterError):
        PipelineConfig.from_mapping({"nmf.max_iters": "many"})
    with pytest.raises(ParameterError):
        PipelineConfig.from_mapping({"alpha": "-1"})
    with pytest.raises(DataParseError):
        parse_config_text("just words")
