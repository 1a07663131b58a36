import csv
import io

import pytest

from vlc_secrecy.cli import main, write_csv
from vlc_secrecy.config import PRESETS, dump_config, load_config, parse_config, preset_path
from vlc_secrecy.errors import ConfigError

FAST = ["--set", "experiment.trials=2000"]


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_names_presets(capsys):
    code, out, _ = _run(capsys, "list")
    assert code == 0
    assert "fig7" in out
    listed = [line.split()[0] for line in out.splitlines() if line.startswith("  fig")]
    assert listed == list(PRESETS)
    assert len(PRESETS) == 7
    for name in PRESETS:
        assert preset_path(name).exists()


@pytest.mark.parametrize("name", list(PRESETS))
def test_every_preset_runs_on_defaults(name, tmp_path, capsys):
    out = tmp_path / f"{name}.csv"
    code, _, err = _run(capsys, "run", name, "--out", str(out))
    assert code == 0, err
    rows = list(csv.DictReader(out.open(encoding="utf-8", newline="")))
    assert rows


def test_fig7_columns(tmp_path, capsys):
    out = tmp_path / "f7.csv"
    assert _run(capsys, "run", "fig7", "--out", str(out), *FAST)[0] == 0
    header = out.read_text(encoding="utf-8").splitlines()[0].split(",")
    for col in ("lambda_E", "C_th", "sop_upper_cf", "sop_lower_cf", "sop_upper_mc", "sop_upper_mc_se", "sop_lower_mc_se"):
        assert col in header
    assert "eavesdroppers.intensity_per_m2" in header and "experiment.c_th_bits" in header


def test_same_seed_same_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert _run(capsys, "run", "fig8", "--seed", "42", "--workers", "2", "--out", str(p), *FAST)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()


def test_seed_changes_output(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _run(capsys, "run", "fig7", "--seed", "1", "--out", str(a), *FAST)
    _run(capsys, "run", "fig7", "--seed", "2", "--out", str(b), *FAST)
    assert a.read_bytes() != b.read_bytes()


def test_unknown_key_exit_1(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[room]\nlenght_m = 10.0\n[experiment]\nmode = "sop-closed"\nc_th_bits = 1.0\n')
    code, _, err = _run(capsys, "run", str(cfg))
    assert code == 1
    assert "room.lenght_m" in err


@pytest.mark.parametrize(
    "text,needle",
    [
        ('[rooom]\nlength_m = 1.0\n', "rooom"),
        ('[room]\nlength_m = "ten"\n', "room.length_m"),
        ('[experiment]\nmode = "beamform"\nue_m = [0.0, 1.0]\nrho_u_db = 40.0\ntrials = 5\n', "experiment.trials"),
        ('[experiment]\nmode = "sop-mc"\n', "c_th_bits"),
        ('[experiment]\nmode = "dance"\n', "dance"),
        ("[room\n", "parse"),
        ('[sweep]\n"room.nope" = [1.0]\n[experiment]\nc_th_bits = 1.0\n', "room.nope"),
    ],
)
def test_malformed_configs(text, needle, tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(text)
    code, _, err = _run(capsys, "run", str(cfg))
    assert code == 1
    assert needle in err


def test_missing_file_exit_1(capsys):
    assert _run(capsys, "run", "/nonexistent/config.toml")[0] == 1


def test_infeasible_exit_2(capsys):
    code, _, err = _run(capsys, "run", "fig2", "--set", "experiment.rho_u_db=200.0")
    assert code == 2
    assert "numerical failure" in err


def test_overrides_apply(capsys):
    code, out, _ = _run(capsys, "run", "default", "--set", "eavesdroppers.intensity_per_m2=0.1", "--out", "-")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["lambda_E"]) == 0.1


def test_sweep_override(capsys):
    code, out, _ = _run(capsys, "run", "default", "--set", "sweep.experiment.c_th_bits=[0.5, 1.0, 2.0]", "--out", "-")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["C_th"]) for r in rows] == [0.5, 1.0, 2.0]
    ups = [float(r["sop_upper_cf"]) for r in rows]
    assert ups == sorted(ups)


@pytest.mark.parametrize("name", list(PRESETS) + ["default"])
def test_dump_config_round_trip(name, capsys):
    cfg = load_config(name)
    assert parse_config(dump_config(cfg)) == cfg
    code, out, _ = _run(capsys, "dump-config", name)
    assert code == 0
    assert parse_config(out) == cfg


def test_select_and_beamform_modes(capsys):
    code, out, _ = _run(capsys, "run", "fig2", "--set", 'experiment.mode="select"', "--set", "experiment.objective=", "--out", "-")
    assert code == 1  # objective is not a select key
    raw = "\n".join(
        [
            "[room]\nlength_m = 8.0\nwidth_m = 8.0",
            '[layout]\nkind = "explicit"\npositions_m = [[2.5, 0.0], [-2.5, 0.0]]',
            '[experiment]\nmode = "select"\nue_m = [2.0, 1.0]\nrho_u_db = 40.0',
        ]
    )
    cfg = parse_config(raw)
    assert cfg["experiment"]["mode"] == "select"


def test_write_csv_quotes_and_types():
    buf = io.StringIO()
    write_csv([{"a": 1.5, "b": "x,y", "c": True}, {"a": float("nan"), "d": 2}], buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "a,b,c,d"
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[1] == ["1.5", "x,y", "true", ""]
    assert rows[2] == ["nan", "", "", "2"]


def test_config_errors_are_value_errors():
    with pytest.raises(ConfigError):
        parse_config("[drive]\nmod_index = true\n")
