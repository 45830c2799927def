import csv
import re

import numpy as np
import pytest

from qprobe import cli
from qprobe.config import load_config
from qprobe.fisher import maximize_qfi_numeric

NUM = re.compile(r"^-?\d(\.\d+)?(e[+-]\d+)?$|^-?\d+(\.\d+)?(e[+-]\d+)?$")


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.reader(fh))


def _sig_digits(text):
    mant = text.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
    return len(mant)


def test_fmt():
    assert cli.fmt(1 / 3) == "0.333333333333"
    assert cli.fmt(2.0) == "2"
    assert cli.fmt(np.float64(1e-20) / 3) == "3.33333333333e-21"
    assert cli.fmt(True) == "1" and cli.fmt(7) == "7"
    assert cli.fmt(float("inf")) == "inf" and cli.fmt(float("nan")) == "nan"


def test_constants_ok(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["constants", "--out", str(out)]) == 0
    rows = _read(out)
    assert rows[0] == ["name", "value", "reference", "tolerance", "pass"]
    vals = {r[0]: r for r in rows[1:]}
    assert float(vals["J0"][1]) == pytest.approx(0.796812, abs=1e-6)
    assert vals["J0"][4] == "1"
    for r in rows[1:]:
        assert NUM.match(r[1]) and _sig_digits(r[1]) <= 12


def test_constants_to_stdout(capsys):
    assert cli.main(["constants"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first == "name,value,reference,tolerance,pass"


def test_self_check_failure_exits_3(monkeypatch, tmp_path):
    monkeypatch.setitem(cli.SELF_CHECKS, "J0", (0.5, 1e-6))
    assert cli.main(["constants", "--out", str(tmp_path / "c.csv")]) == 3


def test_bad_config_exits_2(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[spectrum]\ng = -2\n")
    assert cli.main(["qfi-scan", "--config", str(bad)]) == 2
    assert cli.main(["qfi-scan", "--config", str(tmp_path / "missing.ini")]) == 2


def test_kind_mismatch_exits_2():
    assert cli.main(["qfi-scan", "--config", "configs/fig4ab.ini"]) == 2


def test_bad_flags_exit_2(tmp_path):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[experiment]\nkind = qfi-scan\n")
    assert cli.main(["qfi-scan", "--config", str(cfg), "--threads", "0"]) == 2
    assert cli.main(["qfi-scan", "--config", str(cfg), "--seed", str(2 ** 64)]) == 2


def test_unreachable_setup_exits_2(tmp_path):
    cfg = tmp_path / "a.ini"
    # passes config validation but the adaptive runner rejects a grid this small
    cfg.write_text("[experiment]\nkind = adaptive\n[estimation]\ngrid_size = 8\nn_measurements = 1\nrealizations = 1\n")
    assert cli.main(["adaptive", "--config", str(cfg), "--out", str(tmp_path / "a.csv")]) == 2


def test_qfi_scan_argmax_row(tmp_path):
    cfg = tmp_path / "q.ini"
    cfg.write_text(
        "[experiment]\nkind = qfi-scan\n[spectrum]\ng = 1\ntau_c = 10\n[control]\nkind = CPMG\nn = 8\n"
        "[scan]\nt_min = 1\nt_max = 200\nn_points = 120\n"
    )
    out = tmp_path / "q.csv"
    assert cli.main(["qfi-scan", "--config", str(cfg), "--out", str(out), "--plot"]) == 0
    rows = _read(out)
    assert rows[0] == ["t", "coherence", "J", "QFI", "relative_error", "argmax"]
    flagged = [r for r in rows[1:] if r[5] == "1"]
    assert len(flagged) == 1
    rep = maximize_qfi_numeric(cli._model(load_config(cfg)), (1.0, 200.0), n_grid=120)
    assert float(flagged[0][0]) == pytest.approx(rep.t_opt, rel=1e-11)
    ts = [float(r[0]) for r in rows[1:]]
    assert ts == sorted(ts)
    assert (tmp_path / "q.png").stat().st_size > 1000


SMALL_ADAPTIVE = """[experiment]
kind = adaptive
[spectrum]
g = 1
tau_c = 10
[control]
kind = CPMG
n = 8
[estimation]
backend = exact
n_measurements = 12
realizations = 3
grid_size = 128
n_candidates = 40
seed = 99
baseline = FID
"""


def test_adaptive_outputs_and_reproducibility(tmp_path):
    cfg = tmp_path / "a.ini"
    cfg.write_text(SMALL_ADAPTIVE)
    a, b = tmp_path / "a1.csv", tmp_path / "a2.csv"
    assert cli.main(["adaptive", "--config", str(cfg), "--out", str(a), "--plot"]) == 0
    assert cli.main(["adaptive", "--config", str(cfg), "--out", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a1_ensemble.csv").read_bytes() == (tmp_path / "a2_ensemble.csv").read_bytes()
    rows = _read(a)
    assert rows[0] == cli.TRAJ_HEADER
    assert len(rows) == 1 + 2 * 3 * 12
    assert {r[0] for r in rows[1:]} == {"CPMG8", "FID"}
    ens = _read(tmp_path / "a1_ensemble.csv")
    assert ens[0] == cli.ENS_HEADER and len(ens) == 1 + 2 * 12
    assert (tmp_path / "a1.png").exists()


def test_seed_flag_changes_outcomes(tmp_path):
    cfg = tmp_path / "a.ini"
    cfg.write_text(SMALL_ADAPTIVE.replace("baseline = FID\n", ""))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["adaptive", "--config", str(cfg), "--out", str(a)])
    cli.main(["adaptive", "--config", str(cfg), "--out", str(b), "--seed", "100"])
    assert a.read_bytes() != b.read_bytes()


def test_header_present_for_empty_adaptive(tmp_path):
    cfg = tmp_path / "a.ini"
    cfg.write_text(SMALL_ADAPTIVE.replace("n_measurements = 12", "n_measurements = 0"))
    out = tmp_path / "e.csv"
    assert cli.main(["adaptive", "--config", str(cfg), "--out", str(out)]) == 0
    assert _read(out) == [cli.TRAJ_HEADER]
    assert _read(tmp_path / "e_ensemble.csv") == [cli.ENS_HEADER]


def test_bound_sweep_small(tmp_path):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[experiment]\nkind = bound-sweep\n[sweep]\ng_tau = 1\n")
    out = tmp_path / "s.csv"
    assert cli.main(["bound-sweep", "--config", str(cfg), "--out", str(out), "--plot"]) == 0
    rows = _read(out)
    assert rows[0] == cli.SWEEP_HEADER and len(rows) == 5
    by = {(r[1], r[2]): float(r[9]) for r in rows[1:]}
    assert by[("ou_beta2", "CPMG")] == pytest.approx(1.0, abs=0.03)
    assert by[("ohmic_s2", "CW")] == pytest.approx(1.0, abs=0.03)
    assert by[("ou_beta2", "FID")] > 1.0
