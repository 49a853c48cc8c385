import json
import math

import pytest

from saflab.cli import PRESETS, ExperimentConfig, main, parse_curve, preset, run
from saflab.errors import ConfigError


@pytest.mark.parametrize("name", PRESETS)
def test_presets_build_and_roundtrip(name):
    cfg = preset(name, seed=3, n_samples=5000, out="x")
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()


def test_preset_contents():
    f5 = preset("fig5")
    assert [s.label for s in f5.schemes] == ["noncoop", "naf_N2", "saf_M3_dumb"]
    assert len(f5.schemes) * len(f5.rates_bpcu) == 9
    assert f5.snr_db[0] == 0 and f5.snr_db[-1] == 50
    f7 = preset("fig7")
    assert [s.n_slots for s in f7.schemes] == [3, 5, 9, 13] and f7.rates_bpcu == [2, 6]
    f8 = preset("fig8")
    assert f8.reference.kind == "noncoop" and f8.inter_relay_gain_db == [-20, -10, 0, 10, 20]
    f9 = preset("fig9")
    assert f9.stats.n_relays == 12 and f9.reference.kind == "relay_selection_naf"
    assert {s.scheduling for s in f9.schemes} == {"dumb", "smart"}
    f4 = preset("fig4")
    assert "lp:2r3s" in f4.curves and "lp:2r3s-unordered" in f4.curves
    assert preset("fig1").notes


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("fig2")


def test_parse_curve():
    assert parse_curve("ub:2,3")(11)(0.0) == pytest.approx(3.0)
    assert parse_curve("lp:genie:1,2")(11)(0.5) == pytest.approx(0.5)
    for bad in ("ub:2", "lp:nothing", "sky", "miso:x"):
        with pytest.raises(ConfigError):
            parse_curve(bad)


@pytest.mark.parametrize(
    "patch",
    [
        {"schemes": []},
        {"snr_db": [10, 5]},
        {"n_samples": 10},
        {"seed": -1},
        {"kind": "weird"},
        {"extra": 1},
        {"schemes": [{"kind": "noncoop"}, {"kind": "noncoop"}]},
        {"stats": {"n_relays": 2}},
        {"rates_bpcu": "abc"},
    ],
)
def test_config_rejections(patch):
    d = preset("fig5", n_samples=2000).to_dict()
    d.update(patch)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d)


def test_gain_kinds_need_reference():
    d = preset("fig9", n_samples=2000).to_dict()
    del d["reference"]
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d)
    d = preset("fig8", n_samples=2000).to_dict()
    d["inter_relay_gain_db"] = []
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d)


def _write(tmp_path, d):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(d))
    return str(p)


def test_exit_codes(tmp_path, capsys):
    d = preset("fig5", n_samples=2000, out=str(tmp_path / "o")).to_dict()
    d["schemes"] = []
    assert main(["run", _write(tmp_path, d)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 1
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    assert main(["dmt", "lp:bogus"]) == 1
    assert main(["dmt", "ub:2,3", "--grid", "5"]) == 1
    with pytest.raises(SystemExit):
        main(["preset", "fig2"])


def test_outage_sweep_outputs(tmp_path):
    out = tmp_path / "sweep"
    d = {
        "kind": "outage_sweep",
        "stats": {"symmetric": {"n_relays": 2}},
        "schemes": [{"kind": "noncoop"}, {"kind": "sequential_saf", "n_slots": 3}],
        "snr_db": [0, 10, 20],
        "rates_bpcu": [2, 4],
        "n_samples": 3000,
        "seed": 11,
        "output": str(out),
    }
    assert main(["run", _write(tmp_path, d)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == sorted(
        ["manifest.json", "noncoop_R2.csv", "noncoop_R4.csv", "saf_M3_dumb_R2.csv", "saf_M3_dumb_R4.csv"]
    )
    lines = (out / "noncoop_R2.csv").read_text().splitlines()
    assert lines[0] == "snr_db,outage,stderr,n_samples"
    assert len(lines) == 4
    s, p, se, n = lines[2].split(",")
    assert float(s) == 10.0 and int(n) == 3000 and 0 < float(p) < 1
    assert b"\r" not in (out / "noncoop_R2.csv").read_bytes()
    m = json.loads((out / "manifest.json").read_text())
    assert m["seed"] == 11 and len(m["config_sha256"]) == 64
    assert set(m["files"]) == set(files) - {"manifest.json"}
    assert {"saflab", "numpy", "python"} <= set(m["versions"])


def test_scheduling_compare_outputs(tmp_path):
    cfg = ExperimentConfig.from_dict(
        {
            "kind": "scheduling_compare",
            "stats": {"symmetric": {"n_relays": 3}},
            "schemes": [{"kind": "sequential_saf", "n_slots": 3, "scheduling": s} for s in ("dumb", "smart")],
            "reference": {"kind": "relay_selection_naf"},
            "snr_db": [0, 10, 20, 30],
            "rates_bpcu": [2],
            "target_pout": 0.1,
            "n_samples": 2000,
            "output": str(tmp_path),
        }
    )
    paths = run(cfg)
    assert paths[-1].name == "manifest.json"
    rows = (tmp_path / "gains.csv").read_text().splitlines()
    assert rows[0] == "scheme,rate_bpcu,power_gain_db"
    assert len(rows) == 3 and all(math.isfinite(float(r.split(",")[2])) for r in rows[1:])
    assert (tmp_path / "ref_selection_naf_R2.csv").exists()
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert any("n_samples" in w for w in m["warnings"])


def test_power_gain_sweep_outputs(tmp_path):
    cfg = ExperimentConfig.from_dict(
        {
            "kind": "power_gain_sweep",
            "stats": {"symmetric": {"n_relays": 2}},
            "schemes": [{"kind": "sequential_saf", "n_slots": 3}],
            "reference": {"kind": "noncoop"},
            "snr_db": [0, 10],
            "rates_bpcu": [2],
            "inter_relay_gain_db": [-10, 10],
            "target_pout": 1e-4,
            "n_samples": 1000,
            "output": str(tmp_path),
        }
    )
    run(cfg)
    rows = (tmp_path / "gains.csv").read_text().splitlines()
    assert rows[0] == "inter_relay_gain_db,scheme,rate_bpcu,power_gain_db"
    assert len(rows) == 3
    # 1e-4 is never reached on this grid: nan plus a warning
    assert all(r.endswith("nan") for r in rows[1:])
    assert (tmp_path / "G-10dB_saf_M3_dumb_R2.csv").exists()
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert any("does not cross" in w for w in m["warnings"])


def test_dmt_run_and_command(tmp_path, capsys):
    out = tmp_path / "f4"
    assert main(["preset", "fig4", "--out", str(out)]) == 0
    lines = (out / "dmt_lp_2r3s.csv").read_text().splitlines()
    assert lines[0] == "r,d" and len(lines) == 102
    m = json.loads((out / "manifest.json").read_text())
    assert m["breakpoints"]["ub:2,3"][0] == [0.0, 3.0]
    capsys.readouterr()
    assert main(["dmt", "ub:2,3", "--grid", "11"]) == 0
    text = capsys.readouterr().out.splitlines()
    assert text[0] == "r,d" and len(text) == 12 and text[1] == "0.0,3.0"
    assert main(["dmt", "lp:2r3s", "--listing"]) == 0
    assert "max{M*r" in capsys.readouterr().out
    assert main(["dmt", "ub:2,3", "--listing"]) == 1


def test_dump_config(capsys):
    assert main(["preset", "fig9", "--dump-config", "--samples", "5000"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["kind"] == "scheduling_compare" and d["n_samples"] == 5000


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["preset", "fig5", "--samples", "2000", "--seed", "4", "--out", str(out)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert len(names) == 10
    for n in names:
        if n != "manifest.json":
            assert (a / n).read_bytes() == (b / n).read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["files"] == mb["files"]
