import json

import pytest

from hardylab import cli

FAST_EPS = "0.01, 0.005, 0.002, 0.001"


def run(tmp_path, *args):
    return cli.main([*args, "--out-dir", str(tmp_path)])


def read_json(path):
    doc = json.loads(path.read_text())
    doc.pop("metadata")
    return doc


def test_quad_selftest_passes_and_writes_outputs(tmp_path, capsys):
    assert run(tmp_path, "quad-selftest") == cli.EXIT_PASS
    assert "PASS" in capsys.readouterr().out
    doc = json.loads((tmp_path / "quad-selftest.json").read_text())
    assert doc["verdict"] == "pass"
    assert doc["files"] == ["quad-selftest-cases.csv"]
    assert set(doc["metadata"]) == {"timestamp", "version"}
    raw = (tmp_path / "quad-selftest-cases.csv").read_bytes()
    assert raw.startswith(b"case,beta,s2,exact,computed,relative_error\r\n")
    assert raw.count(b"\r\n") == 51


def test_runs_are_byte_identical(tmp_path):
    # same output directory both times, since it is echoed in the resolved config
    snaps = []
    for _ in range(2):
        assert run(tmp_path, "verify-constant", "--eps", FAST_EPS, "--seed", "5") == 0
        snaps.append(((tmp_path / "verify-constant-constant.csv").read_bytes(),
                      read_json(tmp_path / "verify-constant.json")))
    assert snaps[0] == snaps[1]


def test_seed_changes_random_tables(tmp_path):
    run(tmp_path / "s0", "quad-selftest", "--seed", "0")
    run(tmp_path / "s1", "quad-selftest", "--seed", "1")
    assert (tmp_path / "s0" / "quad-selftest-cases.csv").read_bytes() != \
        (tmp_path / "s1" / "quad-selftest-cases.csv").read_bytes()


def test_config_file_then_flags_then_set(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[params]\np = 3\nk = 5\nN = 5\n[sweep]\ntheta = 0.6\n[quad]\ncases = 7\n")
    assert cli.main(["quad-selftest", "--config", str(ini), "--p", "2.5",
                     "--set", "quad.cases=4", "--out-dir", str(tmp_path)]) == 0
    cfg = json.loads((tmp_path / "quad-selftest.json").read_text())["config"]
    assert cfg["params"]["p"] == "2.5"
    assert cfg["params"]["k"] == "5"
    assert cfg["sweep"]["theta"] == "0.6"
    assert cfg["quad"]["cases"] == "4"
    assert cfg["run"]["out_dir"] == str(tmp_path)


def test_blank_scale_resolves_to_e_times_delta(tmp_path):
    run(tmp_path, "verify-constant", "--eps", FAST_EPS)
    cfg = json.loads((tmp_path / "verify-constant.json").read_text())["config"]
    assert float(cfg["params"]["D"]) == pytest.approx(2.718281828459045)


@pytest.mark.parametrize(
    "args",
    [
        ("quad-selftest", "--set", "nonsense"),
        ("quad-selftest", "--config", "/nonexistent/file.ini"),
        ("quad-selftest", "--set", "quad.cases=lots"),
        ("verify-constant", "--p", "0.5"),
        ("weak-norm-failure", "--p", "2", "--k", "3", "--N", "3", "--theta", "0.2"),
        ("sobolev-check", "--p", "2", "--k", "2", "--N", "3"),
    ],
)
def test_configuration_errors_exit_2(tmp_path, capsys, args):
    assert run(tmp_path, *args) == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    assert not (tmp_path / f"{args[0]}.json").exists()


def test_failing_verdict_exits_1(tmp_path):
    # an impossible tolerance forces a fail verdict
    assert run(tmp_path, "quad-selftest", "--set", "thresholds.quad_rtol=0", "--set", "quad.cases=3") == cli.EXIT_FAIL
    assert json.loads((tmp_path / "quad-selftest.json").read_text())["verdict"] == "fail"


def test_violated_condition_is_a_successful_report(tmp_path, capsys):
    code = run(tmp_path, "check-condition-c", "--p", "3", "--k", "2", "--N", "3", "--variant", "canal",
               "--set", "geometry.side=outer", "--set", "geometry.n_samples=40")
    assert code == cli.EXIT_PASS
    assert "violated" in capsys.readouterr().out
    assert json.loads((tmp_path / "check-condition-c.json").read_text())["results"]["verdict"] == "violated"


def test_hp_optimality_both_sides(tmp_path):
    assert run(tmp_path / "lo", "hp-optimality", "--beta", "1.2", "--eps", FAST_EPS) == 0
    assert run(tmp_path / "hi", "hp-optimality", "--beta", "1.6", "--theta", "0.8", "--eps", FAST_EPS) == 0
    lo = json.loads((tmp_path / "lo" / "hp-optimality.json").read_text())
    assert "fails" in lo["verdict_line"]


def test_json_written_last_lists_every_csv(tmp_path):
    run(tmp_path, "verify-pk", "--p", "2", "--k", "2", "--N", "2", "--theta", "0.51", "--eps", FAST_EPS)
    doc = json.loads((tmp_path / "verify-pk.json").read_text())
    assert sorted(doc["files"]) == sorted(p.name for p in tmp_path.glob("*.csv"))
    newest_csv = max(p.stat().st_mtime_ns for p in tmp_path.glob("*.csv"))
    assert (tmp_path / "verify-pk.json").stat().st_mtime_ns >= newest_csv
