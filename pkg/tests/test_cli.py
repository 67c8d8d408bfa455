import json

import pytest

from cepskit.cli import main
from cepskit.generators import single_cycle, swap_example, with_single_block, \
    direct_product
from cepskit.system import save


@pytest.fixture
def swap_file(tmp_path):
    path = tmp_path / "swap.json"
    save(swap_example(), path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_validate_good(swap_file, capsys):
    code, report = run(capsys, "validate", "--system", swap_file)
    assert code == 0 and report["valid"]


def test_validate_bad_system(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"size": 2, "weights": ["1/2", "1/2"],
                                "blocks": [[0], [1]], "tau": [1, 0]}))
    code, report = run(capsys, "validate", "--system", str(path))
    assert code == 2
    assert not report["valid"]
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert "blocks-tau-invariant" in failed


def test_malformed_json_is_exit_3(tmp_path, capsys):
    path = tmp_path / "junk.json"
    path.write_text("{not json")
    code = main(["validate", "--system", str(path)])
    assert code == 3


def test_unknown_flag_is_exit_3(swap_file):
    assert main(["kac", "--system", swap_file, "--bogus"]) == 3


def test_gen_round_trip(tmp_path, capsys):
    out = tmp_path / "c7.json"
    code, report = run(capsys, "gen", "--kind", "cycle", "--m", "7",
                       "--out", str(out))
    assert code == 0 and report["written"] == str(out)
    data = json.loads(out.read_text())
    assert data["size"] == 7 and data["weights"][0] == "1/7"

    code, report = run(capsys, "kac", "--system", str(out), "--p", "0,3")
    assert code == 0
    assert report["equal"] is True
    assert report["Tn(p)"] == ["1"] * 7


def test_gen_random_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run(capsys, "gen", "--kind", "random", "--seed", "5", "--out", str(path))
    assert a.read_text() == b.read_text()


def test_gen_product_and_truncated(tmp_path, capsys):
    out = tmp_path / "prod.json"
    code, report = run(capsys, "gen", "--kind", "product", "--cycles", "7,9",
                       "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["size"] == 16
    code, report = run(capsys, "gen", "--kind", "product", "--truncated", "4",
                       "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["size"] == 10


def test_decompose_report_shape(tmp_path, capsys):
    path = tmp_path / "c5.json"
    save(single_cycle(5), path)
    code, report = run(capsys, "decompose", "--system", str(path), "--p", "0,2")
    assert code == 0
    assert report["p"] == [0, 2]
    assert report["parts"] == {"2": [2], "3": [0]}
    assert report["n_of_p"] == ["3", "0", "2", "0", "0"]
    assert report["kac_ok"] is True


def test_recurrent_command(tmp_path, capsys):
    path = tmp_path / "two.json"
    save(direct_product([single_cycle(3), single_cycle(4)]), path)
    code, report = run(capsys, "recurrent", "--system", str(path),
                       "--p", "0", "--q", "4")
    assert code == 0 and report["recurrent"] is False


def test_tower_command_with_csv(tmp_path, capsys):
    path = tmp_path / "c7.json"
    save(single_cycle(7), path)
    csv_path = tmp_path / "levels.csv"
    code, report = run(capsys, "tower", "--system", str(path), "--p", "0",
                       "--n", "3", "--csv", str(csv_path))
    assert code == 0
    assert report["base"] == [0, 4]
    assert report["certificate"]["holds"] is True
    assert report["certificate"]["lhs"] == ["6/7"] * 7
    assert csv_path.read_text().startswith("level,")


def test_tower_eps_pass_and_reject(tmp_path, swap_file, capsys):
    path = tmp_path / "c12.json"
    save(single_cycle(12), path)
    code, report = run(capsys, "tower-eps", "--system", str(path),
                       "--n", "2", "--eps", "1/5")
    assert code == 0 and report["residual"] == []

    code, report = run(capsys, "tower-eps", "--system", swap_file,
                       "--n", "3", "--eps", "1/4")
    assert code == 2
    assert report["kind"] == "NotAperiodicAtHorizon"


def test_tower_ls_command(tmp_path, capsys):
    merged = with_single_block(
        direct_product([single_cycle(12), single_cycle(12)])
    )
    path = tmp_path / "merged.json"
    save(merged, path)
    v = ",".join(str(i) for i in range(24))
    code, report = run(capsys, "tower-ls", "--system", str(path), "--v", v,
                       "--n", "2", "--eps", "1/5")
    assert code == 0
    assert report["certificate"]["name"] == "ls-residual-mass-bound"

    code, report = run(capsys, "tower-eps", "--system", str(path),
                       "--n", "2", "--eps", "1/5")
    assert code == 2 and report["kind"] == "NotConditionallyErgodic"


def test_aperiodic_command(tmp_path, capsys):
    path = tmp_path / "p35.json"
    save(direct_product([single_cycle(3), single_cycle(5)]), path)
    v = ",".join(str(i) for i in range(8))
    code, report = run(capsys, "aperiodic", "--system", str(path), "--v", v,
                       "--N", "3", "--mode", "both")
    assert code == 0
    assert report["results"] == {"criterion": True, "definitional": True}
    assert report["agree"]


def test_approx_manual_and_auto(tmp_path, capsys):
    c7 = tmp_path / "c7.json"
    save(single_cycle(7), c7)
    code, report = run(capsys, "approx", "--system", str(c7), "--manual",
                       "--p", "0", "--n", "3")
    assert code == 0
    assert report["tau_prime"] == [5, 1, 2, 3, 4, 6, 0]
    assert report["certificate"]["mode"] == "exhaustive"

    c100 = tmp_path / "c100.json"
    save(single_cycle(100), c100)
    code, report = run(capsys, "approx", "--system", str(c100), "--eps", "1/2",
                       "--samples", "10000")
    assert code == 0
    assert report["certificate"]["mode"] == "majorant+sampled"
    assert report["certificate"]["majorant"]["holds"] is True

    code, report = run(capsys, "approx", "--system", str(c7), "--eps", "1/2")
    assert code == 2  # 7-cycle is far too short for the auto construction


def test_suite_command_and_repro(capsys):
    code, report = run(capsys, "suite", "kac", "--trials", "5", "--seed", "9")
    assert code == 0
    assert report["passed"] == 5 and report["outcome"] == "pass"
    code, report = run(capsys, "suite", "all", "--trials", "1", "--seed", "0")
    assert code == 0 and report["total"] == 5


def test_suite_parallel_width(capsys, monkeypatch):
    monkeypatch.setenv("CEPSKIT_PARALLEL", "2")
    code, report = run(capsys, "suite", "poincare", "--trials", "8",
                       "--seed", "3")
    assert code == 0
    assert report["inputs"]["parallel_width"] == 2
    monkeypatch.delenv("CEPSKIT_PARALLEL")
    code, serial = run(capsys, "suite", "poincare", "--trials", "8",
                       "--seed", "3")
    report["timing_seconds"] = serial["timing_seconds"] = 0
    report["inputs"]["parallel_width"] = serial["inputs"]["parallel_width"]
    assert report == serial  # deterministic report modulo timing


def test_suite_failure_carries_repro_line(capsys, monkeypatch):
    from cepskit import suites

    def broken(suite, master_seed, index):
        return ["synthetic failure"] if index == 2 else []

    monkeypatch.setattr(suites, "run_trial", broken)
    code, report = run(capsys, "suite", "kac", "--trials", "4", "--seed", "11")
    assert code == 1 and report["outcome"] == "fail"
    (failure,) = report["failures"]
    assert failure["trial"] == 2
    assert failure["repro"] == ("cepskit suite kac --trials 1 --seed 11 "
                                "--first-trial 2")


def test_approx_csv_output(tmp_path, capsys):
    path = tmp_path / "c7.json"
    save(single_cycle(7), path)
    csv_path = tmp_path / "dist.csv"
    code, _ = run(capsys, "approx", "--system", str(path), "--manual",
                  "--p", "0", "--n", "3", "--csv", str(csv_path))
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "coordinate,worst_distance"
    assert len(lines) == 8


def test_env_seed_override(capsys, monkeypatch):
    monkeypatch.setenv("CEPSKIT_SEED", "77")
    code, report = run(capsys, "suite", "kac", "--trials", "2")
    assert report["inputs"]["seed"] == 77


def test_demo_paper_examples(capsys):
    code, report = run(capsys, "demo-paper-examples")
    assert code == 0
    assert report["outcome"] == "pass"
    names = [e["name"] for e in report["entries"]]
    assert "swap: Tp" in names and "7-cycle: tau'" in names


def test_report_out_flag(tmp_path, swap_file, capsys):
    out = tmp_path / "report.json"
    code, _ = run(capsys, "kac", "--system", swap_file, "--p", "0",
                  "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["equal"] is True


def test_force_load_for_counterexample_demo(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"size": 2, "weights": ["1/2", "1/2"],
                                "blocks": [[0], [1]], "tau": [1, 0]}))
    code, report = run(capsys, "decompose", "--system", str(path), "--p", "0")
    assert code == 2  # refused without --force
    code, report = run(capsys, "decompose", "--system", str(path), "--p", "0",
                       "--force")
    assert code == 0
    assert report["parts"] == {"2": [0]}
