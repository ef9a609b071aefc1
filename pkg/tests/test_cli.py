import json

import pytest

from qelab.cli import main


def run_cli(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out.read_bytes()


def test_identical_seed_identical_bytes(tmp_path):
    args = ["game", "--game", "ind", "--scheme", "identity", "--n", "1",
            "--qubits", "1", "--exact", "--seed", "9"]
    code1, blob1 = run_cli(args, tmp_path, "a.json")
    code2, blob2 = run_cli(args, tmp_path, "b.json")
    assert code1 == code2 == 0
    assert blob1 == blob2
    sampled = ["game", "--game", "ind", "--scheme", "ske-prf", "--n", "2",
               "--qubits", "1", "--trials", "50", "--seed", "4"]
    _, blob3 = run_cli(sampled, tmp_path, "c.json")
    _, blob4 = run_cli(sampled, tmp_path, "d.json")
    assert blob3 == blob4


def test_game_reports_exact_advantage(tmp_path):
    code, blob = run_cli(
        ["game", "--game", "ind", "--scheme", "identity", "--n", "1", "--qubits", "1",
         "--exact", "--seed", "2"],
        tmp_path,
    )
    doc = json.loads(blob)
    assert code == 0
    row = doc["results"][0]
    assert row["advantage"] == 1.0 and row["exact"] is True
    assert doc["schema_version"] == 1


def test_unknown_game_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["game", "--game", "nope", "--scheme", "identity"])
    assert err.value.code == 2


def test_incompatible_bundle_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["game", "--game", "sem", "--scheme", "identity", "--adversary", "readout"])
    assert err.value.code == 2


def test_no_command_prints_help():
    assert main([]) == 2


def test_list_outputs_registries(capsys):
    assert main(["list"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert any("schemes" in row for row in doc["results"])
    assert main(["--list"]) == 0


def test_correctness_pass_and_fail(tmp_path):
    code, blob = run_cli(
        ["correctness", "--scheme", "ske-prf", "--n", "2", "--qubits", "1",
         "--keys", "3", "--seed", "3"],
        tmp_path,
    )
    assert code == 0 and json.loads(blob)["pass"] is True
    code, blob = run_cli(
        ["correctness", "--scheme", "ske-prf-skipdec", "--n", "2", "--qubits", "1",
         "--keys", "4", "--seed", "3"],
        tmp_path,
    )
    doc = json.loads(blob)
    assert code == 1 and doc["pass"] is False
    worst = max(r.get("choi_distance", 0.0) for r in doc["results"])
    assert worst >= 0.5


def test_correctness_embeds_serialization_fixture(tmp_path):
    code, blob = run_cli(
        ["correctness", "--scheme", "pke-towp", "--n", "2", "--qubits", "1",
         "--keys", "2", "--seed", "5"],
        tmp_path,
    )
    doc = json.loads(blob)
    fixture = [r for r in doc["results"] if r.get("fixture") == "ciphertext-serialization"]
    assert fixture and fixture[0]["pass"] is True
    assert "tag_b64" in fixture[0]["ciphertext"]


def test_qotp_mix_battery_and_pad_table(tmp_path):
    code, blob = run_cli(["qotp-mix", "--qubits", "1", "--seed", "6"], tmp_path)
    doc = json.loads(blob)
    assert code == 0 and doc["pass"] is True
    mixing = [r for r in doc["results"] if "state" in r]
    assert len(mixing) >= 5
    assert all(r["distance_from_mixed"] <= 1e-10 for r in mixing)
    pads = {r["single_pad"]: r["distance_from_mixed"] for r in doc["results"] if "single_pad" in r}
    assert pads["00"] == 0.5 and pads["01"] == 0.5


def test_qotp_mix_empty_battery(tmp_path):
    code, blob = run_cli(
        ["qotp-mix", "--qubits", "2", "--seed", "6", "--battery", "none"], tmp_path
    )
    doc = json.loads(blob)
    assert code == 0 and doc["results"] == [] and doc["pass"] is True


def test_reduce_sem_to_ind_exact(tmp_path):
    code, blob = run_cli(
        ["reduce", "--reduction", "sem-to-ind", "--scheme", "identity", "--n", "1",
         "--qubits", "1", "--exact", "--seed", "7"],
        tmp_path,
    )
    doc = json.loads(blob)
    assert code == 0
    assert doc["results"][0]["identity_holds"] is True


def test_reduce_qotp_to_prg_exact(tmp_path):
    code, blob = run_cli(
        ["reduce", "--reduction", "qotp-to-prg", "--n", "2", "--qubits", "1",
         "--exact", "--seed", "8"],
        tmp_path,
    )
    doc = json.loads(blob)
    assert code == 0
    stage = {r["stage"]: r for r in doc["results"]}
    assert stage["constant-generator"]["p_ideal"] == 0.5
    assert stage["uniform-arm-half"]["holds"] is True


def test_reduce_cca1_needs_prf_scheme():
    with pytest.raises(SystemExit) as err:
        main(["reduce", "--reduction", "cca1-to-prf", "--scheme", "identity"])
    assert err.value.code == 2


def test_csv_mirror_written(tmp_path):
    out = tmp_path / "r.json"
    csv_path = tmp_path / "r.csv"
    code = main(
        ["qotp-mix", "--qubits", "1", "--seed", "10", "--out", str(out),
         "--csv", str(csv_path)]
    )
    assert code == 0
    text = csv_path.read_text()
    assert text.splitlines()[0].startswith("command,")
    assert "qotp-mix" in text


def test_correctness_on_undecryptable_scheme_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["correctness", "--scheme", "pke-uniformpad", "--n", "1",
              "--qubits", "1", "--keys", "1", "--seed", "2"])
    assert err.value.code == 2
