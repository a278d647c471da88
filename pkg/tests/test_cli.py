import csv
import io
import json

import pytest

from quarticdual.cli import main
from quarticdual.instance import inst_a, inst_b, save_instance


@pytest.fixture
def ref_files(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_bytes(save_instance(inst_a()))
    b.write_bytes(save_instance(inst_b()))
    return a, b


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_writes_file_and_digest(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, stdout, _ = run(capsys, "gen", "--seed", "7", "--n", "3", "--N", "2", "--case", "unbiased",
                          "--out", str(out))
    assert code == 0
    assert len(stdout.strip()) == 64
    assert json.loads(out.read_text())["n"] == 3


def test_gen_deterministic(tmp_path, capsys):
    paths = [tmp_path / "x.json", tmp_path / "y.json"]
    for p in paths:
        run(capsys, "gen", "--seed", "7", "--n", "3", "--N", "2", "--out", str(p))
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_gen_rejects_zero_dimension(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "--seed", "1", "--n", "0", "--N", "2", "--out", str(tmp_path / "z"))
    assert code == 2
    assert "--n" in err


def test_certify_inst_a_well(ref_files, tmp_path, capsys):
    cert = tmp_path / "c.json"
    before = ref_files[0].read_bytes()
    code, out, _ = run(capsys, "certify", "--instance", str(ref_files[0]), "--x-init", "0.6",
                       "--out", str(cert))
    assert code == 0
    assert "item1_local_min" in out and "PASSED" in out
    doc = json.loads(cert.read_text())
    assert doc["gap_rel"] <= 1e-12
    assert ref_files[0].read_bytes() == before


def test_certify_inst_a_zero(ref_files, capsys):
    code, out, _ = run(capsys, "certify", "--instance", str(ref_files[0]), "--x-init", "zero",
                       "--samples", "500")
    assert code == 0 and "item3_local_max" in out


def test_certify_small_K_not_pd(ref_files, capsys):
    # INST-B: v0 = 1, so M = K - 2 < 0 at K = 1e-4
    code, _, err = run(capsys, "certify", "--instance", str(ref_files[1]), "--x-init", "0.7",
                       "--K", "0.0001", "--samples", "200")
    assert code == 3
    assert "M = K I - sum_j v0_j B_j" in err


def test_certify_small_K_inst_a_stays_pd(ref_files, capsys):
    # INST-A only produces v0 <= 0 at its critical points, so M = K + 2|v0| stays positive
    code, out, _ = run(capsys, "certify", "--instance", str(ref_files[0]), "--K", "0.0001",
                       "--samples", "200")
    assert code == 0
    assert "K             0.0001" in out


def test_certify_failed_certificate_exit_1(ref_files, capsys):
    code, out, _ = run(capsys, "certify", "--instance", str(ref_files[0]), "--x-init", "0.3",
                       "--max-iter", "1", "--samples", "100")
    assert code == 1 and "FAILED" in out


@pytest.mark.parametrize("argv", [
    ["--instance", "missing.json"],
    ["--x-init", "1,2"],
    ["--x-init", "random:abc"],
    ["--samples", "0"],
    ["--K", "-3"],
])
def test_certify_input_errors(ref_files, capsys, argv):
    if "--instance" not in argv:
        argv = ["--instance", str(ref_files[0])] + argv
    code, _, err = run(capsys, "certify", *argv)
    assert code == 2 and err


def test_certify_bad_instance_document(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1, "N": 1, "A": [[1]], "B": [[[2]]], "gamma": [1], "c": [1]}')
    code, _, err = run(capsys, "certify", "--instance", str(bad))
    assert code == 2 and "f: missing" in err


def test_certify_random_x_init(ref_files, capsys):
    code, out, _ = run(capsys, "certify", "--instance", str(ref_files[0]), "--x-init", "random:4",
                       "--samples", "200")
    assert code == 0


def _two_certs(ref_files, tmp_path, capsys):
    for name, inst, x in (("c1.json", ref_files[0], "0.6"), ("c2.json", ref_files[1], "0.7")):
        run(capsys, "certify", "--instance", str(inst), "--x-init", x, "--samples", "300",
            "--out", str(tmp_path / name))
    return [json.loads((tmp_path / n).read_text()) for n in ("c1.json", "c2.json")]


def test_report_text(ref_files, tmp_path, capsys):
    _two_certs(ref_files, tmp_path, capsys)
    code, out, _ = run(capsys, "report", "--certs", str(tmp_path / "c*.json"))
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 3
    assert "item1_local_min" in lines[1] and "item2_global_min" in lines[2]


def test_report_csv_round_trip(ref_files, tmp_path, capsys):
    docs = _two_certs(ref_files, tmp_path, capsys)
    code, out, _ = run(capsys, "report", "--certs", str(tmp_path / "c*.json"), "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    for row, doc in zip(rows, docs):
        assert float(row["gap_rel"]) == doc["gap_rel"]
        assert float(row["primal_value"]) == doc["primal_value"]
        assert float(row["margin_Aplus"]) == doc["membership"]["margin_Aplus"]
        assert row["case_label"] == doc["case_label"]


def test_report_empty_glob(tmp_path, capsys):
    code, out, err = run(capsys, "report", "--certs", str(tmp_path / "none*.json"))
    assert code == 0
    assert "warning" in err
    assert len(out.strip().splitlines()) == 1


def test_report_unreadable(tmp_path, capsys):
    (tmp_path / "c.json").write_text("not json")
    code, _, err = run(capsys, "report", "--certs", str(tmp_path / "c.json"))
    assert code == 2 and "c.json" in err
