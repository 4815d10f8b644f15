from __future__ import annotations

import dataclasses
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from fixedloci import cli
from fixedloci.corpus import bundled_corpus, dump_corpus, generate_corpus, negative_control

# (argv, schema name or None); json payloads are validated against the schema
COMMANDS = [
    (["snf", "--matrix", "2,1;0,3", "--format", "json"], "snf"),
    (["snf", "--matrix", "2,4,4;-6,6,12;10,-4,-16"], None),
    (["torus-kernel", "--matrix", "2,0;0,4", "--format", "json"], "torus-kernel"),
    (["torus-kernel", "--matrix", "2,1;0,3", "--format", "csv"], None),
    (["extension", "--group", "C4", "--r", "2", "--iota", "0,2", "--M", "3"], "extension"),
    (["extension", "--group", "Q8", "--r", "2", "--iota", "0,1", "--M", "2", "--format", "md"], None),
    (["gp-graphs", "--g", "0", "--n", "0", "--N", "1", "--d", "2", "--weights", "0,1"], "gp-graphs"),
    (["gp-graphs", "--g", "1", "--n", "1", "--N", "2", "--d", "2", "--format", "md"], None),
    (["gerbe", "kummer", "--pic", "Z", "--L", "5", "--r", "3", "--format", "json"], "gerbe"),
    (["gerbe", "kummer", "--pic", "Z", "--L", "3", "--r", "4", "--twist", "1", "--format", "json"], "gerbe"),
    (["gerbe", "add", "--pic", "Z x Z/2", "--a", "1,1", "--b", "1,0", "--r", "2", "--format", "json"], "gerbe"),
    (["verify-theorem", "--format", "json"], "verify-theorem"),
    (["verify-theorem", "--seed", "3", "--dump-corpus"], None),
]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def schema(name):
    return json.loads(resources.files("fixedloci").joinpath(f"schemas/{name}.json").read_text())


@pytest.fixture(scope="module")
def outputs():
    """Every command run twice in-process; stdout captured by swapping sys.stdout."""
    import io
    from contextlib import redirect_stdout

    results = {}
    for argv, _ in COMMANDS:
        pair = []
        for _ in range(2):
            buf = io.StringIO()
            with redirect_stdout(buf):
                code = cli.main(argv)
            pair.append((code, buf.getvalue()))
        results[tuple(argv)] = pair
    return results


# ---------------------------------------------------------------- examples


def test_torus_kernel_example(capsys):
    assert run(["torus-kernel", "--matrix", "2,0;0,4"], capsys)[:2] == (0, "mu_2 x mu_4\n")


def test_gp_graphs_example(capsys):
    code, out, _ = run(["gp-graphs", "--g", "0", "--n", "0", "--N", "1", "--d", "2", "--weights", "0,1",
                        "--format", "json"], capsys)
    assert code == 0
    assert [rep["r"] for rep in json.loads(out)] == [2, 1, 1]


def test_gerbe_example(capsys):
    code, out, _ = run(["gerbe", "kummer", "--pic", "Z", "--L", "5", "--r", "3"], capsys)
    assert code == 0 and out == "(e0: 2) mod 3\n"
    code, out, _ = run(["gerbe", "kummer", "--pic", "Z", "--L", "6", "--r", "3", "--format", "json"], capsys)
    assert json.loads(out)["trivial"] is True


def test_snf_json(capsys):
    code, out, _ = run(["snf", "--matrix", "2,4,4;-6,6,12;10,-4,-16", "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["factors"] == [2, 6, 12]


def test_verify_theorem_bundled(capsys):
    code, out, _ = run(["verify-theorem"], capsys)
    assert code == 0
    assert out.rstrip().endswith("38 cases: 38 passed, 0 failed, 0 rejected")


def test_verify_theorem_corpus_file(tmp_path, capsys):
    path = tmp_path / "cases.json"
    path.write_text(dump_corpus(bundled_corpus()[:3] + [negative_control()]))
    code, out, _ = run(["verify-theorem", "--corpus", str(path), "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["summary"]["passed"] == 3 and data["summary"]["rejected"] == 1
    rejected = data["cases"][-1]
    assert rejected["status"] == "rejected" and rejected["condition"] == "extension data"


def test_empty_corpus(tmp_path, capsys):
    path = tmp_path / "empty.json"
    path.write_text("[]")
    code, out, _ = run(["verify-theorem", "--corpus", str(path), "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["summary"]["total"] == 0


def test_parallel_matches_serial():
    cases = bundled_corpus()[:6]
    assert cli.run_corpus(cases, jobs=2) == cli.run_corpus(cases, jobs=1)


def test_bundled_corpus_is_seed_zero():
    cases = bundled_corpus()
    assert cases == generate_corpus(0)
    assert len(cases) >= 30
    assert {c["group"] for c in cases} == {"C2", "C4", "C6", "C2xC2", "C2xC4", "Q8", "D4"}
    assert {c["M"] for c in cases} == {2, 3, 4}
    assert any(c["U_size"] > 1 for c in cases) and max(c["U_size"] for c in cases) <= 6
    assert [2, 4] in [c["r"] for c in cases]


# ---------------------------------------------------------------- exit codes


@pytest.mark.parametrize("argv, needle", [
    (["snf", "--matrix", "1,2;3"], "matrix"),
    (["torus-kernel", "--matrix", "1,2;2,4"], "matrix"),
    (["extension", "--group", "C4", "--r", "2", "--iota", "0,1", "--M", "2"], "iota"),
    (["extension", "--group", "C4", "--r", "2", "--iota", "0,2", "--M", "1"], "'M'"),
    (["extension", "--group", "Z9", "--r", "2", "--iota", "0,1", "--M", "2"], "group"),
    (["gp-graphs", "--g", "0", "--n", "0", "--N", "1", "--d", "1", "--weights", "0,1,2"], "weights"),
    (["gp-graphs", "--g", "0", "--n", "0", "--N", "1", "--d", "1", "--weights", "1,1"], ""),
    (["gerbe", "kummer", "--pic", "Z", "--L", "x", "--r", "2"], "L"),
    (["gerbe", "kummer", "--pic", "Z", "--L", "1", "--r", "0"], "'r'"),
    (["verify-theorem", "--corpus", "/nonexistent/cases.json"], "corpus"),
])
def test_input_errors_exit_1(argv, needle, capsys):
    code, out, err = run(argv, capsys)
    assert code == 1 and out == ""
    assert err.startswith("error:") and needle in err


def test_malformed_case_names_field(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([{"group": "C2", "r": [2], "iota": [0, 1], "U_size": 1}]))
    code, _, err = run(["verify-theorem", "--corpus", str(path)], capsys)
    assert code == 1 and "'M'" in err


def test_resource_bound_exit_2(capsys, monkeypatch):
    code, out, err = run(["gp-graphs", "--g", "1", "--n", "1", "--N", "2", "--d", "4", "--cap", "10"], capsys)
    assert code == 2 and out == "" and "resource bound" in err
    monkeypatch.setenv("FIXEDLOCI_CAP", "2")
    assert run(["gp-graphs", "--g", "0", "--n", "0", "--N", "1", "--d", "2"], capsys)[0] == 2


def test_theorem_failure_exit_3(monkeypatch, capsys):
    real = cli.verify_main_theorem

    def sabotaged(case):
        return dataclasses.replace(real(case), restriction_ok=False)

    monkeypatch.setattr(cli, "verify_main_theorem", sabotaged)
    code, out, _ = run(["verify-theorem", "--format", "json"], capsys)
    assert code == 3
    summary = json.loads(out)["summary"]
    assert summary["failed"] == 38 and summary["per_check"]["restriction_ok"]["fail"] == 38


# ---------------------------------------------------------------- schemas and determinism


@pytest.mark.parametrize("argv, name", [c for c in COMMANDS if c[1]], ids=lambda x: x if isinstance(x, str) else None)
def test_json_payload_matches_schema(argv, name, outputs):
    code, out = outputs[tuple(argv)][0]
    assert code == 0
    jsonschema.validate(json.loads(out), schema(name))


def test_corpus_files_match_case_schema():
    case_schema = schema("case")
    for case in bundled_corpus() + [negative_control()]:
        jsonschema.validate(case, case_schema)


@pytest.mark.parametrize("argv", [c[0] for c in COMMANDS], ids=lambda a: " ".join(a[:2]))
def test_output_is_deterministic(argv, outputs):
    first, second = outputs[tuple(argv)]
    assert first == second
    assert first[0] == 0 and first[1]


def test_console_scripts():
    out = subprocess.run([sys.executable, "-m", "fixedloci", "torus-kernel", "--matrix", "2,1;0,3"],
                         capture_output=True, text=True, check=True).stdout
    assert out == "mu_6\n"
    assert cli.gerbe_main(["kummer", "--pic", "Z", "--L", "4", "--r", "2"]) == 0
    assert cli.gp_graphs_main(["--g", "0", "--n", "0", "--N", "1", "--d", "1"]) == 0
