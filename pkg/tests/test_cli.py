import json

import numpy as np
import pytest

from spectralball.cli import format_matrix, main, parse_matrix
from spectralball.decompose import parse_certificate
from spectralball.parsing import ParseError

HD1 = "d12: x12; d21: -x21"
THREE_TERMS = "CERT v1 input={h}\nTERM HD a=u1 + u2\nTERM BR_DT a=1/2 b=1\nTERM BR_DTp a=u3 b=y\nRESIDUAL 0\n"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def three_term_cert():
    from spectralball.decompose import CertificateTerm, field_hash, reconstruct
    from spectralball.parsing import parse_poly

    terms = [
        CertificateTerm("HD", parse_poly("u1 + u2", "invariant")),
        CertificateTerm("BR_DT", parse_poly("1/2", "invariant"), parse_poly("1", "fiber")),
        CertificateTerm("BR_DTp", parse_poly("u3", "invariant"), parse_poly("y", "fiber")),
    ]
    return THREE_TERMS.format(h=field_hash(reconstruct(terms)))


# -- decompose -----------------------------------------------------------------

def test_decompose_generator(capsys):
    code, out, _ = run(capsys, "decompose", HD1)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("CERT v1 input=")
    assert lines[1:] == ["TERM HD a=1", "RESIDUAL 0"]


def test_decompose_bracket_field(capsys):
    from spectralball.fields import GeneratorTerm, format_field, lie_bracket, make_generator
    from spectralball.parsing import parse_poly

    X = lie_bracket(make_generator(GeneratorTerm("HD", parse_poly("u1", "invariant"))),
                    make_generator(GeneratorTerm("HTp", parse_poly("1", "fiber"))))
    code, out, _ = run(capsys, "decompose", format_field(X))
    assert code == 0
    assert parse_certificate(out).reconstruct() == X


def test_decompose_non_orthogonal(capsys):
    code, _, err = run(capsys, "decompose", "d11: x11")
    assert code == 3
    assert "v4 + v1" in err


def test_decompose_parse_error(capsys):
    code, _, err = run(capsys, "decompose", "d11: x11 +")
    assert code == 2 and "parse error" in err


def test_decompose_degree_cap(capsys):
    from spectralball.decompose import random_orthogonal_field
    from spectralball.fields import format_field

    code, _, err = run(capsys, "decompose", "--degree-cap", "2", format_field(random_orthogonal_field(3, 6)))
    assert code == 3 and "degree cap" in err


def test_decompose_file_and_out(tmp_path, capsys):
    src = tmp_path / "field.txt"
    src.write_text(HD1 + "\n")
    dst = tmp_path / "cert.txt"
    code, out, _ = run(capsys, "decompose", str(src), "--out", str(dst))
    assert code == 0 and out == ""
    assert dst.read_text().endswith("RESIDUAL 0\n")


def test_decompose_machine(capsys):
    code, out, _ = run(capsys, "decompose", HD1, "--format", "machine")
    assert code == 0
    assert json.loads(out)["terms"] == ["TERM HD a=1"]


# -- flow ----------------------------------------------------------------------

def test_flow_three_terms(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text(three_term_cert())
    code, out, _ = run(capsys, "flow", str(path), "--format", "machine")
    assert code == 0
    rep = json.loads(out)
    assert [r["N"] for r in rep["rows"]] == [16, 64, 256, 1024]
    assert rep["slope"] >= 0.9
    assert all(r["drift"] <= 1e-10 for r in rep["rows"])


def test_flow_text_report(capsys):
    cert = three_term_cert().replace("\n", ";")
    code, out, _ = run(capsys, "flow", cert, "--N", "4", "8", "--probes", "3", "--t", "0.1")
    assert code == 0
    assert "spectrum_drift" in out and "```machine" in out


def test_flow_rejects_forged_certificate(capsys):
    forged = three_term_cert().replace("a=1/2", "a=1/3")
    code, _, err = run(capsys, "flow", forged)
    assert code == 1 and "certificate" in err


def test_flow_overflow(capsys):
    from spectralball.decompose import CertificateTerm, field_hash, reconstruct
    from spectralball.parsing import parse_poly

    t = CertificateTerm("BR_DT", parse_poly("9/2*u1*u3", "invariant"), parse_poly("1", "fiber"))
    text = f"CERT v1 input={field_hash(reconstruct([t]))}\n{t.to_text()}\nRESIDUAL 0\n"
    code, _, err = run(capsys, "flow", text, "--t", "40", "--N", "2")
    assert code == 3 and "step overflow" in err


def test_flow_bad_n(capsys):
    code, _, _ = run(capsys, "flow", three_term_cert(), "--N", "0")
    assert code == 3


# -- sample / eval -------------------------------------------------------------

def test_sample_is_deterministic(capsys):
    first = run(capsys, "sample", "0.3", "0.7", "--count", "5", "--seed", "42")
    second = run(capsys, "sample", "0.3", "0.7", "--count", "5", "--seed", "42")
    assert first == second and first[0] == 0
    mats = [parse_matrix(line) for line in first[1].strip().splitlines()]
    assert len(mats) == 5
    for M in mats:
        assert np.allclose(sorted(np.linalg.eigvals(M).real), [0.3, 0.7], atol=1e-10)


def test_sample_machine_and_errors(capsys):
    code, out, _ = run(capsys, "sample", "0", "0", "--count", "2", "--format", "machine")
    assert code == 0 and len(json.loads(out)) == 2
    assert run(capsys, "sample", "1.5", "0")[0] == 3
    assert run(capsys, "sample", "abc", "0")[0] == 2


def test_eval_empty_word(capsys):
    code, out, _ = run(capsys, "eval", "", "0.1 0.2; 0.3 -0.1")
    assert code == 0
    assert np.array_equal(parse_matrix(out), parse_matrix("0.1 0.2; 0.3 -0.1"))


def test_eval_word(capsys):
    code, out, _ = run(capsys, "eval", "SHEAR beta=1 t=1", "0 1; 0 0")
    assert code == 0
    assert np.allclose(parse_matrix(out), [[-1, 1], [-1, 1]])
    code, out, _ = run(capsys, "eval", "DIAG a=1 t=1;TRANSPOSE", "0 0; 1 0", "--format", "machine")
    rep = json.loads(out)
    assert code == 0 and rep["max_entry"] == pytest.approx(np.e)


def test_eval_errors(capsys):
    assert run(capsys, "eval", "", "2 0; 0 0")[0] == 3
    assert run(capsys, "eval", "FLIP", "0 0; 0 0")[0] == 2
    assert run(capsys, "eval", "", "0 0 0; 0 0")[0] == 2


def test_matrix_text_round_trip():
    M = np.array([[0.1 + 0.2j, -0.5], [1e-20, 0.25j]])
    assert np.array_equal(parse_matrix(format_matrix(M)), M)
    with pytest.raises(ParseError):
        parse_matrix("1 2")


# -- verify / usage ------------------------------------------------------------

def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--max-degree", "1", "--format", "machine")
    rep = json.loads(out)
    assert code == 0 and rep["ok"]
    names = {d["name"]: d for d in rep["displays"]}
    assert names["[HD_a,HT_b]"]["status"] == "sign"
    assert names["div[HD_a,HT'_b]"]["status"] == "exact"
    assert all(s["passed"] for s in rep["sweeps"])


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "sample", "0", "0", "--format", "xml")[0] == 2
    assert run(capsys, "--help")[0] == 0
