import io
import json
import subprocess
import sys

import pytest

from walkkernel.cli import run_cli
from walkkernel.documents import deserialize


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_verify_reverse_kreweras_passes():
    code, out, err = run("verify", "--model", "reverse-kreweras", "--a", "2", "--b", "3", "--c", "5", "--order", "15")
    assert code == 0, err
    info = json.loads(out)["info"]
    assert info["status"] == "pass"
    row = info["rows"][0]
    assert row["quantity"] == "Q(0,0)" and row["solver"][3] == "25" and row["oracle"][3] == "25"
    assert all(r["first_mismatch"] == "none" for r in info["rows"])


def test_expand_delta_roots():
    code, out, _ = run("expand", "--model", "reverse-kreweras", "--what", "delta-roots", "--order", "11")
    assert code == 0
    bundle = deserialize(out.encode())
    x1 = bundle.documents[0]
    assert x1.quantity == "X_1"
    assert [(k, c) for k, _, _, c in x1.terms][:3] == [(2, 4), (5, 32), (8, 448)]


def test_solve_kreweras_origin_series():
    code, out, _ = run("solve", "--model", "kreweras", "--order", "12", "--select", "point:0,0")
    assert code == 0
    doc = deserialize(out.encode())
    assert [(k, c) for k, _, _, c in doc.terms] == [(0, 1), (3, 2), (6, 16), (9, 192), (12, 2816)]


def test_solve_bundle_has_every_quantity():
    code, out, _ = run("solve", "--model", "reverse-kreweras", "--a", "2", "--b", "3", "--c", "5", "--order", "8")
    assert code == 0
    names = [d.quantity for d in deserialize(out.encode()).documents]
    assert names == ["Q(0,0)", "Q_{1,0}", "Q_{0,1}", "Q(x,0)", "Q(0,y)", "Q^d_0", "Q(x,y)"]


def test_enumerate_csv(tmp_path):
    path = tmp_path / "q.csv"
    code, out, _ = run("enumerate", "--model", "reverse-kreweras", "--a", "2", "--b", "3", "--c", "5",
                       "--order", "1", "--format", "csv", "--out", str(path))
    assert code == 0 and out == ""
    doc = deserialize(path.read_bytes(), "csv")
    assert [(k, e, f, c) for k, e, f, c in doc.terms] == [(0, 0, 0, 1), (1, 0, 1, 3), (1, 1, 0, 2)]
    assert [p.name for p in tmp_path.iterdir()] == ["q.csv"]


def test_expand_other_objects():
    for what in ("factorization", "kernel-roots", "determinants"):
        code, out, _ = run("expand", "--model", "reverse-kreweras", "--a", "3", "--b", "2", "--c", "5",
                           "--what", what, "--order", "10")
        assert code == 0
    info = json.loads(out)["info"]
    assert info["equation_set"] == [1, 3, 7] and info["determinant"] == ["15552000", "10"]


def test_identical_invocations_are_byte_identical():
    argv = ("solve", "--model", "kreweras", "--a", "3", "--b", "2", "--c", "5", "--order", "8")
    assert run(*argv)[1] == run(*argv)[1]


@pytest.mark.parametrize(
    "argv",
    [
        ("solve",),
        ("solve", "--model", "gessel"),
        ("enumerate", "--model", "kreweras", "--a", "0"),
        ("enumerate", "--model", "kreweras", "--a", "0.5"),
        ("enumerate", "--model", "kreweras", "--select", "point:1"),
        ("solve", "--model", "kreweras", "--order", "4", "--format", "csv"),
        ("frobnicate",),
    ],
)
def test_usage_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_computational_error_exit_3(monkeypatch):
    import walkkernel.pipeline as pipeline
    from walkkernel.errors import DivisibilityFailure

    def boom(*a, **k):
        raise DivisibilityFailure("quotient is not a polynomial")

    monkeypatch.setattr(pipeline, "solve_model", boom)
    code, _, err = run("solve", "--model", "kreweras", "--order", "4")
    assert code == 3
    assert "kernel_pipeline.DivisibilityFailure" in err


def test_verify_mismatch_exit_1(monkeypatch):
    import walkkernel.reporting as reporting
    from walkkernel.forms import Q00
    from walkkernel.series import PuiseuxSeries

    real = reporting.solve_model

    def off_by_one(*a, **k):
        sol = real(*a, **k)
        sol.scalars[Q00] = sol.scalars[Q00] + PuiseuxSeries.monomial(1, 3)
        return sol

    monkeypatch.setattr(reporting, "solve_model", off_by_one)
    code, out, _ = run("verify", "--model", "reverse-kreweras", "--a", "2", "--b", "3", "--c", "5", "--order", "6")
    assert code == 1
    row = json.loads(out)["info"]["rows"][0]
    assert row["first_mismatch"][:1] == ["3"]


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "walkkernel.cli", "enumerate", "--model", "kreweras", "--order", "3",
                           "--select", "point:0,0", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1] == "3,0,,2"
