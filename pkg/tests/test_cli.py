import io
import subprocess
import sys

import pytest

from transseries.cli import CliError, Session, _render_ast, parse, run_script


DSOLVE_SCRIPT = """\
basis(x, exp(x));
let P = (x-1)*exp(-2*x) + (1/x - exp(-x) + exp(-x)/x)*d(F) + (1 - x*exp(-x))*F + F*d(F)/x + F^2;
let U = dsolve(P);
expand(U, 5);
"""

LAMBERT_SCRIPT = DSOLVE_SCRIPT + """\
let Omega = exp(x)*(U + d(U)/x)*(F + 1) - d(F)/x;
let V = dsolve(Omega);
zerotest((U + 1 - x*exp(-x))*(1 + V) - 1);
"""


def run(text, **kw):
    out, err = io.StringIO(), io.StringIO()
    code = run_script(text, out=out, err=err, **kw)
    return code, out.getvalue(), err.getvalue()


def test_parse_example_statements():
    stmts = parse(DSOLVE_SCRIPT)
    kinds = [s[0] for s in stmts]
    assert kinds == ["basis", "let", "dsolve", "query"]
    stmts = parse('zerotest((U + 1 - x*exp(-x))*(1+V) - 1);')
    assert stmts[0][0] == "query" and stmts[0][1] == "zerotest"
    stmts = parse("expand(1/(1-1/x), 3);")
    assert stmts[0][1] == "expand"


def test_parse_error_reports_position():
    with pytest.raises(CliError) as exc:
        parse("let = 3;")
    assert exc.value.pos is not None


def test_unknown_name_is_diagnosed():
    code, out, err = run("expand(nosuch, 3);")
    assert code == 1
    assert "nosuch" in err


def test_parse_print_roundtrip():
    exprs = [
        "(x - 1)*exp(-2*x) + (1/x - exp(-x) + exp(-x)/x)*d(F)",
        "F*d(F)/x + F^2",
        "x^3 + x^2 + x",
        "exp(exp(x))",
        "1/(1 - 1/x)",
    ]
    for text in exprs:
        stmts = parse(f"let tmp = {text};")
        ast = stmts[0][2]
        rendered = _render_ast(ast)
        ast2 = parse(f"let tmp = {rendered};")[0][2]
        assert ast2 == ast


def test_dsolve_golden_output():
    code, out, err = run(DSOLVE_SCRIPT)
    assert code == 0, err
    assert out.splitlines()[0] == (
        "U = x*exp(-2*x) + (1/2*x^2 - x)*exp(-3*x) + "
        "(1/3*x^3 - 3/2*x^2 + x)*exp(-4*x) + O(exp(-5*x))"
    )


def test_lambert_golden_output():
    code, out, err = run(LAMBERT_SCRIPT)
    assert code == 0, err
    lines = out.splitlines()
    assert lines[-1] == "zerotest: true (sigma = 1, v2(Q(V)) >= 2)"


def test_zerotest_false_exit_code():
    script = LAMBERT_SCRIPT.replace(
        "zerotest((U + 1 - x*exp(-x))*(1 + V) - 1);",
        "zerotest((U + 1 - x*exp(-x))*(1 + V) - 1 + exp(-5*x));",
    )
    code, out, err = run(script)
    assert code == 2
    assert out.splitlines()[-1].startswith("zerotest: false")


def test_expand_zero():
    code, out, err = run("expand(0, 5);")
    assert code == 0
    assert out.strip() == "0"


def test_trace_flag_prints_steps():
    code, out, err = run(LAMBERT_SCRIPT, trace=True)
    assert code == 0
    assert "step 5: sigma = 1" in out
    assert "I_P_f(N) = N" in out


def test_raw_rendering():
    code, out, err = run(DSOLVE_SCRIPT, raw=True)
    assert code == 0
    assert "b2^-(2)" in out


def test_deterministic_output():
    runs = [run(LAMBERT_SCRIPT) for _ in range(2)]
    assert runs[0] == runs[1]


def test_basis_example3_via_cli():
    code, out, err = run(
        "basis(log(x), x, x^x, exp(x^3 + x^2 + x));\nexpand(x, 2);"
    )
    assert code == 0, err
    assert out.strip() == "x = x"


def test_basis_rejects_permutation():
    code, out, err = run("basis(exp(x), x);")
    assert code == 1
    assert "TB1" in err


def test_cli_binary_exit_codes(tmp_path):
    script = tmp_path / "neg.ts"
    script.write_text(
        LAMBERT_SCRIPT.replace(
            "zerotest((U + 1 - x*exp(-x))*(1 + V) - 1);",
            "zerotest((U + 1 - x*exp(-x))*(1 + V) - 1 + 1/x);",
        )
    )
    r = subprocess.run(
        [sys.executable, "-m", "transseries.cli", "--script", str(script)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert r.returncode == 0
    r = subprocess.run(
        [
            sys.executable,
            "-m",
            "transseries.cli",
            "--script",
            str(script),
            "--assert-zero",
        ],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert r.returncode == 2


def test_repl_mode_reads_stdin():
    r = subprocess.run(
        [sys.executable, "-m", "transseries.cli", "--order", "4"],
        input="basis(x, exp(x));\nexpand(1/(1 - exp(-x)), 3);\n",
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert r.returncode == 0
    assert "1 + exp(-x) + exp(-2*x) + O(exp(-3*x))" in r.stdout


def test_dsolve_reports_valuation_triple_on_failure():
    code, out, err = run("basis(x, exp(x));\nlet W = dsolve(F^2 + 1);\n")
    assert code == 1
    assert "not quasi-linear" in err and "v(P_[0])" in err


def test_log_retry_via_cli():
    code, out, err = run(
        "basis(x);\nlet W = dsolve(d(F) + F - 1/x);\nexpand(W, 3);\n"
    )
    assert code == 0, err
    assert "log(x)*x^(-1)" in out or "x^(-1)*log(x)" in out or "log(x)" in out
