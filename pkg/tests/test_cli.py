import json

import pytest
from hypothesis import given, settings

from motivic_forge.cli import main, parse_motivic_expression
from motivic_forge.errors import ParseError, UnknownBuiltin
from motivic_forge.grothendieck import L, class_of
from strategies import elements


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_examples():
    assert parse_motivic_expression("(L-1)*L^-3") == (L() - 1) * L(-3)
    assert parse_motivic_expression("e(SL 2)") == L(3) - L()
    assert parse_motivic_expression("e(GL 3)") == class_of("GL", 3)
    assert parse_motivic_expression("e(A 4)") == L(4)
    assert parse_motivic_expression("e(J SL 2 1)") == class_of("jet_group", "SL", 2, 1)
    assert parse_motivic_expression("L^(1/2) * L^(1/2)") == L()
    assert parse_motivic_expression("(L+1)^2 - L^2") == 2 * L() + 1


def test_parse_errors():
    with pytest.raises(ParseError) as info:
        parse_motivic_expression("L^(1/")
    assert info.value.position == 4
    with pytest.raises(ParseError) as info:
        parse_motivic_expression("L + $")
    assert info.value.position == 4
    with pytest.raises(ParseError):
        parse_motivic_expression("(L-1)^(1/2)")
    with pytest.raises(ParseError):
        parse_motivic_expression("")
    with pytest.raises(UnknownBuiltin):
        parse_motivic_expression("e(Sp 4)")


@settings(max_examples=200)
@given(elements())
def test_parse_print_round_trip(a):
    assert parse_motivic_expression(str(a)) == a
    assert str(parse_motivic_expression(str(a))) == str(a)


def test_motivic_command(capsys):
    code, out, _ = run_cli(capsys, "motivic", "(L-1)*L^-3", "--eval", "2", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["schema"] == "motivic-forge/1"
    assert rep["canonical"] == "L^-2 - L^-3" and rep["values"] == {"2": "1/8"}


def test_motivic_parse_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "motivic", "L^(1/")
    assert code == 2 and "offset 4" in err


def test_jets_count(capsys):
    code, out, _ = run_cli(capsys, "jets", "count", "--r", "2", "--n", "1", "--q", "2", "--method", "both", "--json")
    rep = json.loads(out)
    assert code == 0
    assert (rep["numerator"], rep["denominator"], rep["symbolic"], rep["match"]) == (24, 48, "(L-1)*L^-1", True)


def test_jets_bad_prime(capsys):
    code, _, _ = run_cli(capsys, "jets", "count", "--r", "2", "--n", "1", "--q", "6")
    assert code == 2


def test_jets_stabilizer_and_group_order(capsys):
    assert run_cli(capsys, "jets", "stabilizer", "--r", "2", "--n", "1", "--q", "3")[0] == 0
    code, out, _ = run_cli(capsys, "jets", "group-order", "--r", "2", "--n", "1", "--q", "2", "--brute", "--json")
    assert code == 0 and json.loads(out)["group_order"] == 48


def test_verify_cov(capsys):
    code, out, _ = run_cli(capsys, "verify-cov", "--case", "lemma83", "--r", "2", "--json")
    assert code == 0 and json.loads(out)["coefficient"] == "-1"
    code, out, _ = run_cli(capsys, "verify-cov", "--case", "example82")
    assert code == 0 and "recovered coefficient -1" in out


def test_resolve(tmp_path, capsys):
    f = tmp_path / "res.json"
    f.write_text(json.dumps({"name": "x", "gorenstein_index": 2, "divisors": [{"label": "D1", "discrepancy": "-1/2"}]}))
    code, out, _ = run_cli(capsys, "resolve", "--in", str(f), "--convention", "certificate", "--json")
    assert code == 0 and json.loads(out)["crepant"] is True
    code, out, _ = run_cli(capsys, "resolve", "--in", str(f), "--convention", "paper-literal", "--json")
    rep = json.loads(out)
    assert code == 1 and rep["crepant"] is False and rep["certificate"][0]["lhs"] == "-1"


def test_resolve_bad_input(tmp_path, capsys):
    f = tmp_path / "res.json"
    f.write_text(json.dumps({"name": "x", "divisors": [{"label": "D1", "discrepancy": "-1"}]}))
    assert run_cli(capsys, "resolve", "--in", str(f))[0] == 2
    assert run_cli(capsys, "resolve", "--in", str(tmp_path / "missing.json"))[0] == 2
    f.write_text("{not json")
    assert run_cli(capsys, "resolve", "--in", str(f))[0] == 2


def test_heights_arc_file(tmp_path, capsys):
    f = tmp_path / "arc.json"
    f.write_text(json.dumps({"family": "slr", "r": 2, "matrix": [["t", "1"], ["0", "t"]], "precision": 16, "prime": 5}))
    code, out, _ = run_cli(capsys, "heights", "--arc", str(f), "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["heights"] == {"ht_minus1": 0, "ht0": 0, "ht1": 2}
    assert rep["lhs"] == rep["rhs"] == "-2"


def test_heights_exceptional_arc_is_input_error(tmp_path, capsys):
    f = tmp_path / "arc.json"
    f.write_text(json.dumps({"family": "slr", "matrix": [["1", "0"], ["0", "0"]]}))
    assert run_cli(capsys, "heights", "--arc", str(f))[0] == 2


def test_heights_batch_is_deterministic(capsys):
    args = ("heights", "--batch", "15", "--r", "2", "--seed", "11", "--json")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    rep = json.loads(out1)
    assert rep["seed"] == 11 and rep["passed"] == 15
