import json
import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from majorant import io
from majorant.spectral import CoefficientSequence as C

FIXTURES = Path(__file__).parent / "fixtures"


def valid_problem_files():
    out = []
    for p in sorted(FIXTURES.glob("*.json")):
        try:
            raw = json.loads(p.read_text())
            io.parse_problem(raw)
        except (ValueError, json.JSONDecodeError):
            continue
        out.append(p)
    return out


def test_corpus_has_valid_problems():
    assert len(valid_problem_files()) >= 7


@pytest.mark.parametrize("path", valid_problem_files(), ids=lambda p: p.name)
def test_problem_round_trip(path):
    raw = json.loads(path.read_text())
    text = io.dumps(io.parse_problem(raw).to_json())
    assert text == io.dumps(io.normalize_problem(raw))
    assert io.dumps(io.parse_problem(io.loads(text)).to_json()) == text


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(v):
    s = io.format_float(v)
    assert float(s) == v and json.loads(s) == v
    assert isinstance(json.loads(s), float)


def test_float_format_examples():
    assert io.format_float(1.0) == "1.0"
    assert io.format_float(0.1) == "0.10000000000000001"
    assert io.format_float(1e-10) == "1e-10"
    with pytest.raises(ValueError):
        io.format_float(math.nan)


def test_dumps_layout_and_types():
    text = io.dumps({"a": [1, 2.5], "b": {"c": None, "d": True}, "e": [], "f": {}, "g": [{"n": 1, "re": 0.0}]})
    assert json.loads(text) == {"a": [1, 2.5], "b": {"c": None, "d": True}, "e": [], "f": {}, "g": [{"n": 1, "re": 0.0}]}
    assert '{"n": 1, "re": 0.0}' in text and text.endswith("\n")
    with pytest.raises(TypeError):
        io.dumps({1: 2})
    with pytest.raises(TypeError):
        io.dumps({"x": object()})


def test_schema_errors():
    base = {"j": 2, "coefficients": [{"n": 0, "re": 1, "im": 0}]}
    cases = [
        ({**base, "j": 1}, "j"),
        ({"coefficients": base["coefficients"]}, "j"),
        ({"j": 2}, "coefficients"),
        ({**base, "coefficients": {}}, "coefficients"),
        ({**base, "coefficients": [{"n": 0, "re": "x"}]}, "coefficients[0].re"),
        ({**base, "coefficients": [{"n": 0, "re": 1, "phase": 2}]}, "coefficients[0].phase"),
        ({**base, "coefficients": [{"re": 1}]}, "coefficients[0].n"),
        ({**base, "mode": "half"}, "mode"),
        ({**base, "strict": "yes"}, "strict"),
        ({**base, "quadrature": {"rel_tol": -1}}, "quadrature"),
        ({**base, "solver": {"newton_polish": 1}}, "solver.newton_polish"),
        ({**base, "extra": 1}, "extra"),
        ([1, 2], "(root)"),
    ]
    for raw, field in cases:
        with pytest.raises(io.SchemaError) as exc:
            io.parse_problem(raw)
        assert exc.value.path == field, raw


def test_problem_configs():
    prob = io.parse_problem({"j": 3, "coefficients": [{"n": 1, "re": 2}], "solver": {"seed": 4}, "quadrature": {"base_grid": 128}})
    assert prob.f == C({1: 2})
    assert prob.solver_config().seed == 4 and prob.solver_config(seed=9).seed == 9
    assert prob.solver_config(seed=None).seed == 4
    assert prob.quadrature_config().base_grid == 128


def test_verify_parsing():
    raw = {"j": 2, "f": [{"n": 0, "re": 1}], "H": [], "tol": 1e-3}
    vin = io.parse_verify(raw)
    assert vin.H == C() and vin.F is None and vin.tol == 1e-3
    with pytest.raises(io.SchemaError):
        io.parse_verify({"j": 2, "H": []})


def test_read_json_errors(tmp_path):
    with pytest.raises(io.SchemaError):
        io.read_json(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(io.SchemaError) as exc:
        io.read_json(bad)
    assert "line 1" in str(exc.value)
