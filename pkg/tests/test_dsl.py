import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfinsler.dsl import BinOp, Call, Var, compile_spec, parse_metric, pretty
from cfinsler.errors import DSLError, FinslerError
from cfinsler.metric import metric_from_expression


def test_parse_euclidean():
    spec = parse_metric("abs2(v1) + abs2(v2)", 2)
    assert spec.ast == BinOp("+", Call("abs2", Var("v", 1)), Call("abs2", Var("v", 2)))


def test_parse_quartic_shape():
    spec = parse_metric("sqrt(abs2(v1)^2 + abs2(v2)^2)", 2)
    assert isinstance(spec.ast, Call) and spec.ast.func == "sqrt"


def test_index_out_of_range():
    with pytest.raises(DSLError, match="variable index out of range") as ei:
        parse_metric("abs2(v3)", 2)
    assert (ei.value.line, ei.value.column) == (1, 6)


@pytest.mark.parametrize("text,pos", [
    ("abs2(v1", (1, 8)),
    ("abs2(v1) +\n  * v2", (2, 3)),
    ("exp(v1)", (1, 1)),
    ("abs2(v1) $", (1, 10)),
])
def test_errors_carry_positions(text, pos):
    with pytest.raises(DSLError) as ei:
        parse_metric(text, 2)
    assert (ei.value.line, ei.value.column) == pos


def test_power_right_associative():
    spec = parse_metric("abs2(v1)^2^0.5", 1)
    assert spec.ast.right == BinOp("^", parse_metric("2", 1).ast, parse_metric("0.5", 1).ast)


def test_evaluator_matches_numpy():
    ev = compile_spec(parse_metric("abs2(v1)/(1 - abs2(z1))^2", 1))
    assert complex(ev(np.array([0.5]), np.array([1.0]))).real == pytest.approx(16 / 9)


def test_non_real_expression_rejected():
    with pytest.raises(FinslerError, match="not real-valued"):
        metric_from_expression("v1*v1", 1)


def test_content_hash_depends_on_ast_only():
    a = parse_metric("abs2(v1)+abs2(v2)", 2)
    b = parse_metric("abs2( v1 ) + abs2(v2)", 2)
    assert a.content_hash == b.content_hash
    assert a.content_hash != parse_metric("abs2(v1)+abs2(v2)", 3).content_hash


_leaf = st.sampled_from(["z1", "v1", "z2", "v2", "2", "0.5", "i", "3e-2"])


def _expr():
    return st.recursive(
        _leaf,
        lambda kid: st.one_of(
            st.tuples(kid, st.sampled_from(["+", "-", "*", "/"]), kid).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
            st.tuples(kid, st.sampled_from(["+", "-", "*", "/"]), kid).map(lambda t: f"{t[0]}{t[1]}{t[2]}"),
            kid.map(lambda s: f"-{s}"),
            st.tuples(kid, st.sampled_from(["2", "-1", "1/2", "3^2"])).map(lambda t: f"({t[0]})^{t[1]}"),
            st.tuples(st.sampled_from(["abs2", "re", "im", "conj", "sqrt"]), kid).map(lambda t: f"{t[0]}({t[1]})"),
        ),
        max_leaves=12,
    )


@given(_expr())
def test_pretty_parse_fixed_point(text):
    spec = parse_metric(text, 2)
    again = parse_metric(pretty(spec.ast), 2)
    assert again.ast == spec.ast
    assert pretty(again.ast) == pretty(spec.ast)
