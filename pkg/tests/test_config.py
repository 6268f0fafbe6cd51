from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from couplex.config import (
    ConfigError,
    RunConfig,
    build_spec,
    format_number,
    format_param_value,
    load_config,
    parse_config,
    parse_number,
    parse_param_value,
    serialize_config,
)


def test_parse_number_modes():
    assert parse_number("2") == 2 and isinstance(parse_number("2"), int)
    assert parse_number("7/10") == F(7, 10) and isinstance(parse_number("7/10"), F)
    assert parse_number("0.7") == 0.7 and isinstance(parse_number("0.7"), float)


numbers = st.one_of(
    st.integers(-100, 100),
    st.fractions(max_denominator=40),
    st.floats(allow_nan=False, allow_infinity=False, width=32),
)


@given(numbers)
def test_number_round_trip(value):
    back = parse_number(format_number(value))
    assert back == value
    if isinstance(value, F) and value.denominator > 1:
        assert isinstance(back, F)


def test_parse_param_value_forms():
    assert parse_param_value("3") == 3
    assert parse_param_value("1:1/2, -1:1/2") == {1: F(1, 2), -1: F(1, 2)}
    assert parse_param_value("1,2") == (1, 2)
    assert parse_param_value("1,") == (1,)
    table = parse_param_value("1 010 1/2\n1 110 3/4")
    assert table == {(1, "010"): F(1, 2), (1, "110"): F(3, 4)}
    with pytest.raises(ValueError, match="offset pattern rate"):
        parse_param_value("1 010 1/2\n1 010")


@given(
    st.one_of(
        st.integers(0, 9),
        st.fractions(min_value=0, max_value=5, max_denominator=12),
        st.dictionaries(st.sampled_from([-2, -1, 1, 2]), st.fractions(min_value=0, max_value=3, max_denominator=8), min_size=1, max_size=3),
        st.tuples(st.integers(-3, 3)),
        st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
    )
)
def test_param_value_round_trip(value):
    assert parse_param_value(format_param_value(value)) == value


MINIMAL = "[run]\ncommand = zoo\n"


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert cfg == RunConfig(command="zoo")


def test_full_config_round_trip():
    cfg = RunConfig(
        command="simulate",
        model="traffic2",
        params={"alpha": F(7, 10), "beta": F(1, 5)},
        size=12,
        first=(1, 0, 1, 0),
        second=(1, 1, 0, 0),
        seed=42,
        replicas=3,
        t_end=250.0,
        sample_dt=0.5,
        kind="attractive",
        coupled=True,
        path="out.csv",
        format="csv",
    )
    text = serialize_config(cfg)
    assert parse_config(text) == cfg
    # canonical form is a fixed point
    assert serialize_config(parse_config(text)) == text


def test_law_and_table_params_round_trip():
    cfg = RunConfig(command="check-monotone", model="sep", params={"p": {1: F(1, 2), -1: F(1, 2)}})
    assert parse_config(serialize_config(cfg)) == cfg
    table = {(1, format(k, "03b")): 1 for k in range(8)}
    cfg = RunConfig(
        command="check-monotone",
        model="custom_table",
        params={"offsets": (1,), "dep_radius": 0, "table": table},
    )
    assert parse_config(serialize_config(cfg)) == cfg


run_configs = st.builds(
    RunConfig,
    command=st.sampled_from(("zoo", "exact", "simulate", "check-monotone")),
    model=st.sampled_from(("sep", "traffic2", "two_step")),
    params=st.just({}),
    size=st.one_of(st.none(), st.integers(1, 30)),
    density=st.one_of(st.none(), st.floats(min_value=0.0, max_value=1.0, allow_nan=False)),
    seed=st.integers(0, 2**31),
    replicas=st.integers(1, 9),
    t_end=st.floats(min_value=0.001, max_value=1e6, allow_nan=False),
    sample_dt=st.one_of(st.none(), st.floats(min_value=0.001, max_value=100.0, allow_nan=False)),
    kind=st.one_of(st.none(), st.sampled_from(("increasing", "attractive", "strict"))),
    task=st.one_of(st.none(), st.sampled_from(("stationary", "extinction"))),
    coupled=st.booleans(),
    path=st.one_of(st.none(), st.just("report.csv")),
    format=st.sampled_from(("csv", "json")),
)


@given(run_configs)
def test_random_config_round_trip(cfg):
    if cfg.model == "traffic2":
        cfg.params = {"alpha": F(1, 2), "beta": F(1, 2)}
    assert parse_config(serialize_config(cfg)) == cfg


def test_unknown_sections_and_keys_are_collected():
    text = "[run]\ncommand = zoo\nbogus = 1\n\n[mystery]\nx = 2\n\n[lattice]\nsize = 0\ncolor = red\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    rendered = [str(d) for d in err.value.diagnostics]
    assert any("mystery" in d and "unknown section" in d for d in rendered)
    assert any("run.bogus" in d for d in rendered)
    assert any("lattice.color" in d for d in rendered)
    assert any("lattice.size" in d and "at least 1" in d for d in rendered)


def test_missing_run_section():
    with pytest.raises(ConfigError, match="missing required section"):
        parse_config("[model]\nid = sep\n")


def test_bad_values_diagnosed():
    text = (
        "[run]\ncommand = warp\n\n[model]\nid = nosuch\n\n"
        "[execution]\nreplicas = 0\nkind = sideways\nt_end = -3\n"
    )
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    rendered = "\n".join(str(d) for d in err.value.diagnostics)
    assert "unknown command" in rendered
    assert "unknown model" in rendered
    assert "replicas must be at least 1" in rendered
    assert "unknown kind" in rendered
    assert "t_end must be positive" in rendered


def test_model_parameters_are_checked_against_factory():
    text = "[run]\ncommand = zoo\n\n[model]\nid = traffic2\nalpha = 1\n"
    with pytest.raises(ConfigError, match="bad parameters"):
        parse_config(text)


def test_build_spec_requires_model():
    with pytest.raises(ConfigError, match="needs a model"):
        build_spec(RunConfig(command="check-monotone"))
    spec = build_spec(RunConfig(command="check-monotone", model="sep"))
    assert spec.name == "sep"


def test_load_config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(MINIMAL, encoding="utf-8")
    assert load_config(str(path)) == RunConfig(command="zoo")
