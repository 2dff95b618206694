import pytest
from hypothesis import given, strategies as st

from phylomoves.errors import ParseError, StructuralError, ValidationError
from phylomoves.group import parse_group
from phylomoves.tables import (
    Table, canonicalize, column_signature, compatible, parse_pair, parse_table, serialize_pair,
    serialize_table, signature_hash,
)

from oracles import signature
from strategies import tables


def test_worked_pair_is_compatible(ex23):
    t0, mid, t1 = ex23
    assert compatible(t0, t1) and compatible(t0, mid)


def test_changing_one_row_breaks_compatibility(ex23, z2):
    t0, _, t1 = ex23
    rows = list(t0.rows)
    rows[2] = (1, 1, 0, 0, 1, 1)
    assert not compatible(Table.from_entries(z2, rows), t1)


def test_compatible_needs_same_shape(z2):
    a = Table.from_entries(z2, [[0, 0, 0]])
    b = Table.from_entries(z2, [[0, 0, 0, 0]])
    with pytest.raises(StructuralError):
        compatible(a, b)
    c = Table.from_entries(parse_group("Z3"), [[0, 0, 0]])
    with pytest.raises(StructuralError):
        compatible(a, c)


def test_table_rejects_non_flow(z2):
    with pytest.raises(ValidationError, match="row 2"):
        Table.from_entries(z2, [[0, 0, 0], [1, 0, 0]])
    with pytest.raises(StructuralError):
        Table.from_entries(z2, [[0, 0, 0], [1, 1]])


@given(tables(), st.randoms())
def test_equality_ignores_row_order(t, rnd):
    rows = list(t.rows)
    rnd.shuffle(rows)
    other = t.with_rows(rows)
    assert other == t and hash(other) == hash(t)
    assert other.rows == tuple(rows)
    assert canonicalize(other).rows == t.key
    assert column_signature(other) == column_signature(t)


@given(tables())
def test_signature_matches_oracle(t):
    assert column_signature(t) == signature(t.rows, t.n, t.spec.order)
    assert len(signature_hash(column_signature(t))) == 16


@given(tables())
def test_text_round_trip(t):
    assert parse_table(serialize_table(t)) == t
    assert parse_table(serialize_table(t, canonical=False)).rows == t.rows
    a, b = parse_pair(serialize_pair(t, t))
    assert a == t and b == t


def test_fixture_pair(fixtures_dir, ex23):
    t0, t1 = parse_pair((fixtures_dir / "example23_pair.txt").read_text())
    assert t0 == ex23[0] and t1 == ex23[2]


@pytest.mark.parametrize("text,line", [
    ("group: Z2\nn: 3\nrows:\n0 0 0\n0 1\n", 5),
    ("group: Z2\nn: 3\nrows:\n0 0 0\n0 2 0\n", 5),
    ("group: Z2\nn: x\n", 2),
    ("group: Z2\ncolour: red\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_table(text)
    assert info.value.line == line


def test_parse_rejects_non_flow_with_line():
    with pytest.raises(ValidationError, match="line 5"):
        parse_table("group: Z2\nn: 3\nrows:\n# comment\n1 0 0\n")


def test_pair_needs_two_blocks():
    with pytest.raises(ParseError):
        parse_pair("group: Z2\nn: 2\nrows:\n0 0\n")


def test_product_group_entries():
    t = parse_table("group: Z2xZ2\nn: 2\nrows:\n1,0 1,0\n0,1 0,1\n")
    assert t.rows == ((2, 2), (1, 1))
