import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from jpairs.counts import (
    expected_counts,
    expected_local_sign,
    expected_signed_counts,
    s_recursive,
    sigma,
    sigma_table,
)

# Reference values of sigma(k, n), rows k = 0..10, columns n = 0..15.
TABLE = {
    0: [1] * 16,
    1: [None, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
    2: [None, None, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7],
    3: [None] * 3 + [1, 0, 2, 0, 3, 0, 4, 0, 5, 0, 6, 0, 7],
    4: [None] * 4 + [1, 1, 3, 3, 6, 6, 10, 10, 15, 15, 21, 21],
    5: [None] * 5 + [1, 0, 3, 0, 6, 0, 10, 0, 15, 0, 21],
    6: [None] * 6 + [1, 1, 4, 4, 10, 10, 20, 20, 35, 35],
    7: [None] * 7 + [1, 0, 4, 0, 10, 0, 20, 0, 35],
    8: [None] * 8 + [1, 1, 5, 5, 15, 15, 35, 35],
    9: [None] * 9 + [1, 0, 5, 0, 15, 0, 35],
    10: [None] * 10 + [1, 1, 6, 6, 21, 21],
}


@pytest.mark.parametrize("k,n,value", [(2, 4, 2), (3, 6, 0), (6, 10, 10), (5, 13, 15), (0, 0, 1)])
def test_sigma_examples(k, n, value):
    assert sigma(k, n) == value


@pytest.mark.parametrize("k,n", [(-1, 3), (4, 3), (7, 2)])
def test_sigma_out_of_range_is_zero(k, n):
    assert sigma(k, n) == 0


def test_recursion_examples():
    assert s_recursive(2, 4) == 2
    assert s_recursive(1, 2) == 0
    assert s_recursive(0, 5) == 1
    assert s_recursive(6, 5) == 0


def test_recursion_matches_closed_form():
    for n in range(31):
        for k in range(n + 1):
            assert s_recursive(k, n) == sigma(k, n), (k, n)


@given(st.integers(0, 30), st.integers(0, 30))
def test_sigma_stable_in_even_columns(k, m):
    n = 2 * m
    if k % 2 == 0 and k <= n:
        assert sigma(k, n) == sigma(k, n + 1)


@given(st.integers(0, 30))
def test_diagonal_and_first_row(n):
    assert sigma(n, n) == 1
    assert sigma(0, n) == 1


def test_table_matches_reference_values():
    table = sigma_table(10, 15)
    for k, row in TABLE.items():
        assert table.rows()[k] == row


def test_table_even_identity():
    for n in range(2, 16, 2):
        for k in range(2, n + 1, 2):
            assert sigma(k, n - 1) + sigma(k - 1, n - 1) == sigma(k, n)


def test_table_text_layout():
    text = sigma_table(0, 3).render_text()
    lines = text.splitlines()
    assert lines[0].split("|")[1].split() == ["0", "1", "2", "3"]
    assert lines[2].split("|")[1].split() == ["1", "1", "1", "1"]


def test_table_json_matches_text():
    table = sigma_table(10, 15)
    doc = json.loads(table.render_json())
    assert doc["rows"] == table.rows()
    for k, line in enumerate(table.render_text().splitlines()[2:]):
        cells = [int(c) for c in line.split("|")[1].split()]
        assert cells == [v for v in doc["rows"][k] if v is not None]


def test_table_rejects_bad_bounds():
    with pytest.raises(ValueError):
        sigma_table(5, 3)


@pytest.mark.parametrize("same,n,k,expected", [
    (True, 6, 2, (3, 0)),
    (False, 2, 1, (1, 1)),
    (False, 3, 1, (0, 1)),
    (False, 4, 2, (1, 1)),
])
def test_expected_counts(same, n, k, expected):
    assert expected_counts(same, n, k) == expected


@given(st.integers(1, 20), st.data())
def test_expected_counts_same_has_no_tau_part(n, data):
    k = data.draw(st.integers(1, n))
    assert expected_counts(True, n, k)[1] == 0


@pytest.mark.parametrize("n,k", [(3, 0), (3, 4)])
def test_expected_counts_range(n, k):
    with pytest.raises(ValueError):
        expected_counts(True, n, k)


@given(st.integers(1, 20), st.data())
def test_signed_counts_agree_in_magnitude(n, data):
    k = data.draw(st.integers(1, n))
    for same in (True, False):
        signed = expected_signed_counts(same, n, k)
        assert tuple(map(abs, signed)) == expected_counts(same, n, k)


def test_signed_counts_opposite_odd_k():
    assert expected_signed_counts(False, 2, 1) == (-1, 1)
    assert expected_signed_counts(False, 4, 3) == (-1, 1)
    assert expected_signed_counts(False, 4, 2) == (1, 1)


def test_expected_local_sign():
    assert expected_local_sign(True, 3, "same") == 1
    assert expected_local_sign(False, 3, "opposite") == 1
    assert expected_local_sign(False, 3, "same") == -1
    assert expected_local_sign(False, 2, "same") == 1
