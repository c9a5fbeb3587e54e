import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tss.core import (
    Dataset,
    DuplicateIndexError,
    MissingColumnError,
    MultivariateInputError,
    NonContiguousIndexError,
    NonFiniteValueError,
    Window,
    WindowSpec,
    enumerate_windows,
    load_annotations,
    load_dataset,
    make_window,
    windows_overlap,
    write_dataset,
)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_two_series(tmp_path):
    rows = ["series_id,t,value"]
    rows += [f"b,{t},{t * 0.5}" for t in range(5)]
    rows += [f"a,{t},{-t}" for t in range(5)]
    d = load_dataset(write(tmp_path, "\n".join(rows) + "\n"))
    assert d.n == 10
    assert [s.id for s in d] == ["a", "b"]
    np.testing.assert_array_equal(d.get("b").values, [0, 0.5, 1.0, 1.5, 2.0])


def test_rows_in_any_order(tmp_path):
    d = load_dataset(write(tmp_path, "series_id,t,value\nx,2,3\nx,0,1\nx,1,2\n"))
    np.testing.assert_array_equal(d.get("x").values, [1, 2, 3])


def test_nan_row_is_named(tmp_path):
    p = write(tmp_path, "series_id,t,value\na,0,1.0\na,1,nan\na,2,3\n")
    with pytest.raises(NonFiniteValueError) as exc:
        load_dataset(p)
    assert exc.value.row == 3
    assert "row 3" in str(exc.value)


def test_gap_in_t(tmp_path):
    p = write(tmp_path, "series_id,t,value\na,0,1\na,1,2\na,3,4\n")
    with pytest.raises(NonContiguousIndexError) as exc:
        load_dataset(p)
    assert exc.value.row == 4


def test_duplicate_index(tmp_path):
    p = write(tmp_path, "series_id,t,value\na,0,1\na,0,2\n")
    with pytest.raises(DuplicateIndexError) as exc:
        load_dataset(p)
    assert exc.value.row == 3


@pytest.mark.parametrize("header", ["series_id,value", "t,value", "series_id,t"])
def test_missing_column(tmp_path, header):
    with pytest.raises(MissingColumnError):
        load_dataset(write(tmp_path, header + "\n"))


def test_multivariate_rejected(tmp_path):
    with pytest.raises(MultivariateInputError):
        load_dataset(write(tmp_path, "series_id,t,value,value2\na,0,1,2\n"))


def test_timestamp_column_ignored(tmp_path):
    d = load_dataset(write(tmp_path, "series_id,t,value,timestamp\na,0,1,2020-01-01\na,1,2,2020-01-02\n"))
    assert d.n == 2


@pytest.mark.parametrize("n_i,b,l,expected", [(500, 5, 10, 490), (5, 0, 10, 0), (11, 0, 10, 1)])
def test_enumerate_counts(n_i, b, l, expected):
    d = Dataset.from_arrays({"s": np.zeros(n_i)})
    anchors = enumerate_windows(d, WindowSpec(b, l))
    assert len(anchors) == expected


def test_single_fit_anchor_is_zero():
    anchors = enumerate_windows(Dataset.from_arrays({"s": np.arange(11.0)}), WindowSpec(0, 10))
    assert list(anchors) == [("s", 0)]


def test_window_slice_matches_series():
    d = Dataset.from_arrays({"a": np.arange(20.0), "b": np.arange(30.0) * 2})
    w = WindowSpec(3, 7)
    anchors = enumerate_windows(d, w)
    for k in range(len(anchors)):
        win = anchors.window(k)
        s = d.get(win.series_id).values
        assert win.start == win.anchor - 3 and win.end == win.anchor + 4
        assert len(win.values) == 8
        np.testing.assert_array_equal(win.values, s[win.start : win.end + 1])
    np.testing.assert_array_equal(anchors.window_matrix()[5], anchors.window(5).values)


def w_(sid, start, end):
    return Window(sid, start, start, end, np.zeros(end - start + 1))


@pytest.mark.parametrize(
    "a,b,expected",
    [
        (w_("s", 0, 10), w_("s", 5, 15), True),
        (w_("s", 0, 10), w_("s", 11, 21), False),
        (w_("s", 0, 10), w_("t", 0, 10), False),
    ],
)
def test_overlap_examples(a, b, expected):
    assert windows_overlap(a, b) is expected


def test_overlap_gap_widens():
    a, b = w_("s", 0, 10), w_("s", 13, 20)
    assert not windows_overlap(a, b, gap=2)
    assert windows_overlap(a, b, gap=3)


intervals = st.tuples(st.sampled_from("ab"), st.integers(0, 50), st.integers(0, 20))


@given(intervals, intervals, st.integers(0, 5))
def test_overlap_symmetric_reflexive(x, y, gap):
    a, b = w_(x[0], x[1], x[1] + x[2]), w_(y[0], y[1], y[1] + y[2])
    assert windows_overlap(a, b, gap) == windows_overlap(b, a, gap)
    assert windows_overlap(a, a, gap)


@given(st.lists(st.integers(1, 40), min_size=1, max_size=5), st.integers(1, 12), st.data())
def test_enumerate_count_property(lengths, l, data):
    b = data.draw(st.integers(0, l))
    d = Dataset.from_arrays({f"s{i}": np.zeros(n) for i, n in enumerate(lengths)})
    anchors = enumerate_windows(d, WindowSpec(b, l))
    assert len(anchors) == sum(max(0, n - l) for n in lengths)
    spec = WindowSpec(b, l)
    assert all(spec.is_valid(t, len(d.get(sid))) for sid, t in anchors)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.text("abcxyz_-0123", min_size=1, max_size=6), st.lists(finite, min_size=1, max_size=15),
                       min_size=1, max_size=4))
def test_csv_round_trip_bit_exact(tmp_path_factory, arrays):
    d = Dataset.from_arrays(arrays)
    p = tmp_path_factory.mktemp("rt") / "d.csv"
    write_dataset(d, p)
    back = load_dataset(p)
    assert [s.id for s in back] == [s.id for s in d]
    for s, t in zip(d, back):
        assert s.values.tobytes() == t.values.tobytes()
    p2 = p.with_name("d2.csv")
    write_dataset(back, p2)
    assert p.read_bytes() == p2.read_bytes()


def test_dataset_is_read_only():
    d = Dataset.from_arrays({"a": [1.0, 2.0]})
    with pytest.raises(ValueError):
        d.get("a").values[0] = 5.0
    with pytest.raises(ValueError):
        d.flat_values[0] = 5.0


def test_window_spec_validation():
    with pytest.raises(ValueError):
        WindowSpec(5, 4)
    with pytest.raises(ValueError):
        WindowSpec(0, 0)
    with pytest.raises(ValueError):
        WindowSpec(-1, 3)


def test_make_window_rejects_invalid_anchor():
    d = Dataset.from_arrays({"a": np.arange(10.0)})
    with pytest.raises(ValueError):
        make_window(d, WindowSpec(2, 4), "a", 1)
    assert make_window(d, WindowSpec(2, 4), "a", 2).values.tolist() == [0, 1, 2, 3, 4]


def test_annotations_validated_against_dataset(tmp_path):
    d = Dataset.from_arrays({"a": np.zeros(10)})
    ok = write(tmp_path, "series_id,start,end,event_type\na,2,4,spike\n", "ann.csv")
    assert load_annotations(ok, d)[0].event_type == "spike"
    bad = write(tmp_path, "series_id,start,end,event_type\na,8,12,spike\n", "bad.csv")
    with pytest.raises(ValueError):
        load_annotations(bad, d)
    reversed_ = write(tmp_path, "series_id,start,end,event_type\na,5,2,spike\n", "rev.csv")
    with pytest.raises(ValueError):
        load_annotations(reversed_)
