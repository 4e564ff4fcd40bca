from __future__ import annotations

import random

import pytest

from streampredict import (
    Alphabet,
    DatasetConfig,
    DatasetError,
    EventLog,
    SplitSpec,
    dataset_stats,
    load_event_stream,
    log_from_stream,
    split_log,
    stream_from_log,
)


def write_csv(tmp_path, name, rows, header="case_id,activity,timestamp"):
    path = tmp_path / name
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return str(path)


def test_load_basic_and_interning(tmp_path):
    path = write_csv(
        tmp_path,
        "basic.csv",
        [
            "1,ER Registration,2014-10-22 11:15:41",
            "1,ER Triage,2014-10-22 11:27:00",
            "2,ER Registration,2014-10-22 11:30:00",
        ],
    )
    events, alphabet = load_event_stream(DatasetConfig(path=path))
    assert [e.case for e in events] == ["1", "1", "2"]
    assert events[0].activity == events[2].activity  # interning is injective
    assert alphabet.activity_count == 2
    assert dataset_stats(events) == {"events": 3, "cases": 2, "activities": 2}


def test_load_orders_by_timestamp_with_stable_ties(tmp_path):
    path = write_csv(
        tmp_path,
        "ts.csv",
        [
            "c1,late,2020-01-02T00:00:00",
            "c2,tie-first,2020-01-01T00:00:00",
            "c3,tie-second,2020-01-01T00:00:00",
            "c4,early,2019-12-31T23:00:00Z",
        ],
    )
    events, alphabet = load_event_stream(DatasetConfig(path=path))
    assert [alphabet.surface(e.activity) for e in events] == [
        "early",
        "tie-first",
        "tie-second",
        "late",
    ]


def test_load_file_order_ignores_timestamps(tmp_path):
    path = write_csv(
        tmp_path,
        "fo.csv",
        ["c1,x,not-a-timestamp", "c1,y,also-not"],
        header="case_id,activity,timestamp",
    )
    events, alphabet = load_event_stream(DatasetConfig(path=path, order_by="file"))
    assert [alphabet.surface(e.activity) for e in events] == ["x", "y"]


def test_load_missing_column_reports_name(tmp_path):
    path = write_csv(tmp_path, "m.csv", ["c1,a"], header="case_id,act")
    with pytest.raises(DatasetError, match="activity"):
        load_event_stream(DatasetConfig(path=path))


def test_load_bad_timestamp_reports_row(tmp_path):
    path = write_csv(
        tmp_path,
        "bad.csv",
        ["c1,a,2020-01-01T00:00:00", "c1,b,garbage"],
    )
    with pytest.raises(DatasetError, match=":3"):
        load_event_stream(DatasetConfig(path=path))


def test_load_empty_field_reports_row(tmp_path):
    path = write_csv(tmp_path, "e.csv", ["c1,a,2020-01-01", ",b,2020-01-01"])
    with pytest.raises(DatasetError, match=":3"):
        load_event_stream(DatasetConfig(path=path))


def test_load_reserved_activity_rejected(tmp_path):
    path = write_csv(tmp_path, "r.csv", ["c1,__stop__,2020-01-01"])
    with pytest.raises(DatasetError, match=":2"):
        load_event_stream(DatasetConfig(path=path))


def test_load_missing_file():
    with pytest.raises(DatasetError, match="not found"):
        load_event_stream(DatasetConfig(path="/nonexistent/file.csv"))


def test_load_header_only_and_empty(tmp_path):
    path = write_csv(tmp_path, "h.csv", [])
    events, _ = load_event_stream(DatasetConfig(path=path))
    assert events == []
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    events, _ = load_event_stream(DatasetConfig(path=str(empty)))
    assert events == []


def test_dataset_config_validation():
    with pytest.raises(ValueError):
        DatasetConfig(path="x", case_column="same", activity_column="same")
    with pytest.raises(ValueError):
        DatasetConfig(path="x", order_by="nope")


def make_numbered_log(n_cases: int) -> EventLog:
    alpha = Alphabet()
    a, b = alpha.intern("a"), alpha.intern("b")
    log = EventLog()
    rng = random.Random(0)
    for _ in range(n_cases):
        log.add(tuple(rng.choices([a, b], k=rng.randint(1, 6))))
    return log


def test_split_30_cases_is_21_4_5():
    log = make_numbered_log(30)
    train, val, test = split_log(log, SplitSpec(seed=1))
    assert (train.case_count, val.case_count, test.case_count) == (21, 4, 5)


def test_split_1050_cases_is_735_157_158():
    log = make_numbered_log(1050)
    train, val, test = split_log(log, SplitSpec(seed=1))
    assert (train.case_count, val.case_count, test.case_count) == (735, 157, 158)


def test_split_partitions_the_multiset():
    log = make_numbered_log(40)
    train, val, test = split_log(log, SplitSpec(seed=7))
    merged = EventLog()
    for part in (train, val, test):
        for seq, mult in part.items():
            merged.add(seq, mult)
    assert merged == log


def test_split_deterministic_per_seed():
    log = make_numbered_log(25)
    a1 = split_log(log, SplitSpec(seed=42))
    a2 = split_log(log, SplitSpec(seed=42))
    b = split_log(log, SplitSpec(seed=43))
    assert a1 == a2
    assert a1 != b


def test_split_requires_three_cases():
    alpha = Alphabet()
    a = alpha.intern("a")
    with pytest.raises(ValueError):
        split_log(EventLog({(a,): 2}), SplitSpec())


def test_split_spec_validation():
    with pytest.raises(ValueError):
        SplitSpec(train=0.5, val=0.1, test=0.1)
    with pytest.raises(ValueError):
        SplitSpec(train=-0.1, val=0.6, test=0.5)


def test_stream_from_log_roundtrip(demo):
    for seed in (0, 1, 2):
        stream = stream_from_log(demo.log, seed=seed)
        assert log_from_stream(stream) == demo.log
        assert len(stream) == demo.log.event_count
