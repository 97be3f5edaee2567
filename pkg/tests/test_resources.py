import json

import pytest
from hypothesis import given, strategies as st

from convip.exceptions import FileFormatError
from convip.ip_models import IpVariant
from convip.resources import (
    PROFILES,
    ResourceVector,
    aggregate,
    fits,
    load_budget,
    profile_of,
)

counts_st = st.dictionaries(st.sampled_from(list(IpVariant)), st.integers(0, 50))
vectors = st.builds(ResourceVector, *(st.integers(0, 2000) for _ in range(4)))


def test_calibration_lock(fixtures_dir):
    table = json.loads((fixtures_dir / "table2.json").read_text())
    assert len(table) == 4
    for v in IpVariant:
        p = profile_of(v)
        row = table[v.label]
        assert p.resources.to_dict() == {k: row[k] for k in ("luts", "regs", "clbs", "dsps")}
        assert p.wns_ns == row["wns_ns"]
        assert p.power_w == row["power_w"]


@pytest.mark.parametrize("variant,expected", [
    ("conv1", (105, 54, 15, 0, 2.596, 0.593)),
    ("conv2", (30, 22, 5, 1, 2.276, 0.594)),
    ("conv3", (45, 32, 10, 1, 2.086, 0.594)),
    ("conv4", (42, 23, 8, 2, 2.870, 0.596)),
])
def test_profile_of(variant, expected):
    p = profile_of(variant)
    assert p.resources.as_tuple() + (p.wns_ns, p.power_w) == expected


def test_positive_slack_everywhere():
    assert all(p.wns_ns > 0 for p in PROFILES.values())


def test_profile_dsps_match_variant_table():
    assert all(p.resources.dsps == v.dsps for v, p in PROFILES.items())


class TestAggregate:
    def test_two_conv1(self):
        assert aggregate({IpVariant.CONV1: 2}) == ResourceVector(210, 108, 30, 0)

    def test_empty(self):
        assert aggregate({}) == ResourceVector()

    def test_mixed(self):
        assert aggregate({"conv2": 1, "conv4": 1}) == ResourceVector(72, 45, 13, 3)

    def test_negative_count(self):
        with pytest.raises(ValueError):
            aggregate({"conv2": -1})

    def test_absurd_count_reported(self):
        with pytest.raises(OverflowError):
            aggregate({"conv1": 2**62})

    @given(counts_st, counts_st)
    def test_additive(self, c1, c2):
        merged = {v: c1.get(v, 0) + c2.get(v, 0) for v in IpVariant}
        assert aggregate(merged) == aggregate(c1) + aggregate(c2)


class TestFits:
    def test_exact_fit(self):
        assert fits({"conv3": 1}, ResourceVector(45, 32, 10, 1))

    def test_one_lut_short(self):
        assert not fits({"conv3": 1}, ResourceVector(44, 32, 10, 1))

    def test_empty_zero_budget(self):
        assert fits({}, ResourceVector())

    @given(counts_st, vectors, vectors)
    def test_monotone(self, counts, budget, extra):
        if fits(counts, budget):
            assert fits(counts, budget + extra)


class TestBudgetFile:
    def test_load(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text('{"luts": 45, "regs": 32, "clbs": 10, "dsps": 1}')
        assert load_budget(p) == ResourceVector(45, 32, 10, 1)

    @pytest.mark.parametrize("text", [
        "{not json",
        '{"luts": 1, "regs": 1, "clbs": 1}',
        '{"luts": 1, "regs": 1, "clbs": 1, "dsps": 1, "bram": 4}',
        '{"luts": -1, "regs": 1, "clbs": 1, "dsps": 1}',
        '{"luts": 1.5, "regs": 1, "clbs": 1, "dsps": 1}',
        '{"luts": "7", "regs": 1, "clbs": 1, "dsps": 1}',
        "[1, 2, 3, 4]",
    ])
    def test_malformed(self, tmp_path, text):
        p = tmp_path / "b.json"
        p.write_text(text)
        with pytest.raises(FileFormatError):
            load_budget(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileFormatError):
            load_budget(tmp_path / "nope.json")
