import pytest

from bfree.config import ConfigParse, digest, parse_box, parse_config


def test_box_forms():
    assert parse_box(5, 1).shape == (11,)
    assert parse_box({"radius": 2}, 2).shape == (5, 5)
    b = parse_box({"lo": [-1], "shape": [4]}, 1)
    assert (b.lo, b.shape) == ((-1,), (4,))
    for bad in ({"lo": [0]}, {"radius": -1}, "big", {"lo": [0, 0], "shape": [2]}):
        with pytest.raises(ConfigParse):
            parse_box(bad, 1)


def test_truncation_forms():
    base = {"polynomial": [0, 1], "family": {"kind": "prime_power", "k": 2, "norm_bound": 10000}}
    assert parse_config(base).L == 25
    assert parse_config(dict(base, truncation=3)).L == 3
    assert parse_config(dict(base, truncation={"norm_cutoff": 100})).L == 4
    with pytest.raises(ConfigParse):
        parse_config(dict(base, truncation=1000))


def test_s_forms():
    base = {"polynomial": [0, 1], "family": {"kind": "explicit", "generators": [4, 9]}}
    assert list(parse_config(dict(base, s=2)).s) == [2, 2]
    assert list(parse_config(dict(base, s=[1, 3])).s) == [1, 3]
    with pytest.raises(ConfigParse):
        parse_config(dict(base, s=[5, 1]))


def test_explicit_gaussian_generators():
    cfg = parse_config({
        "polynomial": [1, 0, 1],
        "family": {"kind": "explicit", "generators": [[1, 1], [[3], [0, 3]]]},
    })
    assert cfg.family.norms == [2, 9]


def test_rejects():
    with pytest.raises(ConfigParse):
        parse_config({"polynomial": [1, 0, 1, 0], "family": {"kind": "explicit", "generators": [2]}})
    with pytest.raises(ConfigParse):
        parse_config({"polynomial": [0, 1], "family": {"kind": "explicit", "generators": [4, 6]}})
    with pytest.raises(ConfigParse):
        parse_config({"polynomial": [0, 1], "family": {"kind": "other"}})
    with pytest.raises(ConfigParse):
        parse_config({"polynomial": [0, 1], "family": {"kind": "explicit", "generators": [True]}})


def test_hashes_ignore_key_order_and_nonwindow_fields():
    a = {"polynomial": [0, 1], "family": {"kind": "explicit", "generators": [4, 9]}, "box": 10}
    b = {"box": 10, "family": {"generators": [4, 9], "kind": "explicit"}, "polynomial": [0, 1]}
    assert parse_config(a).config_hash == parse_config(b).config_hash
    c = dict(a, precision=30)
    assert parse_config(c).window_hash == parse_config(a).window_hash
    assert parse_config(c).config_hash != parse_config(a).config_hash
    assert digest([1]) != digest([2])


def test_raw_untouched():
    raw = {"polynomial": [0, 1], "family": {"kind": "explicit", "generators": [4]}, "box": 3,
           "cylinder": {"shape": [0, 1]}}
    parse_config(raw)
    assert raw["cylinder"] == {"shape": [0, 1]}
