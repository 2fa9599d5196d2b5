import pytest

from descent_kit.errors import EnumerationCap, MalformedSpec
from descent_kit.fields import FieldAutomorphism, FieldTower
from descent_kit.groups import PresentedGroup, check_relations, enumerate_group, parse_word, word_str

K = FieldTower("Q", (), [("i", "i^2 + 1"), ("theta", "theta^4 + 7")], name="K")
i, th = K.gen("i"), K.gen("theta")
SIGMA = FieldAutomorphism(K, {"i": i, "theta": i * th})
TAU = FieldAutomorphism(K, {"i": -i, "theta": th})


def test_parse_word_roundtrip():
    w = parse_word("tau*sigma^-1*tau", ["sigma", "tau"])
    assert w == (("tau", 1), ("sigma", -1), ("tau", 1))
    assert parse_word(word_str(w), ["sigma", "tau"]) == w


def test_parse_word_unknown_generator():
    with pytest.raises(MalformedSpec):
        parse_word("rho^2", ["sigma", "tau"])


def test_duplicate_generators():
    with pytest.raises(MalformedSpec):
        PresentedGroup.from_strings(["a", "a"], ["a^2"])


def test_dihedral_relations_hold_on_K():
    G = PresentedGroup.dihedral(4)
    v = check_relations(G, {"sigma": SIGMA, "tau": TAU})
    assert v.passed
    assert [c.relation for c in v.checks] == ["sigma^4", "tau^2", "tau*sigma*tau*sigma"]


def test_relation_failure_is_reported():
    G = PresentedGroup.cyclic(2)
    v = check_relations(G, {"sigma": SIGMA})
    assert not v.passed
    assert v.checks[0].value == {"i": "i", "theta": "-theta"}


def test_missing_assignment():
    with pytest.raises(MalformedSpec):
        check_relations(PresentedGroup.dihedral(4), {"sigma": SIGMA})


def test_enumeration_size():
    e = enumerate_group(PresentedGroup.dihedral(4), {"sigma": SIGMA, "tau": TAU})
    assert e.size == 8 and not e.smaller_than_presentation


def test_enumeration_smaller_than_presentation():
    # sigma^2 generates a group of order 2 although the presentation says 8
    e = enumerate_group(PresentedGroup.dihedral(4), {"sigma": SIGMA.power(2), "tau": TAU})
    assert e.size == 4 and e.smaller_than_presentation


def test_enumeration_cap():
    with pytest.raises(EnumerationCap):
        enumerate_group(PresentedGroup.dihedral(4), {"sigma": SIGMA, "tau": TAU}, cap=5)
