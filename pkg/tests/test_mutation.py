from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from villa.mutation import (
    AMINO_ACID_ALPHABET,
    Mutation,
    MutationParseError,
    lint_mutations,
    normalize,
    parse_mutation,
)

LETTERS = sorted(AMINO_ACID_ALPHABET)


def test_parse_basic():
    assert parse_mutation("A123C") == Mutation("A", 123, "C")


def test_parse_normalizes_whitespace_and_case():
    assert parse_mutation(" e627k ") == Mutation("E", 627, "K")


@pytest.mark.parametrize(
    "bad",
    [
        "627K",  # no original residue
        "A123",  # no changed residue
        "A 123C",  # embedded space
        "A123CD",  # multi-letter end
        "AB123C",
        "Δ123",  # deletion notation
        "123del",
        "A123C;",
        "",
        "   ",
        "A0C",  # position must be >= 1
        "B123C",  # B is not an amino-acid code
        "A123J",
        "A-12C",
    ],
)
def test_parse_rejects(bad):
    with pytest.raises(MutationParseError):
        parse_mutation(bad)


def test_error_names_offending_span():
    with pytest.raises(MutationParseError, match="627K"):
        parse_mutation("627K")
    with pytest.raises(MutationParseError, match="missing original residue"):
        parse_mutation("627K")


def test_normalize_round_trip():
    m = Mutation("A", 123, "C")
    assert normalize(m) == "A123C"
    assert parse_mutation(normalize(m)) == m


def test_normalize_strips_leading_zeros():
    assert normalize(parse_mutation("a007c")) == "A7C"
    assert parse_mutation("A007C") == parse_mutation("A7C")


def test_normalize_idempotent():
    for text in ["A123C", " e627k ", "x001x"]:
        once = normalize(parse_mutation(text))
        assert normalize(parse_mutation(once)) == once


def test_set_semantics_follow_canonical_keys():
    assert {parse_mutation("a7c"), parse_mutation("A007C")} == {parse_mutation("A7C")}


def test_identity_mutation_accepted_but_linted():
    m = parse_mutation("A123A")
    assert m.is_identity
    report = lint_mutations([m, parse_mutation("A123C")])
    assert report == ["A123A: original and changed residues are identical"]


valid_strings = st.builds(
    lambda orig, pos, chg, zeros, pad_l, pad_r, low: (
        pad_l + (orig.lower() if low else orig) + "0" * zeros + str(pos) + (chg.lower() if low else chg) + pad_r
    ),
    orig=st.sampled_from(LETTERS),
    pos=st.integers(min_value=1, max_value=9999),
    chg=st.sampled_from(LETTERS),
    zeros=st.integers(min_value=0, max_value=3),
    pad_l=st.sampled_from(["", " ", "  ", "\t"]),
    pad_r=st.sampled_from(["", " ", "\n"]),
    low=st.booleans(),
)


@given(valid_strings)
def test_round_trip_property(text):
    parsed = parse_mutation(text)
    assert parse_mutation(normalize(parsed)) == parsed
    assert normalize(parse_mutation(normalize(parsed))) == normalize(parsed)


@given(st.text(max_size=12))
def test_arbitrary_text_never_crashes_differently(text):
    # the parser either returns a Mutation or raises MutationParseError
    try:
        parsed = parse_mutation(text)
    except MutationParseError:
        return
    assert parsed.original in AMINO_ACID_ALPHABET
    assert parsed.changed in AMINO_ACID_ALPHABET
    assert parsed.position >= 1


def test_generator_of_10000_valid_strings_round_trips():
    rng = random.Random(20240901)
    for _ in range(10_000):
        orig = rng.choice(LETTERS)
        chg = rng.choice(LETTERS)
        pos = rng.randint(1, 99999)
        text = f"{' ' * rng.randint(0, 2)}{orig}{'0' * rng.randint(0, 2)}{pos}{chg}{' ' * rng.randint(0, 2)}"
        if rng.random() < 0.5:
            text = text.lower()
        parsed = parse_mutation(text)
        assert parsed == Mutation(orig.upper(), pos, chg.upper())
        assert parse_mutation(normalize(parsed)) == parsed
