"""Parsing, normalization, and comparison of amino-acid substitution notation.

A substitution is written ``<original residue><position><changed residue>``,
for example ``A123C``: the residue ``A`` at position 123 changed to ``C``.
Positions are 1-based. Residue letters come from the 20 standard amino-acid
one-letter codes plus ``X`` for an unknown residue. Anything else, including
deletions and insertions (``123del``, ``ins858``), is rejected: the ground
truth schema is substitution-only, and unparseable model output is scored as
an incorrect extraction rather than silently dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# 20 standard one-letter amino-acid codes, plus X (unknown residue).
AMINO_ACID_ALPHABET = frozenset("ACDEFGHIKLMNPQRSTVWY") | frozenset("X")

_GRAMMAR = re.compile(r"([A-Za-z])(\d+)([A-Za-z])")


class MutationParseError(ValueError):
    """The given text does not follow <residue><position><residue> notation."""


@dataclass(frozen=True, order=True)
class Mutation:
    """A single amino-acid substitution.

    Equality and hashing follow the three fields, so two mutations compare
    equal exactly when their canonical strings are equal; sets of mutations
    therefore behave as sets of canonical keys.
    """

    original: str
    position: int
    changed: str

    def canonical(self) -> str:
        """Canonical uppercase form with no leading zeros, e.g. ``A7C``."""
        return f"{self.original}{self.position}{self.changed}"

    @property
    def is_identity(self) -> bool:
        """True when original and changed residues coincide (e.g. A123A)."""
        return self.original == self.changed

    def __str__(self) -> str:
        return self.canonical()


def parse_mutation(text: str) -> Mutation:
    """Parse substitution notation into a :class:`Mutation`.

    Surrounding whitespace and lowercase letters are tolerated and
    normalized away. Everything else must match the grammar exactly:
    one residue letter, digits, one residue letter.

    Raises:
        MutationParseError: naming the offending span of the input.
    """
    stripped = text.strip()
    if not stripped:
        raise MutationParseError("empty mutation string")
    match = _GRAMMAR.fullmatch(stripped)
    if match is None:
        raise MutationParseError(_describe_failure(stripped))
    original, digits, changed = match.groups()
    original = original.upper()
    changed = changed.upper()
    for letter in (original, changed):
        if letter not in AMINO_ACID_ALPHABET:
            raise MutationParseError(
                f"{stripped!r}: {letter!r} is not an amino-acid code"
            )
    position = int(digits)
    if position < 1:
        raise MutationParseError(f"{stripped!r}: position must be >= 1")
    return Mutation(original=original, position=position, changed=changed)


def _describe_failure(text: str) -> str:
    # Point at the part of the grammar that is missing or malformed.
    if re.fullmatch(r"\d+[A-Za-z]", text):
        return f"{text!r}: missing original residue before position"
    if re.fullmatch(r"[A-Za-z]\d+", text):
        return f"{text!r}: missing changed residue after position"
    if re.fullmatch(r"[A-Za-z]+[A-Za-z]", text) and not re.search(r"\d", text):
        return f"{text!r}: missing position digits"
    return f"{text!r}: expected <residue><position><residue>"


def normalize(mutation: Mutation) -> str:
    """Canonical string key for set comparison; inverse of parse_mutation."""
    return mutation.canonical()


def lint_mutations(mutations) -> list[str]:
    """Flag accepted-but-suspicious mutations.

    Currently flags identity substitutions such as ``A123A``, which the
    grammar admits but which describe no change.
    """
    report = []
    for m in sorted(set(mutations)):
        if m.is_identity:
            report.append(f"{m.canonical()}: original and changed residues are identical")
    return report
