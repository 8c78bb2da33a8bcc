"""Allelic profile datasets and their text readers (FASTA, SNP, ML)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO, Union

import numpy as np

from .errors import ParseError

NUCLEOTIDE = "nucleotide"
CATEGORICAL = "categorical"
BINARY = "binary"

MISSING = {NUCLEOTIDE: "-", CATEGORICAL: "0", BINARY: "0"}

Source = Union[str, TextIO]


@dataclass(frozen=True)
class Profile:
    id: str
    loci: tuple[str, ...]


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of equally long profiles."""

    profiles: tuple[Profile, ...]
    kind: str
    _codes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.profiles:
            raise ParseError("dataset has no profiles")
        length = len(self.profiles[0].loci)
        seen = set()
        for p in self.profiles:
            if len(p.loci) != length:
                raise ParseError(
                    f"profile {p.id!r} has {len(p.loci)} loci, expected {length}"
                )
            if p.id in seen:
                raise ParseError(f"duplicate profile id {p.id!r}")
            seen.add(p.id)
        # integer codes per locus token; missing token always maps to 0
        table = {MISSING[self.kind]: 0}
        codes = np.empty((len(self.profiles), length), dtype=np.int32)
        for row, p in enumerate(self.profiles):
            for col, token in enumerate(p.loci):
                codes[row, col] = table.setdefault(token, len(table))
        codes.flags.writeable = False
        object.__setattr__(self, "_codes", codes)

    @property
    def locus_count(self) -> int:
        return len(self.profiles[0].loci)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.profiles]

    @property
    def missing(self) -> str:
        return MISSING[self.kind]

    @property
    def codes(self) -> np.ndarray:
        """Read-only ``(n, L)`` integer encoding; 0 marks the missing token."""
        return self._codes

    def __len__(self) -> int:
        return len(self.profiles)

    def frequencies(self) -> list[int]:
        """Number of profiles sharing each profile's exact loci."""
        counts: dict[tuple[str, ...], int] = {}
        for p in self.profiles:
            counts[p.loci] = counts.get(p.loci, 0) + 1
        return [counts[p.loci] for p in self.profiles]


def _read_text(source: Source) -> str:
    text = source if isinstance(source, str) else source.read()
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for number, line in enumerate(text.split("\n"), start=1):
        if line.strip():
            yield number, line


def read_fasta(source: Source) -> Dataset:
    """Parse FASTA records; each header line names one profile.

    Sequence lines following a header are concatenated and split into
    single-character loci (upper-cased).
    """
    text = _read_text(source)
    profiles: list[Profile] = []
    header = None
    chunks: list[str] = []

    def flush():
        if header is None:
            return
        sequence = "".join(chunks)
        if not sequence:
            raise ParseError(f"FASTA record {header!r} has no sequence")
        profiles.append(Profile(header, tuple(sequence.upper())))

    for number, line in _lines(text):
        line = line.strip()
        if line.startswith(">"):
            flush()
            header = line[1:].strip()
            chunks = []
        elif header is None:
            raise ParseError(f"line {number}: sequence data before any '>' header")
        else:
            chunks.append("".join(line.split()))
    flush()
    if not profiles:
        raise ParseError("empty FASTA input")
    return Dataset(tuple(profiles), NUCLEOTIDE)


_BINARY = re.compile(r"[01]+")


def read_snp(source: Source) -> Dataset:
    """Parse SNP profiles: an id followed by a string of 0/1 digits."""
    text = _read_text(source)
    profiles = []
    for number, line in _lines(text):
        parts = line.split()
        if len(parts) < 2:
            raise ParseError(f"line {number}: expected an id followed by 0/1 values")
        digits = "".join(parts[1:])
        if not _BINARY.fullmatch(digits):
            raise ParseError(f"line {number}: SNP values must be 0 or 1")
        profiles.append(Profile(parts[0], tuple(digits)))
    if not profiles:
        raise ParseError("empty SNP input")
    return Dataset(tuple(profiles), BINARY)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_ml(source: Source) -> Dataset:
    """Parse MLST/MLVA tables.

    The first column is the profile id and the others are allele tokens. A
    leading line is treated as a header when any of its allele columns is
    not numeric, which is how MLST files differ from MLVA ones.
    """
    text = _read_text(source)
    rows = [(number, line.split()) for number, line in _lines(text)]
    if rows and any(not _is_number(t) for t in rows[0][1][1:]):
        rows = rows[1:]
    if not rows:
        raise ParseError("ML input has no profile rows")
    width = len(rows[0][1])
    profiles = []
    for number, parts in rows:
        if len(parts) != width:
            raise ParseError(f"line {number}: expected {width} columns, found {len(parts)}")
        if width < 2:
            raise ParseError(f"line {number}: profile {parts[0]!r} has no loci")
        profiles.append(Profile(parts[0], tuple(parts[1:])))
    return Dataset(tuple(profiles), CATEGORICAL)


READERS = {"fasta": read_fasta, "snp": read_snp, "ml": read_ml}
