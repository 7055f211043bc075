"""Data model for Monte Carlo output and file ingestion.

A ChainMatrix is an ordered n-by-p matrix of draws; row t is the t-th
retained draw of the transformed output. Row order is simulation order
and estimators downstream are order sensitive, so the matrix is frozen
after construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Union

import numpy as np

from .errors import DomainError, EmptyInput, ParseError


@dataclass(frozen=True)
class ChainMatrix:
    """Ordered matrix of output draws; immutable after construction."""

    data: np.ndarray
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise DomainError(f"chain data must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise EmptyInput("chain must have at least one row and one column")
        if not np.isfinite(arr).all():
            raise DomainError("chain contains non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class MeanVector:
    """A length-p vector of means, paired with the chain dimension."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if arr.size < 1:
            raise DomainError("mean vector must have at least one entry")
        if not np.isfinite(arr).all():
            raise DomainError("mean vector contains non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def p(self) -> int:
        return self.values.size


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _parse_cell(cell: str, line_no: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(
            f"non-numeric cell {cell!r} at line {line_no}", row=line_no
        ) from None
    if math.isinf(v) or math.isnan(v):
        raise ParseError(
            f"cell {cell!r} at line {line_no} is not a finite double", row=line_no
        )
    return v


def load_chain(source: Union[str, bytes, IO], format: str = "csv") -> ChainMatrix:
    """Read a chain from a delimited text stream.

    Parameters
    ----------
    source : path, bytes, or file-like object
        Rectangular numeric rows, one draw per line. A single header
        line is auto-detected: line 1 is a header iff every field on it
        fails numeric parsing (a mixed line is treated as corrupt data).
    format : {"csv", "tsv"}
        Field delimiter selection. No quoting support; the payload is
        numeric only.
    """
    if format not in ("csv", "tsv"):
        raise DomainError(f"format must be 'csv' or 'tsv', got {format!r}")
    delim = "," if format == "csv" else "\t"

    if isinstance(source, str):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    text = raw.decode("utf-8")

    rows: list[list[float]] = []
    width = None
    seen_first = False
    for i, ln in enumerate(text.splitlines(), start=1):
        if ln.strip() == "":
            continue
        cells = [c.strip() for c in ln.split(delim)]
        if not seen_first:
            seen_first = True
            # Line 1 is a header iff every field fails numeric parse
            # (a mixed line is a corrupt data row, not a header).
            if all(not _is_number(c) for c in cells):
                continue
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"ragged row at line {i}: expected {width} fields, got {len(cells)}",
                row=i,
            )
        rows.append([_parse_cell(c, i) for c in cells])

    if not rows:
        raise EmptyInput("no data rows in chain input")
    return ChainMatrix(np.array(rows, dtype=np.float64))


def column_means(chain: ChainMatrix) -> MeanVector:
    """Arithmetic mean of each column, the running estimate of the target."""
    return MeanVector(chain.data.mean(axis=0))
