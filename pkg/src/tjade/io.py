"""Readers and writers for observation files, matrices and fitted models."""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .ica import UnmixingModel
from .tensor import unvectorize_sample, vectorize_sample

__all__ = [
    "InputFormatError",
    "SemeionRecord",
    "read_semeion",
    "read_generic",
    "write_generic",
    "read_matrix",
    "write_model",
    "read_model",
]

SEMEION_SIDE = 16
SEMEION_FIELDS = SEMEION_SIDE * SEMEION_SIDE + 10


class InputFormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class SemeionRecord:
    image: np.ndarray
    label: int


def _parse_semeion_line(text, lineno):
    fields = text.split()
    if len(fields) != SEMEION_FIELDS:
        raise InputFormatError(f"expected {SEMEION_FIELDS} fields, found {len(fields)}", lineno)
    try:
        values = np.array([float(f) for f in fields])
    except ValueError:
        raise InputFormatError("non-numeric field", lineno) from None
    flags = values[-10:]
    hits = np.flatnonzero(flags == 1)
    if hits.size != 1 or np.count_nonzero(flags) != 1:
        raise InputFormatError("label block must contain exactly one 1", lineno)
    # pixels are stored row by row
    image = values[:-10].reshape(SEMEION_SIDE, SEMEION_SIDE)
    return SemeionRecord(image, int(hits[0]))


def read_semeion(path, digits=None):
    """Read the semeion handwritten digit file.

    Each line holds 256 pixel values of a 16x16 image followed by ten
    one-hot label flags for the digits 0..9. Returns ``(images, labels)``
    with ``images`` of shape ``(n, 16, 16)``, optionally keeping only
    ``digits``.
    """
    images, labels = [], []
    keep = None if digits is None else set(digits)
    with open(path) as fh:
        for lineno, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            rec = _parse_semeion_line(text, lineno)
            if keep is None or rec.label in keep:
                images.append(rec.image)
                labels.append(rec.label)
    if not images:
        raise InputFormatError("no observations read")
    return np.array(images), np.array(labels)


def read_generic(path, dims):
    """Headerless CSV, one vectorized tensor (leftmost index fastest) per row."""
    dims = tuple(int(d) for d in dims)
    size = int(np.prod(dims))
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != size:
                raise InputFormatError(f"expected {size} fields, found {len(rec)}", lineno)
            try:
                rows.append([float(f) for f in rec])
            except ValueError:
                raise InputFormatError("non-numeric field", lineno) from None
    if not rows:
        raise InputFormatError("no observations read")
    return unvectorize_sample(np.array(rows), dims)


def write_generic(sample, path):
    np.savetxt(path, vectorize_sample(sample), delimiter=",", fmt="%.17g")


def read_matrix(path):
    """A square matrix from a headerless CSV file."""
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise InputFormatError(str(exc)) from None
    return A


def write_model(model, path):
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=2)


def read_model(path):
    with open(path) as fh:
        return UnmixingModel.from_dict(json.load(fh))
