"""Sample container shared by the estimators, the GOF tests and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class DataSample:
    """A batch of positive observations with cached order statistics."""

    values: np.ndarray
    sorted_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample contains non-finite values")
        if np.any(vals <= 0):
            raise ValueError("all observations must be > 0")
        vals.setflags(write=False)
        srt = np.sort(vals)
        srt.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "sorted_values", srt)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, DataSample):
            return NotImplemented
        return np.array_equal(self.sorted_values, other.sorted_values)

    __hash__ = None


def as_sample(data) -> DataSample:
    return data if isinstance(data, DataSample) else DataSample(np.asarray(data, dtype=float))
