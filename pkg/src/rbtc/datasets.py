"""Two small real datasets bundled for the model-comparison examples."""

from __future__ import annotations

from dataclasses import dataclass

from .data import DataSample

__all__ = ["Dataset", "FAILURE_TIME", "IRON_SHEET", "DATASETS", "load"]


@dataclass(frozen=True)
class Dataset:
    name: str
    values: tuple[float, ...]
    source: str

    @property
    def sample(self) -> DataSample:
        return DataSample(self.values)


FAILURE_TIME = Dataset("failure_time", (
    0.0014, 0.0623, 1.3826, 2.0130, 2.5274, 2.8221, 3.1544, 4.9835, 5.5462, 5.8196,
    5.8714, 7.4710, 7.5080, 7.6667, 8.6122, 9.0442, 9.1153, 9.6477, 10.1547, 10.7582,
), "First 20 failure times from a 30-unit life test stopped at the 20th failure. "
   "Fitted as a complete sample, ignoring the type-II censoring.")

IRON_SHEET = Dataset("iron_sheet", (
    0.04, 0.02, 0.06, 0.12, 0.14, 0.08, 0.22, 0.12, 0.08, 0.26,
    0.24, 0.04, 0.14, 0.16, 0.08, 0.26, 0.32, 0.28, 0.14, 0.16,
    0.24, 0.22, 0.12, 0.18, 0.24, 0.32, 0.16, 0.14, 0.08, 0.16,
    0.24, 0.16, 0.32, 0.18, 0.24, 0.22, 0.16, 0.12, 0.24, 0.06,
    0.02, 0.18, 0.22, 0.14, 0.06, 0.04, 0.14, 0.26, 0.18, 0.16,
), "Measurements from a hole-making operation on 50 jobs made of iron sheet. "
   "Recorded at a 0.02 resolution, so heavily tied.")

DATASETS = {"failure_time": FAILURE_TIME, "iron_sheet": IRON_SHEET}


def load(name: str) -> DataSample:
    if name not in DATASETS:
        raise ValueError(f"unknown dataset {name!r}; available: {', '.join(DATASETS)}")
    return DATASETS[name].sample
