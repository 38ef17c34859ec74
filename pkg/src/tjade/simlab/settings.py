"""Source layouts used in the simulation studies."""

from dataclasses import dataclass

import numpy as np

from .distributions import get_spec, sample_source

__all__ = ["SettingSpec", "SETTINGS", "get_setting", "setting_from_grid", "draw_sources"]


@dataclass(frozen=True)
class SettingSpec:
    """A tensor-shaped grid of independent source distributions.

    ``cells`` is an object array of :class:`DistributionSpec` with the
    tensor's shape.
    """

    name: str
    cells: np.ndarray

    @property
    def dims(self):
        return tuple(self.cells.shape)

    def kurtosis(self):
        return np.vectorize(lambda s: s.kurtosis, otypes=[float])(self.cells)

    def moments(self, attr):
        return np.vectorize(lambda s: getattr(s, attr), otypes=[float])(self.cells)


def _grid(name, nested):
    names = np.array(nested, dtype=object)
    return SettingSpec(name, np.vectorize(get_spec, otypes=[object])(names))


def _from_faces(name, faces):
    # faces are the 3x3 slices along the last mode
    return _grid(name, np.stack([np.array(f, dtype=object) for f in faces], axis=-1))


# Filled column by column, starting from the upper left corner.
_GRID_3X4 = [
    "uniform", "triangular", "normal",
    "t10", "gamma3", "laplace",
    "chisq3", "gamma1.2", "exp",
    "chisq1.5", "chisq1.2", "invgauss",
]  # fmt: skip

SETTINGS = {
    "grid3x4": _grid("grid3x4", np.array(_GRID_3X4, dtype=object).reshape((3, 4), order="F")),
    "setting1": _from_faces(
        "setting1",
        [
            [["N", "L", "E"], ["L", "L", "E"], ["E", "E", "E"]],
            [["U", "U", "U"], ["U", "L", "L"], ["U", "L", "E"]],
        ],
    ),
    "setting2": _from_faces(
        "setting2",
        [
            [["N", "L", "L"], ["L", "L", "L"], ["L", "L", "L"]],
            [["U", "U", "U"], ["U", "L", "L"], ["U", "L", "L"]],
        ],
    ),
    "setting3": _from_faces(
        "setting3",
        [
            [["E", "E", "N"], ["E", "E", "N"], ["N", "N", "N"]],
            [["N", "N", "N"], ["N", "N", "N"], ["N", "N", "N"]],
        ],
    ),
}


def setting_from_grid(grid, name="custom"):
    """Build a setting from a nested list of distribution names."""
    return _grid(name, grid)


def get_setting(setting):
    if isinstance(setting, SettingSpec):
        return setting
    if isinstance(setting, str):
        try:
            return SETTINGS[setting]
        except KeyError:
            raise ValueError(
                f"unknown setting {setting!r}; expected one of {sorted(SETTINGS)}"
            ) from None
    return setting_from_grid(setting)


def draw_sources(setting, n, rng):
    """``n`` independent tensors with entries drawn cell by cell."""
    setting = get_setting(setting)
    Z = np.empty((n,) + setting.dims)
    for idx in np.ndindex(*setting.dims):
        Z[(slice(None),) + idx] = sample_source(setting.cells[idx], n, rng)
    return Z
