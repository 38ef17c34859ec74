"""Catalog of standardized source distributions.

Every entry is shifted and scaled analytically to mean 0 and variance 1.
The stored moments are those of the standardized variable ``z``:
``E z^3``, ``E z^4`` and ``E z^6``.
"""

from dataclasses import dataclass
from math import sqrt

__all__ = [
    "DistributionSpec",
    "UnknownDistributionError",
    "UnsupportedMomentError",
    "CATALOG",
    "get_spec",
    "sample_source",
]


class UnknownDistributionError(KeyError):
    pass


class UnsupportedMomentError(ValueError):
    pass


@dataclass(frozen=True)
class DistributionSpec:
    name: str
    label: str
    mean: float
    sd: float
    m3: float
    m4: float
    m6: float

    @property
    def kurtosis(self):
        """Excess kurtosis of the standardized variable."""
        return self.m4 - 3.0

    @property
    def var_cube(self):
        """``Var[z^3]``."""
        return self.m6 - self.m3**2

    def standardize(self, x):
        return (x - self.mean) / self.sd


def _gamma(name, label, shape, scale=1.0):
    # cumulants k_n = shape * (n - 1)! * scale^n give the standardized moments below
    return DistributionSpec(
        name,
        label,
        mean=shape * scale,
        sd=sqrt(shape) * scale,
        m3=2.0 / sqrt(shape),
        m4=3.0 + 6.0 / shape,
        m6=15.0 + 130.0 / shape + 120.0 / shape**2,
    )


CATALOG = {
    s.name: s
    for s in [
        DistributionSpec("uniform", "Uniform(-sqrt3, sqrt3)", 0.0, 1.0, 0.0, 9.0 / 5.0, 27.0 / 7.0),
        DistributionSpec(
            "triangular", "Triangular(-sqrt6, sqrt6, 0)", 0.0, 1.0, 0.0, 12.0 / 5.0, 54.0 / 7.0
        ),
        DistributionSpec("normal", "N(0, 1)", 0.0, 1.0, 0.0, 3.0, 15.0),
        DistributionSpec("t10", "t_10", 0.0, sqrt(1.25), 0.0, 4.0, 40.0),
        _gamma("gamma3", "Gamma(3, sqrt3)", 3.0, 1.0 / sqrt(3.0)),
        DistributionSpec("laplace", "Laplace(0, 1/sqrt2)", 0.0, 1.0, 0.0, 6.0, 90.0),
        _gamma("chisq3", "chi^2_3", 1.5, 2.0),
        _gamma("gamma1.2", "Gamma(1.2, sqrt1.2)", 1.2, 1.0 / sqrt(1.2)),
        _gamma("exp", "Exp(1)", 1.0),
        _gamma("chisq1.5", "chi^2_1.5", 0.75, 2.0),
        _gamma("chisq1.2", "chi^2_1.2", 0.6, 2.0),
        # cumulants 1, 1, 3, 15, 105, 945
        DistributionSpec("invgauss", "InverseGaussian(1, 1)", 1.0, 1.0, 3.0, 18.0, 1275.0),
    ]
}

ALIASES = {"N": "normal", "L": "laplace", "E": "exp", "U": "uniform"}


def get_spec(name):
    if isinstance(name, DistributionSpec):
        return name
    key = ALIASES.get(name, name)
    try:
        return CATALOG[key]
    except KeyError:
        raise UnknownDistributionError(f"unknown distribution {name!r}") from None


def _raw(name, n, rng):
    if name == "uniform":
        return rng.uniform(-sqrt(3.0), sqrt(3.0), n)
    if name == "triangular":
        return rng.triangular(-sqrt(6.0), 0.0, sqrt(6.0), n)
    if name == "normal":
        return rng.standard_normal(n)
    if name == "t10":
        return rng.standard_t(10, n)
    if name == "gamma3":
        return rng.gamma(3.0, 1.0 / sqrt(3.0), n)
    if name == "laplace":
        return rng.laplace(0.0, 1.0 / sqrt(2.0), n)
    if name == "chisq3":
        return rng.chisquare(3.0, n)
    if name == "gamma1.2":
        return rng.gamma(1.2, 1.0 / sqrt(1.2), n)
    if name == "exp":
        return rng.exponential(1.0, n)
    if name == "chisq1.5":
        return rng.chisquare(1.5, n)
    if name == "chisq1.2":
        return rng.chisquare(1.2, n)
    if name == "invgauss":
        return rng.wald(1.0, 1.0, n)
    raise UnknownDistributionError(f"unknown distribution {name!r}")


def sample_source(spec, n, rng):
    """``n`` standardized draws from a catalog distribution."""
    spec = get_spec(spec)
    return spec.standardize(_raw(spec.name, n, rng))
