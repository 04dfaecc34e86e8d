"""Seeded generators for synthetic series with known statistical properties.

Each generator is a pure function of (kind, parameters, length, seed).  All
randomness comes from numpy's PCG64 bit generator — a published, 64-bit
permuted-congruential generator with fixed documented constants — seeded
through ``SeedSequence``, whose ``spawn`` mechanism gives splittable,
non-overlapping child streams.  Identical specs therefore reproduce the
same values bit for bit across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigError

GENERATOR_KINDS = (
    "iid_gaussian",
    "iid_exceedance",
    "random_walk",
    "stretched_exp_intervals",
    "long_memory_volatility",
)

# Parameters each kind requires beyond (length, seed).
_REQUIRED = {
    "iid_gaussian": (),
    "iid_exceedance": ("p",),
    "random_walk": (),
    "stretched_exp_intervals": ("gamma", "alpha"),
    "long_memory_volatility": ("hurst",),
}


@dataclass(frozen=True)
class GeneratorSpec:
    """Full description of one synthetic series: kind, parameters, length, seed."""

    kind: str
    length: int
    seed: int
    p: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    hurst: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GENERATOR_KINDS:
            raise ConfigError(f"bad generator spec: unknown kind {self.kind!r}")
        if not isinstance(self.length, (int, np.integer)) or isinstance(self.length, bool):
            raise ConfigError("bad generator spec: length must be an integer")
        if self.length < 1:
            raise ConfigError(f"bad generator spec: length must be >= 1, got {self.length}")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise ConfigError("bad generator spec: seed must be an integer")
        if self.seed < 0:
            raise ConfigError(f"bad generator spec: seed must be >= 0, got {self.seed}")
        required = _REQUIRED[self.kind]
        for name in ("p", "gamma", "alpha", "hurst"):
            value = getattr(self, name)
            if name in required and value is None:
                raise ConfigError(f"bad generator spec: {self.kind} requires {name}")
            if name not in required and value is not None:
                raise ConfigError(f"bad generator spec: {self.kind} does not take {name}")
        if self.p is not None and not 0.0 < self.p < 1.0:
            raise ConfigError(f"bad generator spec: p must be in (0, 1), got {self.p}")
        if self.gamma is not None and not self.gamma > 0.0:
            raise ConfigError(f"bad generator spec: gamma must be > 0, got {self.gamma}")
        if self.alpha is not None and not self.alpha > 0.0:
            raise ConfigError(f"bad generator spec: alpha must be > 0, got {self.alpha}")
        # hurst = 0.5 is allowed so the uncorrelated limit stays testable.
        if self.hurst is not None and not 0.5 <= self.hurst < 1.0:
            raise ConfigError(f"bad generator spec: hurst must be in [0.5, 1), got {self.hurst}")

    def params(self) -> dict:
        out: dict = {"kind": self.kind, "length": int(self.length), "seed": int(self.seed)}
        for name in _REQUIRED[self.kind]:
            out[name] = float(getattr(self, name))
        return out


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse ``"kind:key=value,key=value"`` (e.g. from a CLI flag) into a spec."""
    head, _, tail = text.partition(":")
    kind = head.strip()
    kwargs: dict = {}
    if tail.strip():
        for item in tail.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"bad generator spec: cannot parse {item!r}")
            try:
                kwargs[key] = int(value) if key in ("length", "seed") else float(value)
            except ValueError:
                raise ConfigError(f"bad generator spec: bad value in {item!r}") from None
    if "length" not in kwargs or "seed" not in kwargs:
        raise ConfigError("bad generator spec: length and seed are required")
    try:
        return GeneratorSpec(kind=kind, **kwargs)
    except TypeError:
        raise ConfigError(f"bad generator spec: unknown parameter in {text!r}") from None


def generate(spec: GeneratorSpec) -> np.ndarray:
    """Generate the series described by ``spec`` as a float64 array.

    Output is deterministic in the spec: the same (kind, parameters,
    length, seed) always yields the identical array.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.length
    if spec.kind == "iid_gaussian":
        return rng.standard_normal(n)
    if spec.kind == "iid_exceedance":
        return (rng.random(n) < spec.p).astype(np.float64)
    if spec.kind == "random_walk":
        steps = rng.integers(0, 2, size=n).astype(np.int64) * 2 - 1
        return np.cumsum(steps).astype(np.float64)
    if spec.kind == "stretched_exp_intervals":
        return _stretched_exp_samples(n, spec.gamma, spec.alpha, rng)
    if spec.kind == "long_memory_volatility":
        return np.abs(_fractional_gaussian_noise(n, spec.hurst, rng))
    raise ConfigError(f"bad generator spec: unknown kind {spec.kind!r}")  # pragma: no cover


def stretched_exp_cdf(x, gamma: float, alpha: float):
    """CDF of the density proportional to exp(-alpha * x**gamma) on x > 0.

    Integrating the density gives the regularized lower incomplete gamma
    function P(1/gamma, alpha * x**gamma).
    """
    x = np.asarray(x, dtype=np.float64)
    return special.gammainc(1.0 / gamma, alpha * np.power(np.maximum(x, 0.0), gamma))


def _stretched_exp_samples(n: int, gamma: float, alpha: float, rng) -> np.ndarray:
    # Inverse-CDF sampling.  gammaincinv inverts the regularized incomplete
    # gamma function to near machine precision, far inside 1e-10 absolute.
    u = rng.random(n)
    u = np.maximum(u, np.finfo(np.float64).tiny)  # keep samples strictly positive
    y = special.gammaincinv(1.0 / gamma, u)
    return np.power(y / alpha, 1.0 / gamma)


def _fgn_autocov(lags: np.ndarray, hurst: float) -> np.ndarray:
    k = np.abs(lags).astype(np.float64)
    h2 = 2.0 * hurst
    return 0.5 * ((k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)


def _fractional_gaussian_noise(n: int, hurst: float, rng) -> np.ndarray:
    """Stationary unit-variance Gaussian noise with Hurst-type covariance.

    Circulant-embedding synthesis: the target autocovariance is wrapped
    onto a circle of size 2n, diagonalized by FFT, and independent normals
    are colored by the square root of the (provably non-negative) spectrum.
    Draw order is fixed, so output is reproducible for a given seed.
    """
    if n == 1:
        return rng.standard_normal(1)
    m = 2 * n
    c = np.empty(m, dtype=np.float64)
    c[: n + 1] = _fgn_autocov(np.arange(n + 1), hurst)
    c[n + 1 :] = c[1:n][::-1]
    lam = np.fft.rfft(c).real
    if lam.min() < -1e-8 * lam.max():
        raise ConfigError(
            f"bad generator spec: circulant spectrum not non-negative for hurst={hurst}"
        )
    lam = np.maximum(lam, 0.0)

    z = np.empty(n + 1, dtype=np.complex128)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    v = rng.standard_normal((2, n - 1))
    z[1:n] = (v[0] + 1j * v[1]) / np.sqrt(2.0)
    coloured = np.sqrt(lam) * z
    return np.sqrt(m) * np.fft.irfft(coloured, n=m)[:n]
