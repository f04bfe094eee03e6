"""System configuration and Rayleigh channel realizations.

Channels are drawn from numpy's Philox4x64 counter-based generator so a
given integer seed yields the same stream on every platform.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .exceptions import InvalidInputError
from .linalg import as_hermitian

__all__ = [
    "SystemConfig",
    "ChannelSet",
    "draw_channels",
    "relay_rx_covariance",
    "relay_noise_covariance",
    "load_config",
    "parse_config",
    "trial_seed",
]


@dataclass(frozen=True)
class SystemConfig:
    """Two single-antenna terminals talking through an ``m_r``-antenna relay.

    Powers are linear (watts). ``d2`` is the relay to terminal-2 distance on
    a unit-length line, so terminal 1 sits at ``d1 = 1 - d2``.
    ``relay_noise_cov`` optionally replaces the white ``p_nr * I`` relay
    noise; it is a library-only knob and is not read from config files.
    """

    m_r: int = 3
    p_t1: float = 1.0
    p_t2: float = 1.0
    p_tr: float = 1.0
    p_n1: float = 1.0
    p_n2: float = 1.0
    p_nr: float = 1.0
    d2: float = 0.5
    nu: float = 3.0
    white_relay_noise: bool = True
    reciprocal: bool = True
    relay_noise_cov: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if int(self.m_r) != self.m_r or self.m_r < 1:
            raise InvalidInputError(f"m_r must be a positive integer, got {self.m_r}")
        object.__setattr__(self, "m_r", int(self.m_r))
        for name in ("p_t1", "p_t2", "p_tr", "p_n1", "p_n2", "p_nr"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if not 0.0 < self.d2 < 1.0:
            raise InvalidInputError(f"d2 must lie in (0, 1), got {self.d2}")
        if not self.nu >= 0:
            raise InvalidInputError(f"nu must be non-negative, got {self.nu}")
        if self.relay_noise_cov is not None:
            cov = as_hermitian(self.relay_noise_cov, "relay_noise_cov")
            if cov.shape != (self.m_r, self.m_r):
                raise InvalidInputError("relay_noise_cov must be m_r x m_r")
            object.__setattr__(self, "relay_noise_cov", cov)
            object.__setattr__(self, "white_relay_noise", False)

    @property
    def d1(self):
        return 1.0 - self.d2

    def with_noise(self, sigma2):
        """Copy with all three noise powers set to ``sigma2``."""
        return replace(self, p_n1=sigma2, p_n2=sigma2, p_nr=sigma2)


@dataclass(frozen=True)
class ChannelSet:
    """Forward (terminal to relay) and backward (relay to terminal) channels."""

    h1f: np.ndarray
    h2f: np.ndarray
    h1b: np.ndarray
    h2b: np.ndarray

    @property
    def m_r(self):
        return self.h1f.shape[0]


def _circular_gaussian(rng, variance, size):
    scale = np.sqrt(variance / 2.0)
    return scale * rng.standard_normal(size) + 1j * scale * rng.standard_normal(size)


def draw_channels(config, rng_seed):
    """Draw one uncorrelated Rayleigh realization.

    Entries of the channel between terminal ``i`` and the relay are
    circularly-symmetric complex Gaussian with variance ``1 / d_i**nu``.
    Backward channels equal the forward ones when ``config.reciprocal``,
    otherwise they are drawn independently with the same statistics.
    """
    rng = np.random.Generator(np.random.Philox(int(rng_seed)))
    m = config.m_r
    var1 = config.d1 ** (-config.nu)
    var2 = config.d2 ** (-config.nu)
    h1f = _circular_gaussian(rng, var1, m)
    h2f = _circular_gaussian(rng, var2, m)
    if config.reciprocal:
        h1b, h2b = h1f.copy(), h2f.copy()
    else:
        h1b = _circular_gaussian(rng, var1, m)
        h2b = _circular_gaussian(rng, var2, m)
    return ChannelSet(h1f, h2f, h1b, h2b)


def relay_noise_covariance(config):
    if config.relay_noise_cov is not None:
        return config.relay_noise_cov
    return config.p_nr * np.eye(config.m_r, dtype=complex)


def relay_rx_covariance(config, ch):
    """Covariance of the signal received at the relay."""
    r = (
        np.outer(ch.h1f, ch.h1f.conj()) * config.p_t1
        + np.outer(ch.h2f, ch.h2f.conj()) * config.p_t2
        + relay_noise_covariance(config)
    )
    return 0.5 * (r + r.conj().T)


def trial_seed(base_seed, *keys):
    """Derive a 64-bit stream seed from a base seed and integer keys.

    Uses ``numpy.random.SeedSequence`` hashing so neighbouring trials get
    decorrelated streams.
    """
    seq = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


_BOOL_WORDS = {"1": True, "true": True, "yes": True, "on": True,
               "0": False, "false": False, "no": False, "off": False}


def parse_config(text, base=None):
    """Parse flat ``key=value`` text into a :class:`SystemConfig`.

    Blank lines and ``#`` comments are ignored. Keys mirror the dataclass
    field names; unspecified keys keep the values of ``base``.
    """
    types = {f.name: f.type for f in fields(SystemConfig) if f.name != "relay_noise_cov"}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise InvalidInputError(f"line {lineno}: unknown key {key!r}")
        kind = types[key]
        if kind in (bool, "bool"):
            if value.lower() not in _BOOL_WORDS:
                raise InvalidInputError(f"line {lineno}: {key} expects a boolean")
            values[key] = _BOOL_WORDS[value.lower()]
        else:
            cast = int if kind in (int, "int") else float
            try:
                values[key] = cast(value)
            except ValueError:
                raise InvalidInputError(
                    f"line {lineno}: {key} expects {cast.__name__}, got {value!r}") from None
    return replace(base or SystemConfig(), **values)


def load_config(path, base=None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)
