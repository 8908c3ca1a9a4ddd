"""Seedable randomness, time grids, and coupled Brownian paths on [0, 1].

All simulations run on the unit time horizon with dyadic grids by default.
Randomness is organised as a tree of counter-based streams keyed by
``(master_seed, path)``: the same key always reproduces the same draws, and
distinct keys give statistically independent streams, so Monte Carlo samples
can be generated in any order or in parallel without changing results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Purpose tags are mapped into a high integer range so they cannot collide
# with sample indices or grid resolutions appearing in the same stream path.
_TAG_BASE = 0x7FF00000
_PURPOSE_TAGS = {
    "brownian": _TAG_BASE + 1,
    "offsets": _TAG_BASE + 2,
    "offsets_ref": _TAG_BASE + 3,
    "quadrature": _TAG_BASE + 4,
    "probe": _TAG_BASE + 5,
    "holder": _TAG_BASE + 6,
    "selftest": _TAG_BASE + 7,
}


def _as_key(part: int | str) -> int:
    if isinstance(part, str):
        try:
            return _PURPOSE_TAGS[part]
        except KeyError:
            raise ValueError(
                f"unknown stream tag {part!r}; registered tags: {sorted(_PURPOSE_TAGS)}"
            ) from None
    key = int(part)
    if key < 0:
        raise ValueError(f"stream path entries must be non-negative, got {part}")
    return key


@dataclass(frozen=True)
class RngStream:
    """A label in the stream tree; ``generator()`` materialises the draws.

    Streams are value objects: deriving a child never mutates the parent, so
    any worker can re-derive the stream for a given sample index and obtain
    bit-identical draws regardless of scheduling.
    """

    master_seed: int
    path: tuple[int, ...] = ()

    def child(self, *parts: int | str) -> "RngStream":
        """Derive a sub-stream; parts are sample indices, resolutions, or purpose tags."""
        return RngStream(self.master_seed, self.path + tuple(_as_key(p) for p in parts))

    def generator(self) -> np.random.Generator:
        """A fresh counter-based generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))

    @property
    def label(self) -> str:
        return f"seed={self.master_seed}:" + "/".join(str(p) for p in self.path)


@dataclass(frozen=True)
class TimeGrid:
    """The uniform grid {j/n : j = 0..n} on [0, 1]."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    @property
    def step(self) -> float:
        return 1.0 / self.n

    def node(self, j: int) -> float:
        if not 0 <= j <= self.n:
            raise ValueError(f"node index {j} outside 0..{self.n}")
        return j / self.n

    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n


def kappa(n: int, s: float) -> float:
    """Left grid node below s: floor(n*s)/n. Maps s=1 to 1."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    return math.floor(n * s) / n


def kappa_tau(n: int, s: float, offsets: "RandomOffsets") -> float:
    """Randomly shifted node (floor(n*s) + tau_j)/n, strictly inside s's subinterval.

    Subinterval j in {0..n-1} uses ``offsets.taus[j]``.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s must lie in [0, 1), got {s}")
    j = math.floor(n * s)
    if offsets.n < n:
        raise ValueError(f"offsets too short: have {offsets.n}, need at least {n}")
    return (j + offsets.taus[j]) / n


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RandomOffsets:
    """I.i.d. uniform offsets tau_j, one per subinterval, strictly inside (0, 1)."""

    taus: np.ndarray

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=float)
        if taus.ndim != 1 or taus.size < 1:
            raise ValueError("taus must be a non-empty 1-d array")
        if np.any(taus <= 0.0) or np.any(taus >= 1.0):
            raise ValueError("offsets must lie strictly inside (0, 1)")
        object.__setattr__(self, "taus", _freeze(taus.copy()))

    @property
    def n(self) -> int:
        return self.taus.size


def sample_offsets(n: int, stream: RngStream) -> RandomOffsets:
    """Draw n i.i.d. U(0,1) offsets from the given stream."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    gen = stream.generator()
    u = gen.random(n)
    # random() covers [0, 1); redraw the measure-zero exact zeros so the
    # open-interval contract holds.
    while True:
        zero = u == 0.0
        if not zero.any():
            break
        u[zero] = gen.random(int(zero.sum()))
    return RandomOffsets(u)


@dataclass(frozen=True)
class BrownianPath:
    """A d-dimensional Brownian path stored on its finest grid.

    ``increments[j]`` is B(t_{j+1}) - B(t_j), i.i.d. N(0, 1/n_fine) per
    component; ``positions`` holds the running prefix sums with
    ``positions[0] = 0``. Coarser views are always derived from ``positions``
    so that every grid sharing nodes with this one sees bit-identical values.
    """

    increments: np.ndarray
    positions: np.ndarray
    seed_label: str = ""

    def __post_init__(self) -> None:
        inc = np.asarray(self.increments, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        if inc.ndim != 2:
            raise ValueError("increments must have shape (n_fine, d)")
        if pos.shape != (inc.shape[0] + 1, inc.shape[1]):
            raise ValueError("positions must have shape (n_fine + 1, d)")
        object.__setattr__(self, "increments", _freeze(inc))
        object.__setattr__(self, "positions", _freeze(pos))

    @property
    def n_fine(self) -> int:
        return self.increments.shape[0]

    @property
    def d(self) -> int:
        return self.increments.shape[1]

    def position(self, j: int) -> np.ndarray:
        return self.positions[j]

    @staticmethod
    def from_increments(increments: np.ndarray, seed_label: str = "") -> "BrownianPath":
        inc = np.ascontiguousarray(increments, dtype=float)
        if inc.ndim != 2:
            raise ValueError("increments must have shape (n_fine, d)")
        pos = np.empty((inc.shape[0] + 1, inc.shape[1]))
        pos[0] = 0.0
        np.cumsum(inc, axis=0, out=pos[1:])
        return BrownianPath(inc, pos, seed_label)


def sample_brownian(n_fine: int, d: int, stream: RngStream) -> BrownianPath:
    """Sample a Brownian path with n_fine increments of variance 1/n_fine each."""
    if n_fine < 1:
        raise ValueError(f"n_fine must be positive, got {n_fine}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    inc = stream.generator().standard_normal((n_fine, d)) * math.sqrt(1.0 / n_fine)
    return BrownianPath.from_increments(inc, stream.label)


def coarsen_path(path: BrownianPath, factor: int) -> BrownianPath:
    """View the path on a grid coarser by ``factor``.

    Coarse increments are taken as differences of the fine node positions,
    i.e. the block sums of fine increments evaluated on the running prefix.
    This makes nested coarsening compose bit-exactly and guarantees that
    positions at shared nodes coincide bit-for-bit with the fine path, which
    is what couples coarse and reference simulations to the same noise.
    """
    if factor < 1:
        raise ValueError(f"factor must be positive, got {factor}")
    if path.n_fine % factor != 0:
        raise ValueError(f"factor {factor} does not divide resolution {path.n_fine}")
    pos = path.positions[::factor]
    inc = np.diff(pos, axis=0)
    label = path.seed_label and f"{path.seed_label}/coarse{factor}"
    return BrownianPath(inc, pos, label)
