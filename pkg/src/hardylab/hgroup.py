"""Heisenberg group arithmetic, Koranyi geometry, and uniform ball/sphere sampling.

The group H^n lives on R^{2n+1}: 2n horizontal coordinates and one vertical
coordinate that scales quadratically under dilations.  Everything downstream
(quadrature, operators, experiments) consumes the constants derived here:
the homogeneous dimension Q = 2n+2, the Lebesgue volume of the unit Koranyi
ball, and the polar sphere constant omega = Q * volume.

All operations are exact formulas; the only randomness is in the samplers,
which take an explicit numpy Generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "HPoint",
    "GroupDims",
    "ProductSpec",
    "group_law",
    "inverse",
    "dilate",
    "koranyi_norm",
    "distance",
    "unit_ball_volume",
    "alt_unit_ball_volume",
    "ball_volume",
    "sample_unit_ball",
    "sample_unit_sphere",
    "sample_ball",
]


def _infer_n(dim: int) -> int:
    if dim < 3 or dim % 2 == 0:
        raise ValueError(f"coordinate length {dim} is not of the form 2n+1 with n >= 1")
    return (dim - 1) // 2


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point of H^n: 2n+1 real coordinates plus the group index n."""

    coords: np.ndarray
    n: int

    def __post_init__(self) -> None:
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.shape[0] != 2 * self.n + 1:
            raise ValueError(f"expected {2 * self.n + 1} coordinates for n={self.n}, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "coords", c)

    @classmethod
    def of(cls, *coords: float) -> "HPoint":
        c = np.asarray(coords, dtype=float)
        return cls(c, _infer_n(c.shape[0]))

    @classmethod
    def origin(cls, n: int) -> "HPoint":
        return cls(np.zeros(2 * n + 1), n)

    def __repr__(self) -> str:  # pragma: no cover
        return f"HPoint(n={self.n}, {np.array2string(self.coords, precision=6)})"


@lru_cache(maxsize=None)
def unit_ball_volume(n: int) -> float:
    """Lebesgue volume of the unit Koranyi ball {x : |x|_h < 1} in H^n.

    Reducing to the (rho, t) plane gives the closed form
    pi^(n+1/2) * Gamma(n/2) / ((n+1) * Gamma(n) * Gamma((n+1)/2)),
    e.g. pi^2/2 for n=1 and 2*pi^2/3 for n=2.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    return (
        math.pi ** (n + 0.5)
        * math.gamma(n / 2.0)
        / ((n + 1) * math.gamma(float(n)) * math.gamma((n + 1) / 2.0))
    )


def alt_unit_ball_volume(n: int) -> float:
    """Alternative normalization of the unit-ball constant found in the literature.

    Exactly twice `unit_ball_volume`; reports carry the ratio so the
    discrepancy stays visible.  Sharp-constant results do not depend on it.
    """
    return 2.0 * unit_ball_volume(n)


@dataclass(frozen=True)
class GroupDims:
    """Dimensional data of one factor H^n."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("group index n must be a positive integer")

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @property
    def Q(self) -> int:
        """Homogeneous dimension 2n+2 governing |delta_r E| = r^Q |E|."""
        return 2 * self.n + 2

    @property
    def ball_volume(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def omega(self) -> float:
        """Polar sphere constant Q * ball_volume, so that
        integral f dx = omega * integral_0^inf (sphere avg of f at r) r^(Q-1) dr."""
        return self.Q * self.ball_volume


@dataclass(frozen=True)
class ProductSpec:
    """A product H^{n_1} x ... x H^{n_m}."""

    factors: tuple[GroupDims, ...]

    def __post_init__(self) -> None:
        if len(self.factors) < 1:
            raise ValueError("a product space needs at least one factor")

    @classmethod
    def of_orders(cls, *ns: int) -> "ProductSpec":
        return cls(tuple(GroupDims(int(n)) for n in ns))

    @property
    def m(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)


def _coerce(x) -> tuple[np.ndarray, int, bool]:
    """Return (array, n, was_hpoint)."""
    if isinstance(x, HPoint):
        return x.coords, x.n, True
    arr = np.asarray(x, dtype=float)
    return arr, _infer_n(arr.shape[-1]), False


def _law_arrays(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    out = x + y
    cross = 2.0 * np.sum(
        y[..., :n] * x[..., n : 2 * n] - x[..., :n] * y[..., n : 2 * n], axis=-1
    )
    out[..., 2 * n] = x[..., 2 * n] + y[..., 2 * n] + cross
    return out


def group_law(x, y):
    """Group product x o y.  Horizontal parts add; the vertical part picks up
    the symplectic cross term 2 * sum_j (y_j x_{n+j} - x_j y_{n+j})."""
    xa, xn, xh = _coerce(x)
    ya, yn, yh = _coerce(y)
    if xn != yn:
        raise ValueError(f"dimension mismatch: n={xn} vs n={yn}")
    out = _law_arrays(xa, ya, xn)
    if xh and yh:
        return HPoint(out, xn)
    return out


def inverse(x):
    """Group inverse: coordinate-wise negation."""
    xa, xn, xh = _coerce(x)
    out = -xa
    return HPoint(out, xn) if xh else out


def dilate(r, x):
    """Anisotropic dilation delta_r: horizontal coordinates scale by r,
    the vertical coordinate by r^2.  Requires r > 0."""
    xa, xn, xh = _coerce(x)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("dilation parameter must be positive")
    out = xa.copy()
    out[..., : 2 * xn] *= r[..., None] if r.ndim else r
    out[..., 2 * xn] *= r * r
    if xh:
        return HPoint(out, xn)
    return out


def koranyi_norm(x):
    """Koranyi gauge ((sum_i x_i^2)^2 + x_vert^2)^(1/4)."""
    xa, xn, _ = _coerce(x)
    horiz = np.sum(xa[..., : 2 * xn] ** 2, axis=-1)
    val = (horiz**2 + xa[..., 2 * xn] ** 2) ** 0.25
    return float(val) if val.ndim == 0 else val


def distance(p, q):
    """Left-invariant distance d(p, q) = |q^{-1} o p|_h."""
    pa, pn, _ = _coerce(p)
    qa, qn, _ = _coerce(q)
    if pn != qn:
        raise ValueError(f"dimension mismatch: n={pn} vs n={qn}")
    return koranyi_norm(_law_arrays(-qa, pa, pn))


def ball_volume(dims: GroupDims, r: float) -> float:
    """Volume of the Koranyi ball of radius r: ball_volume * r^Q."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return dims.ball_volume * r**dims.Q


def sample_unit_ball(dims: GroupDims, rng: np.random.Generator, size: int | None = None):
    """Uniform (Haar/Lebesgue) samples on the open unit Koranyi ball.

    The radial pair (rho, t) is drawn by rejection against the density
    proportional to rho^(2n-1) on {rho^4 + t^2 < 1}; a uniform direction on
    the Euclidean sphere S^(2n-1) supplies the horizontal part.  Acceptance
    rates stay dimension-independent because the proposal already carries
    the rho^(2n-1) weight.
    """
    m = 1 if size is None else int(size)
    n = dims.n
    rho = np.empty(m)
    t = np.empty(m)
    filled = 0
    while filled < m:
        k = max(64, int(1.6 * (m - filled)))
        rho_prop = rng.random(k) ** (1.0 / (2 * n))
        t_prop = rng.uniform(-1.0, 1.0, k)
        ok = rho_prop**4 + t_prop**2 < 1.0
        take = min(int(ok.sum()), m - filled)
        idx = np.nonzero(ok)[0][:take]
        rho[filled : filled + take] = rho_prop[idx]
        t[filled : filled + take] = t_prop[idx]
        filled += take
    direction = rng.standard_normal((m, 2 * n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    pts = np.empty((m, dims.dim))
    pts[:, : 2 * n] = rho[:, None] * direction
    pts[:, 2 * n] = t
    if size is None:
        return HPoint(pts[0], n)
    return pts


def sample_unit_sphere(dims: GroupDims, rng: np.random.Generator, size: int | None = None):
    """Samples on the unit Koranyi sphere under the normalized polar surface
    measure, realized by projecting a uniform ball sample x to delta_{1/|x|_h}(x)."""
    pts = sample_unit_ball(dims, rng, size=1 if size is None else size)
    arr = pts if size is not None else pts.coords[None, :]
    norms = koranyi_norm(arr)
    out = arr.copy()
    out[:, : 2 * dims.n] /= norms[:, None]
    out[:, 2 * dims.n] /= norms**2
    if size is None:
        return HPoint(out[0], dims.n)
    return out


def sample_ball(dims: GroupDims, rng: np.random.Generator, radius: float, size: int):
    """Uniform samples on B(0, radius): unit-ball samples pushed through delta_radius."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    pts = sample_unit_ball(dims, rng, size=size)
    pts[:, : 2 * dims.n] *= radius
    pts[:, 2 * dims.n] *= radius * radius
    return pts
