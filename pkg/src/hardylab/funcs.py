"""Test functions on products of Heisenberg groups.

Four families cover everything the experiments need: truncated power
functions inside and outside the unit polyball (the near-extremal families),
radial products of 1D profiles, and smooth bump mixtures (the non-radial
fuzzing surface).  Each function evaluates vectorized batches of per-factor
coordinate arrays and knows its own support and, where available, its exact
L^p norm and radial profiles.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import hgroup
from .hgroup import GroupDims, HPoint, ProductSpec, koranyi_norm
from .measure import Estimate, substream, TAG_RADIALIZE

__all__ = [
    "ProductPoint",
    "TestFunction",
    "PowerInside",
    "PowerOutside",
    "RadialProduct",
    "Bump",
    "BumpMixture",
    "UnsupportedFamilyError",
    "evaluate",
    "radialize",
    "closed_lp_norm_power",
    "RadializedFunction",
    "DilatedFunction",
    "random_bump_mixture",
    "parse_test_function",
]


class UnsupportedFamilyError(TypeError):
    """A closed or radial method was asked of a family that lacks it."""


@dataclass(frozen=True)
class ProductPoint:
    """A point of the product space: one HPoint per factor."""

    points: tuple[HPoint, ...]

    @classmethod
    def of(cls, *pts: HPoint) -> "ProductPoint":
        return cls(tuple(pts))

    @classmethod
    def from_radii(cls, spec: ProductSpec, radii) -> "ProductPoint":
        """A representative point with |x_i|_h = radii[i] (first horizontal axis)."""
        pts = []
        for dims, r in zip(spec.factors, radii):
            c = np.zeros(dims.dim)
            c[0] = float(r)
            pts.append(HPoint(c, dims.n))
        return cls(tuple(pts))

    def matches(self, spec: ProductSpec) -> bool:
        return len(self.points) == spec.m and all(
            p.n == d.n for p, d in zip(self.points, spec.factors)
        )

    @property
    def radii(self) -> tuple[float, ...]:
        return tuple(float(koranyi_norm(p)) for p in self.points)

    def arrays(self) -> list[np.ndarray]:
        return [p.coords[None, :] for p in self.points]


class TestFunction:
    """Base class: a callable on lists of per-factor coordinate batches."""

    spec: ProductSpec
    family: str = "generic"

    def __call__(self, pts: list[np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def support_radii(self) -> tuple[float, ...]:
        """Per-factor radius S_i with f = 0 outside the polyball of those radii."""
        raise NotImplementedError

    def radial_profiles(self):
        """Per-factor (profile, lower, upper) when f is a radial product."""
        raise UnsupportedFamilyError(f"{self.family} is not a radial product")

    def lp_norm_exact(self, p: float) -> float:
        raise UnsupportedFamilyError(f"no closed-form norm for {self.family}")


def _radii_of(pts: list[np.ndarray]) -> list[np.ndarray]:
    return [koranyi_norm(a) for a in pts]


@dataclass(frozen=True)
class PowerInside(TestFunction):
    """prod_i |x_i|_h^(alpha_i) restricted to the open unit polyball."""

    spec: ProductSpec
    alphas: tuple[float, ...]
    family: str = field(default="power-inside", init=False)

    def __post_init__(self) -> None:
        if len(self.alphas) != self.spec.m:
            raise ValueError("one exponent per factor required")

    @classmethod
    def extremal(cls, spec: ProductSpec, p: float, eps: float) -> "PowerInside":
        """The near-extremal family with alpha_i = -Q_i/p + eps."""
        return cls(spec, tuple(-d.Q / p + eps for d in spec.factors))

    def __call__(self, pts: list[np.ndarray]) -> np.ndarray:
        radii = _radii_of(pts)
        inside = np.ones_like(radii[0], dtype=bool)
        for r in radii:
            inside &= r < 1.0
        out = np.zeros_like(radii[0], dtype=float)
        if inside.any():
            acc = np.ones(int(inside.sum()))
            with np.errstate(divide="ignore"):
                for r, a in zip(radii, self.alphas):
                    acc = acc * r[inside] ** a
            out[inside] = acc
        return out

    def support_radii(self) -> tuple[float, ...]:
        return (1.0,) * self.spec.m

    def radial_profiles(self):
        return [
            ((lambda r, a=a: r**a), 0.0, 1.0)
            for a in self.alphas
        ]

    def lp_norm_exact(self, p: float) -> float:
        normp = 1.0
        for dims, a in zip(self.spec.factors, self.alphas):
            denom = a * p + dims.Q
            if denom <= 0:
                raise ValueError("norm infinite: alpha*p + Q must be positive")
            normp *= dims.omega / denom
        return normp ** (1.0 / p)


@dataclass(frozen=True)
class PowerOutside(TestFunction):
    """prod_i |x_i|_h^(-beta_i) restricted to |x_i|_h > 1 for every factor."""

    spec: ProductSpec
    betas: tuple[float, ...]
    family: str = field(default="power-outside", init=False)

    def __post_init__(self) -> None:
        if len(self.betas) != self.spec.m:
            raise ValueError("one exponent per factor required")

    @classmethod
    def extremal(cls, spec: ProductSpec, p: float, eps: float) -> "PowerOutside":
        """The outside-ball family with beta_i = Q_i/p + eps."""
        return cls(spec, tuple(d.Q / p + eps for d in spec.factors))

    def __call__(self, pts: list[np.ndarray]) -> np.ndarray:
        radii = _radii_of(pts)
        outside = np.ones_like(radii[0], dtype=bool)
        for r in radii:
            outside &= r > 1.0
        out = np.zeros_like(radii[0], dtype=float)
        if outside.any():
            acc = np.ones(int(outside.sum()))
            for r, b in zip(radii, self.betas):
                acc = acc * r[outside] ** (-b)
            out[outside] = acc
        return out

    def support_radii(self) -> tuple[float, ...]:
        return (math.inf,) * self.spec.m

    def radial_profiles(self):
        return [
            ((lambda r, b=b: r**-b), 1.0, math.inf)
            for b in self.betas
        ]

    def lp_norm_exact(self, p: float) -> float:
        normp = 1.0
        for dims, b in zip(self.spec.factors, self.betas):
            denom = b * p - dims.Q
            if denom <= 0:
                raise ValueError("norm infinite: beta*p - Q must be positive")
            normp *= dims.omega / denom
        return normp ** (1.0 / p)


@dataclass(frozen=True)
class RadialProduct(TestFunction):
    """prod_i F_i(|x_i|_h) for vectorized 1D profiles F_i."""

    spec: ProductSpec
    profiles: tuple
    supports: tuple[tuple[float, float], ...] = ()
    family: str = field(default="radial-product", init=False)

    def __post_init__(self) -> None:
        if len(self.profiles) != self.spec.m:
            raise ValueError("one profile per factor required")
        if not self.supports:
            object.__setattr__(self, "supports", tuple((0.0, math.inf) for _ in self.profiles))

    def __call__(self, pts: list[np.ndarray]) -> np.ndarray:
        radii = _radii_of(pts)
        acc = np.ones_like(radii[0], dtype=float)
        for F, r, (a, b) in zip(self.profiles, radii, self.supports):
            vals = np.where((r >= a) & (r <= b), np.asarray(F(r), dtype=float), 0.0)
            acc = acc * vals
        return acc

    def support_radii(self) -> tuple[float, ...]:
        return tuple(b for _, b in self.supports)

    def radial_profiles(self):
        return [(F, a, b) for F, (a, b) in zip(self.profiles, self.supports)]


@dataclass(frozen=True)
class Bump:
    """One product bump: smooth profile exp(-1/(1-s^2)) of the scaled
    Koranyi distance s = d(center_i, x_i)/radius_i in each factor."""

    centers: tuple[np.ndarray, ...]
    radii: tuple[float, ...]
    coefficient: float

    def __post_init__(self) -> None:
        if any(r <= 0 for r in self.radii):
            raise ValueError("bump radii must be strictly positive")


def _bump_profile(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    mask = s < 1.0
    sm = s[mask]
    out[mask] = np.exp(-1.0 / (1.0 - sm * sm))
    return out


@dataclass(frozen=True)
class BumpMixture(TestFunction):
    """Finite sum of product bumps; smooth, compactly supported, generically
    non-radial."""

    spec: ProductSpec
    bumps: tuple[Bump, ...]
    family: str = field(default="bump-mixture", init=False)

    def __call__(self, pts: list[np.ndarray]) -> np.ndarray:
        total = np.zeros(pts[0].shape[0])
        for bump in self.bumps:
            acc = np.full(pts[0].shape[0], bump.coefficient)
            for center, radius, X in zip(bump.centers, bump.radii, pts):
                d = hgroup.distance(X, center)
                acc = acc * _bump_profile(d / radius)
            total += acc
        return total

    def support_radii(self) -> tuple[float, ...]:
        # |x_i| <= |c_i| + r_i on the support, by the triangle inequality
        radii = []
        for i, dims in enumerate(self.spec.factors):
            best = 0.0
            for bump in self.bumps:
                best = max(best, float(koranyi_norm(bump.centers[i])) + bump.radii[i])
            radii.append(best if self.bumps else 1.0)
        return tuple(radii)


def evaluate(f: TestFunction, x: ProductPoint) -> float:
    """Pointwise value of f at a product point."""
    if not x.matches(f.spec):
        raise ValueError("point does not match the function's product space")
    return float(np.asarray(f(x.arrays()))[0])


def closed_lp_norm_power(f: TestFunction, spec: ProductSpec, p: float) -> float:
    """Exact ||f||_p for the power families:
    inside:  prod_i (omega_i / (alpha_i p + Q_i))^(1/p),
    outside: prod_i (omega_i / (beta_i p - Q_i))^(1/p)."""
    if f.family not in ("power-inside", "power-outside"):
        raise UnsupportedFamilyError("closed norms exist only for the power families")
    if f.spec is not spec and f.spec != spec:
        raise ValueError("spec mismatch")
    return f.lp_norm_exact(p)


def _content_seed(seed: int, arrays: list[np.ndarray]) -> int:
    """Derive a deterministic inner-sampling seed from the input points, so
    nested Monte Carlo stays independent of call order and worker count."""
    h = hashlib.blake2b(digest_size=8)
    h.update(seed.to_bytes(8, "little", signed=True))
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return int.from_bytes(h.digest(), "little")


def radialize(f, x: ProductPoint, samples: int = 4096, seed: int = 0) -> Estimate:
    """Monte Carlo estimate of the per-factor spherical average of f at x:
    the mean of f over independent product-sphere samples dilated to the
    radii of x.  Fixes radial functions and preserves ball averages."""
    radii = x.radii
    rng = substream(seed, TAG_RADIALIZE)
    pts = []
    for dims, r in zip((GroupDims(p.n) for p in x.points), radii):
        sph = hgroup.sample_unit_sphere(dims, rng, size=samples)
        sph[:, : 2 * dims.n] *= r
        sph[:, 2 * dims.n] *= r * r
        pts.append(sph)
    vals = np.asarray(f(pts), dtype=float)
    mean = float(vals.mean())
    sem = float(vals.std(ddof=0) / math.sqrt(samples))
    return Estimate(mean, sem, samples, seed)


class RadializedFunction(TestFunction):
    """g_f: the per-factor spherical average of f, evaluated by fresh inner
    Monte Carlo at each batch of points.  The inner stream is derived from a
    content hash of the evaluation radii, so nesting this inside a chunked
    outer integral stays deterministic for any scheduling."""

    family = "radialized"

    def __init__(self, f: TestFunction, inner_samples: int = 64, seed: int = 0):
        self.f = f
        self.spec = f.spec
        self.inner_samples = int(inner_samples)
        self.seed = int(seed)

    def __call__(self, pts: list[np.ndarray]) -> np.ndarray:
        N = pts[0].shape[0]
        K = self.inner_samples
        radii = _radii_of(pts)
        rng = substream(_content_seed(self.seed, radii), TAG_RADIALIZE)
        flat = []
        for dims, r in zip(self.spec.factors, radii):
            sph = hgroup.sample_unit_sphere(dims, rng, size=N * K).reshape(N, K, dims.dim)
            sph[:, :, : 2 * dims.n] *= r[:, None, None]
            sph[:, :, 2 * dims.n] *= (r * r)[:, None]
            flat.append(sph.reshape(N * K, dims.dim))
        vals = np.asarray(self.f(flat), dtype=float).reshape(N, K)
        return vals.mean(axis=1)

    def support_radii(self) -> tuple[float, ...]:
        return self.f.support_radii()


class DilatedFunction(TestFunction):
    """x -> f(delta_{lam_1} x_1, ..., delta_{lam_m} x_m)."""

    family = "dilated"

    def __init__(self, f: TestFunction, lams):
        self.f = f
        self.spec = f.spec
        self.lams = tuple(float(l) for l in lams)
        if any(l <= 0 for l in self.lams):
            raise ValueError("dilation parameters must be positive")

    def __call__(self, pts: list[np.ndarray]) -> np.ndarray:
        scaled = []
        for dims, lam, X in zip(self.spec.factors, self.lams, pts):
            Y = X.copy()
            Y[:, : 2 * dims.n] *= lam
            Y[:, 2 * dims.n] *= lam * lam
            scaled.append(Y)
        return self.f(scaled)

    def support_radii(self) -> tuple[float, ...]:
        return tuple(s / l for s, l in zip(self.f.support_radii(), self.lams))


def random_bump_mixture(
    spec: ProductSpec,
    rng: np.random.Generator,
    max_bumps: int = 5,
    radius_range: tuple[float, float] = (0.1, 1.0),
    center_radius: float = 2.0,
    coefficient_range: tuple[float, float] = (0.1, 1.0),
) -> BumpMixture:
    """Draw a random bump mixture: 1..max_bumps bumps, centers uniform in the
    polyball of radius center_radius, radii and coefficients uniform in the
    given ranges."""
    count = int(rng.integers(1, max_bumps + 1))
    bumps = []
    for _ in range(count):
        centers = []
        for dims in spec.factors:
            c = hgroup.sample_ball(dims, rng, center_radius, 1)[0]
            centers.append(c)
        radii = tuple(float(rng.uniform(*radius_range)) for _ in spec.factors)
        coeff = float(rng.uniform(*coefficient_range))
        bumps.append(Bump(tuple(centers), radii, coeff))
    return BumpMixture(spec, tuple(bumps))


def parse_test_function(text: str, spec: ProductSpec) -> TestFunction:
    """Parse the CLI's textual function forms:
    power-inside:a1,a2,...   power-outside:b1,b2,...   bumps:<json file>."""
    kind, _, rest = text.partition(":")
    if kind == "power-inside":
        alphas = tuple(float(v) for v in rest.split(","))
        return PowerInside(spec, alphas)
    if kind == "power-outside":
        betas = tuple(float(v) for v in rest.split(","))
        return PowerOutside(spec, betas)
    if kind == "bumps":
        with open(rest, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        bumps = []
        for entry in data:
            centers = tuple(
                np.asarray(c, dtype=float) for c in entry["centers"]
            )
            if len(centers) != spec.m:
                raise ValueError("bump entry does not match the number of factors")
            bumps.append(
                Bump(centers, tuple(float(r) for r in entry["radii"]), float(entry["coefficient"]))
            )
        return BumpMixture(spec, tuple(bumps))
    raise ValueError(f"unknown test-function spec {text!r}")
