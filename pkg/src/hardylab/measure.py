"""Quadrature engine: deterministic Monte Carlo over product Koranyi balls,
adaptive 1D Gauss-Legendre panels (with infinite-interval substitution and
power-law endpoint grading), and L^p norms of test functions.

Monte Carlo determinism: samples are partitioned into fixed-size chunks and
chunk k consumes a counter-based Philox substream keyed on (seed, tag, k).
Chunk results are reduced in index order, so estimates are bit-identical
for any worker count or scheduling.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .hgroup import GroupDims, ProductSpec, sample_ball

__all__ = [
    "Estimate",
    "IntegrationError",
    "IntegrandError",
    "substream",
    "mc_integrate",
    "integrate_1d",
    "radial_integral",
    "lp_norm",
]

_MASK64 = (1 << 64) - 1

# substream tags, one per call site that derives chunk streams
TAG_MC = 11
TAG_POWER_NORM = 12
TAG_RADIALIZE = 13
TAG_NESTED = 14
TAG_COMPACT = 15
TAG_EXPERIMENT = 16


class IntegrationError(RuntimeError):
    """Quadrature failed to converge; carries the residual estimate."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


class IntegrandError(ValueError):
    """An integrand produced a non-finite value; reports the offending point."""


@dataclass(frozen=True)
class Estimate:
    """A numerical result.  Closed-form values carry std_error = 0 and
    samples = 0; Monte Carlo values carry the standard error of the mean."""

    value: float
    std_error: float = 0.0
    samples: int = 0
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @classmethod
    def exact(cls, value: float, **meta) -> "Estimate":
        return cls(float(value), 0.0, 0, 0, dict(meta))

    @property
    def is_exact(self) -> bool:
        return self.samples == 0

    def __float__(self) -> float:
        return self.value

    def scaled(self, c: float) -> "Estimate":
        return Estimate(self.value * c, abs(c) * self.std_error, self.samples, self.seed, dict(self.meta))

    def powered(self, q: float) -> "Estimate":
        """Delta-method propagation through value**q (value > 0)."""
        v = self.value**q
        se = abs(q) * self.value ** (q - 1.0) * self.std_error if self.value > 0 else 0.0
        return Estimate(v, se, self.samples, self.seed, dict(self.meta))

    def ratio(self, other: "Estimate") -> "Estimate":
        """Quotient with independent relative errors added in quadrature."""
        if other.value == 0.0:
            raise ZeroDivisionError("zero norm in quotient")
        v = self.value / other.value
        rel = math.hypot(
            self.std_error / self.value if self.value != 0 else 0.0,
            other.std_error / other.value,
        )
        return Estimate(v, abs(v) * rel, max(self.samples, other.samples), self.seed, dict(self.meta))

    def product(self, other: "Estimate") -> "Estimate":
        v = self.value * other.value
        rel = math.hypot(
            self.std_error / self.value if self.value != 0 else 0.0,
            other.std_error / other.value if other.value != 0 else 0.0,
        )
        return Estimate(v, abs(v) * rel, max(self.samples, other.samples), self.seed, dict(self.meta))

    def within(self, target: float, sigmas: float = 3.0, atol: float = 0.0) -> bool:
        return abs(self.value - target) <= sigmas * self.std_error + atol


def substream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based substream for (seed, *path): a Philox generator keyed by
    the SeedSequence hash of the path.  Independent of call order."""
    entropy = [int(seed) & _MASK64] + [int(p) & _MASK64 for p in path]
    key = np.random.SeedSequence(entropy).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _chunk_sizes(samples: int, chunk_size: int) -> list[int]:
    full, rem = divmod(samples, chunk_size)
    sizes = [chunk_size] * full
    if rem:
        sizes.append(rem)
    return sizes


def chunked_mean(
    draw,
    samples: int,
    seed: int,
    tag: int,
    workers: int = 1,
    chunk_size: int = 65536,
) -> tuple[float, float]:
    """Mean and standard error of `draw(rng, size) -> values` over `samples`
    draws, accumulated chunk by chunk in fixed order."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = _chunk_sizes(samples, chunk_size)

    def run(k: int) -> tuple[float, float]:
        rng = substream(seed, tag, k)
        vals = np.asarray(draw(rng, sizes[k]), dtype=float)
        if vals.shape != (sizes[k],):
            raise ValueError(f"draw returned shape {vals.shape}, expected ({sizes[k]},)")
        return float(vals.sum()), float(np.square(vals).sum())

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]

    s1 = 0.0
    s2 = 0.0
    for a, b in parts:  # fixed order: bit-identical for any worker count
        s1 += a
        s2 += b
    n = float(samples)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    sem = math.sqrt(var / n)
    return mean, sem


def mc_integrate(
    f,
    spec: ProductSpec,
    radii,
    samples: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = 65536,
) -> Estimate:
    """Monte Carlo integral of f over B(0, r_1) x ... x B(0, r_m).

    `f` is called with a list of per-factor coordinate arrays of shape
    (k, 2 n_i + 1) and must return k values.  The estimate is the sample mean
    times the product of ball volumes; std_error scales identically.
    Non-finite integrand values raise IntegrandError with the sample point.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.shape != (spec.m,):
        raise ValueError(f"expected {spec.m} radii, got shape {radii.shape}")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    volume = 1.0
    for dims, r in zip(spec.factors, radii):
        volume *= dims.ball_volume * float(r) ** dims.Q

    def draw(rng: np.random.Generator, k: int) -> np.ndarray:
        pts = [sample_ball(dims, rng, float(r), k) for dims, r in zip(spec.factors, radii)]
        vals = np.asarray(f(pts), dtype=float)
        if vals.shape != (k,):
            raise ValueError(f"integrand returned shape {vals.shape}, expected ({k},)")
        bad = ~np.isfinite(vals)
        if bad.any():
            i = int(np.nonzero(bad)[0][0])
            where = [p[i].tolist() for p in pts]
            raise IntegrandError(f"non-finite integrand value {vals[i]} at sample {where}")
        return vals

    mean, sem = chunked_mean(draw, samples, seed, TAG_MC, workers=workers, chunk_size=chunk_size)
    return Estimate(mean * volume, sem * volume, samples, seed)


# ---------------------------------------------------------------------------
# Adaptive 1D quadrature
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _gl(g, lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    x = 0.5 * (lo + hi) + half * _GL_X
    return half * float(np.dot(_GL_W, np.asarray(g(x), dtype=float)))


def _panel(g, lo: float, hi: float) -> tuple[float, float]:
    """Refined panel value (two-half Gauss-Legendre) and local error estimate."""
    coarse = _gl(g, lo, hi)
    mid = 0.5 * (lo + hi)
    fine = _gl(g, lo, mid) + _gl(g, mid, hi)
    if not (math.isfinite(fine) and math.isfinite(coarse)):
        raise IntegrationError(
            f"non-finite integrand values on panel [{lo:.6g}, {hi:.6g}]"
        )
    return fine, abs(fine - coarse)


def _power_closeout(g, endpoint: float, lo: float, hi: float) -> tuple[float, float]:
    """Close out a panel adjacent to an algebraic singularity by fitting
    g ~ c * s^gamma against the distance s from the endpoint.  Exact for pure
    power behavior; the panel is tiny by the time this is invoked."""
    width = hi - lo
    if endpoint <= lo:  # singularity at the lower end
        s1, s2 = 0.125 * width, 0.5 * width
        t1, t2 = endpoint + s1, endpoint + s2
        span = hi - endpoint
    else:  # singularity at the upper end
        s1, s2 = 0.125 * width, 0.5 * width
        t1, t2 = endpoint - s1, endpoint - s2
        span = endpoint - lo
    g1 = float(np.asarray(g(np.array([t1])))[0])
    g2 = float(np.asarray(g(np.array([t2])))[0])
    if g1 == 0.0 and g2 == 0.0:
        return 0.0, 0.0
    if g1 == 0.0 or g2 == 0.0 or (g1 > 0) != (g2 > 0):
        raise IntegrationError("cannot grade endpoint panel: integrand changes sign or vanishes")
    gamma = math.log(abs(g1) / abs(g2)) / math.log(s1 / s2)
    if not math.isfinite(gamma) or gamma <= -0.9995:
        raise IntegrationError(
            f"endpoint behaviour ~ s^{gamma:.4f} is not integrable at panel scale {width:.3e}",
            residual=abs(g2) * width,
        )
    val = g2 * s2 * (span / s2) ** (gamma + 1.0) / (gamma + 1.0)
    return val, abs(val) * 1e-12


def integrate_1d(
    g,
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_panels: int = 4096,
    singular_lower: bool = False,
    singular_upper: bool = False,
) -> float:
    """Globally adaptive Gauss-Legendre integration of a vectorized g on [lo, hi].

    Panels are bisected worst-error-first until the summed local error drops
    below tol * max(1, |integral|).  Panels that shrink against a declared
    singular endpoint are closed out with a fitted power tail, which keeps
    integrable endpoint singularities (r^gamma, gamma > -1) convergent at
    tolerances far beyond plain bisection.
    """
    if not hi > lo:
        raise ValueError("empty integration interval")
    total_len = hi - lo
    # Close out singular panels before bisection shrinks them to the point
    # where Gauss-Legendre nodes round onto the endpoint itself.
    cut = total_len * 2.0**-40

    heap: list[tuple[float, float, float, float, float]] = []
    counter = 0

    def push(a: float, b: float) -> None:
        nonlocal counter
        if (singular_lower and a <= lo and (b - a) < cut) or (
            singular_upper and b >= hi and (b - a) < cut
        ):
            endpoint = lo if (singular_lower and a <= lo) else hi
            val, err = _power_closeout(g, endpoint, a, b)
            heapq.heappush(heap, (0.0, float(counter), a, b, val))
        else:
            val, err = _panel(g, a, b)
            heapq.heappush(heap, (-err, float(counter), a, b, val))
        counter += 1

    n0 = 4
    edges = np.linspace(lo, hi, n0 + 1)
    for i in range(n0):
        push(edges[i], edges[i + 1])

    while True:
        total = sum(item[4] for item in heap)
        tot_err = sum(-item[0] for item in heap)
        if tot_err <= tol * max(1.0, abs(total)):
            return total
        if len(heap) >= max_panels:
            raise IntegrationError(
                f"no convergence within {max_panels} panels", residual=tot_err
            )
        neg_err, _, a, b, _ = heapq.heappop(heap)
        if neg_err == 0.0:  # every remaining panel is converged
            heapq.heappush(heap, (neg_err, 0.0, a, b, _))
            return sum(item[4] for item in heap)
        mid = 0.5 * (a + b)
        push(a, mid)
        push(mid, b)


def integrate_semi_infinite(
    g,
    lo: float,
    tol: float = 1e-10,
    max_panels: int = 4096,
    singular_lower: bool = False,
) -> float:
    """Integral of g over [lo, inf) via the substitution r = lo + u/(1-u)."""

    def h(u: np.ndarray) -> np.ndarray:
        u = np.minimum(u, 1.0 - 2.0**-52)  # keep r finite at rounded nodes
        r = lo + u / (1.0 - u)
        return np.asarray(g(r), dtype=float) / (1.0 - u) ** 2

    return integrate_1d(
        h, 0.0, 1.0, tol=tol, max_panels=max_panels,
        singular_lower=singular_lower, singular_upper=True,
    )


def radial_integral(
    profile,
    dims: GroupDims,
    upper: float,
    tol: float = 1e-10,
    lower: float = 0.0,
) -> float:
    """omega_Q * integral of profile(r) * r^(Q-1) over [lower, upper].

    This is the polar-coordinate form of an integral of a radial function
    over H^n; upper may be math.inf, handled by the u/(1-u) substitution.
    """
    Q = dims.Q

    def g(r: np.ndarray) -> np.ndarray:
        return np.asarray(profile(r), dtype=float) * r ** (Q - 1)

    if math.isinf(upper):
        val = integrate_semi_infinite(g, lower, tol=tol, singular_lower=(lower == 0.0))
    else:
        if not upper > lower:
            return 0.0
        val = integrate_1d(g, lower, upper, tol=tol, singular_lower=(lower == 0.0))
    return dims.omega * val


# ---------------------------------------------------------------------------
# L^p norms
# ---------------------------------------------------------------------------


def _power_norm_mc(f, spec: ProductSpec, p: float, samples: int, seed: int, workers: int = 1) -> Estimate:
    """Importance-sampled Monte Carlo for ||f||_p^p of a pure power family.

    Uniform product-ball sampling of |f|^p has infinite variance whenever the
    radial exponent drops below -Q/2, which the near-extremal families always
    do.  Sampling each factor's radius with density g(r) ~ r^(e/2 - 1), where
    e is that factor's radial exponent of |f|^p r^(Q-1) dr plus one, leaves a
    bounded weight r^(e/2) and an honest standard error.
    """
    inside = f.family == "power-inside"
    exps = f.alphas if inside else [-b for b in f.betas]
    gammas = []
    consts = []
    for dims, a in zip(spec.factors, exps):
        e = a * p + dims.Q  # integrand r^(e-1) on (0,1]; on [1,inf) e < 0
        if inside:
            if e <= 0:
                raise ValueError("norm infinite: exponent condition violated")
            gam = 0.5 * e
        else:
            if e >= 0:
                raise ValueError("norm infinite: exponent condition violated")
            gam = -0.5 * e
        gammas.append(gam)
        consts.append(dims.omega / gam)

    def draw(rng: np.random.Generator, k: int) -> np.ndarray:
        w = np.ones(k)
        for gam, c in zip(gammas, consts):
            u = rng.random(k)
            if inside:
                r = u ** (1.0 / gam)  # density gam * r^(gam-1) on (0,1]
                w *= c * r**gam
            else:
                r = u ** (-1.0 / gam)  # density gam * r^(-gam-1) on [1,inf)
                w *= c * r**-gam
        return w

    mean, sem = chunked_mean(draw, samples, seed, TAG_POWER_NORM, workers=workers)
    est = Estimate(mean, sem, samples, seed, {"method": "mc-importance"})
    return est


def lp_norm(
    f,
    spec: ProductSpec,
    p: float,
    method: str = "mc",
    samples: int = 100_000,
    seed: int = 0,
    tol: float = 1e-10,
    truncation: float | None = None,
    workers: int = 1,
) -> Estimate:
    """||f||_{L^p} of a test function by the requested method.

    closed  -- the function's exact norm formula (power families only);
    radial  -- per-factor radial quadrature of |F_i|^p (radial products only);
    mc      -- Monte Carlo: importance-sampled radii for power families,
               otherwise uniform sampling over the support polyball (or an
               explicit truncation radius for unbounded supports, reported
               in the estimate's meta).
    """
    if not 1.0 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    if method == "closed":
        return Estimate.exact(f.lp_norm_exact(p))
    if method == "radial":
        profiles = f.radial_profiles()
        normp = 1.0
        for dims, (F, a, b) in zip(spec.factors, profiles):
            normp *= radial_integral(lambda r, F=F: np.abs(F(r)) ** p, dims, b, tol=tol, lower=a)
        return Estimate.exact(normp ** (1.0 / p))
    if method == "mc":
        if getattr(f, "family", None) in ("power-inside", "power-outside"):
            est = _power_norm_mc(f, spec, p, samples, seed, workers=workers)
            meta = dict(est.meta)
            meta["truncation_radii"] = [1.0 if f.family == "power-inside" else math.inf] * spec.m
            return Estimate(est.value, est.std_error, est.samples, est.seed, meta).powered(1.0 / p)
        radii = list(f.support_radii())
        if any(math.isinf(r) for r in radii):
            if truncation is None:
                raise ValueError("unbounded support: pass an explicit truncation radius")
            radii = [truncation if math.isinf(r) else r for r in radii]
        est = mc_integrate(
            lambda pts: np.abs(np.asarray(f(pts), dtype=float)) ** p,
            spec, radii, samples, seed, workers=workers,
        )
        meta = dict(est.meta)
        meta["truncation_radii"] = [float(r) for r in radii]
        return Estimate(est.value, est.std_error, est.samples, est.seed, meta).powered(1.0 / p)
    raise ValueError(f"unknown method {method!r}")
