"""Motility functions gamma(v) and nutrient intake functions F(w).

The motility families are positive, strictly decreasing and vanish at
infinity; PowerLaw and Rational additionally keep v^k gamma(v) bounded away
from zero for large v (the structural condition under which the solution is
uniformly bounded in time), Exponential does not.  Intake families satisfy
F(0) = 0 exactly and F > 0 for w > 0 with a computable Lipschitz constant.

Everything here is a pure function of the spec parameters; specs are frozen
dataclasses, safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MotilitySpec",
    "PowerLawMotility",
    "ExponentialMotility",
    "RationalMotility",
    "TabulatedMotility",
    "IntakeSpec",
    "HillIntake",
    "LinearIntake",
    "TabulatedIntake",
    "find_c1",
    "validate_assumptions",
    "AssumptionReport",
    "adaptive_simpson",
    "DEFAULT_WORKING_RANGE",
]

# Default validation range for the motility assumptions; the structural
# conditions are stated on all of (0, inf), so any finite check is a
# sampled heuristic.  Adjustable per run config.
DEFAULT_WORKING_RANGE = (1e-2, 1e4)


def adaptive_simpson(func, a: float, b: float, rel_tol: float = 1e-10,
                     max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature of ``func`` on [a, b].

    Classic bisection refinement with the Richardson correction (S2-S1)/15;
    tolerance is relative to the running whole-interval estimate.
    """
    if a == b:
        return 0.0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    whole_scale = abs(simpson(a, b, func(a), func(0.5 * (a + b)), func(b))) + 1e-300

    def recurse(x0, x2, f0, f1, f2, s, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = func(xl)
        fr = func(xr)
        s_left = simpson(x0, xm, f0, fl, f1)
        s_right = simpson(xm, x2, f1, fr, f2)
        s2 = s_left + s_right
        err = (s2 - s) / 15.0
        if depth >= max_depth or abs(err) <= rel_tol * whole_scale:
            return s2 + err
        return (recurse(x0, xm, f0, fl, f1, s_left, depth + 1)
                + recurse(xm, x2, f1, fr, f2, s_right, depth + 1))

    fa, fm, fb = func(a), func(0.5 * (a + b)), func(b)
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 0)


# ---------------------------------------------------------------------------
# Motility families
# ---------------------------------------------------------------------------

class MotilitySpec:
    """Common interface of the motility families.

    ``uniform_bound_exponent`` is the declared exponent k for which
    v^k gamma(v) stays bounded away from zero (None when the family does not
    satisfy the condition or makes no claim).
    """

    singular_at_zero = False
    uniform_bound_exponent: float | None = None

    def value(self, v):
        raise NotImplementedError

    def derivative(self, v):
        raise NotImplementedError

    def antiderivative(self, s: float, c1: float, D: float) -> float:
        """(1/D) * integral of gamma from c1 to s (negative for s < c1)."""
        if s <= 0.0 or c1 <= 0.0 or D <= 0.0:
            raise ValueError("antiderivative needs s > 0, c1 > 0, D > 0")
        return self._antiderivative_raw(s, c1) / D

    def _antiderivative_raw(self, s: float, c1: float) -> float:
        return adaptive_simpson(lambda x: float(self.value(x)), c1, s)

    def max_over(self, v_values: np.ndarray) -> float:
        """max of gamma over the given field values."""
        # Decreasing families attain the max at the smallest v.
        return float(self.value(float(np.min(v_values))))

    def __call__(self, v):
        return self.value(v)

    def _check_domain(self, v):
        v = np.asarray(v, dtype=np.float64)
        if self.singular_at_zero:
            if np.any(v <= 0.0):
                raise ValueError(f"{type(self).__name__} requires v > 0")
        elif np.any(v < 0.0):
            raise ValueError(f"{type(self).__name__} requires v >= 0")
        return v


@dataclass(frozen=True)
class PowerLawMotility(MotilitySpec):
    """gamma(v) = c0 / v^k; singular at v = 0, satisfies the uniform-bound
    condition with its own exponent k."""

    c0: float = 1.0
    k: float = 1.0
    singular_at_zero = True

    def __post_init__(self):
        if self.c0 <= 0.0 or self.k <= 0.0:
            raise ValueError("PowerLawMotility needs c0 > 0 and k > 0")

    @property
    def uniform_bound_exponent(self) -> float:
        return self.k

    def value(self, v):
        v = self._check_domain(v)
        if self.k == 1.0:
            return self.c0 / v
        return self.c0 * v ** (-self.k)

    def derivative(self, v):
        v = self._check_domain(v)
        return -self.k * self.c0 * v ** (-self.k - 1.0)

    def _antiderivative_raw(self, s, c1):
        if self.k == 1.0:
            return self.c0 * math.log(s / c1)
        p = 1.0 - self.k
        return self.c0 * (s ** p - c1 ** p) / p


@dataclass(frozen=True)
class ExponentialMotility(MotilitySpec):
    """gamma(v) = exp(-chi v); decays too fast for the uniform-bound
    condition (v^k gamma -> 0 for every k)."""

    chi: float = 1.0

    def __post_init__(self):
        if self.chi <= 0.0:
            raise ValueError("ExponentialMotility needs chi > 0")

    def value(self, v):
        v = self._check_domain(v)
        return np.exp(-self.chi * v)

    def derivative(self, v):
        v = self._check_domain(v)
        return -self.chi * np.exp(-self.chi * v)

    def _antiderivative_raw(self, s, c1):
        return (math.exp(-self.chi * c1) - math.exp(-self.chi * s)) / self.chi


@dataclass(frozen=True)
class RationalMotility(MotilitySpec):
    """gamma(v) = 1 / (c + v^k); bounded at zero, satisfies the
    uniform-bound condition with exponent k."""

    c: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        if self.c <= 0.0 or self.k <= 0.0:
            raise ValueError("RationalMotility needs c > 0 and k > 0")

    @property
    def uniform_bound_exponent(self) -> float:
        return self.k

    def value(self, v):
        v = self._check_domain(v)
        return 1.0 / (self.c + v ** self.k)

    def derivative(self, v):
        v = self._check_domain(v)
        vk = v ** self.k
        return -self.k * v ** (self.k - 1.0) / (self.c + vk) ** 2

    def _antiderivative_raw(self, s, c1):
        if self.k == 1.0:
            return math.log((self.c + s) / (self.c + c1))
        if self.k == 2.0:
            rc = math.sqrt(self.c)
            return (math.atan(s / rc) - math.atan(c1 / rc)) / rc
        return super()._antiderivative_raw(s, c1)


@dataclass(frozen=True)
class TabulatedMotility(MotilitySpec):
    """Piecewise-linear interpolant of (v, gamma) samples, constant beyond
    the table.  Construction does not enforce monotonicity; run
    ``validate_assumptions`` to certify the structural conditions.
    """

    v_points: tuple[float, ...]
    gamma_points: tuple[float, ...]
    fd_step: float = field(default=1e-5, repr=False)

    def __post_init__(self):
        v = np.asarray(self.v_points, dtype=np.float64)
        g = np.asarray(self.gamma_points, dtype=np.float64)
        if v.ndim != 1 or v.size < 2 or g.shape != v.shape:
            raise ValueError("need matching 1D tables with at least 2 points")
        if np.any(np.diff(v) <= 0.0):
            raise ValueError("v_points must be strictly increasing")
        if np.any(v <= 0.0) or np.any(g <= 0.0):
            raise ValueError("table values must be positive")
        object.__setattr__(self, "v_points", tuple(float(x) for x in v))
        object.__setattr__(self, "gamma_points", tuple(float(x) for x in g))

    def value(self, v):
        v = self._check_domain(v)
        return np.interp(v, self.v_points, self.gamma_points)

    def derivative(self, v):
        # Centered difference of the interpolant.
        eps = self.fd_step
        return (self.value(np.asarray(v) + eps) - self.value(np.asarray(v) - eps)) / (2.0 * eps)

    def max_over(self, v_values):
        return float(np.max(self.value(v_values)))


# ---------------------------------------------------------------------------
# Intake families
# ---------------------------------------------------------------------------

class IntakeSpec:
    """Common interface of the intake families: F(0) = 0 exactly, F >= 0."""

    def value(self, w):
        raise NotImplementedError

    def derivative(self, w):
        raise NotImplementedError

    def lipschitz_bound(self, w_max: float) -> float:
        """sup of |F'| on [0, w_max]."""
        raise NotImplementedError

    def max_over(self, w_values: np.ndarray) -> float:
        """max of F over the given field values."""
        # Increasing families attain the max at the largest w.
        return float(self.value(float(np.max(w_values))))

    def __call__(self, w):
        return self.value(w)

    @staticmethod
    def _check_domain(w):
        w = np.asarray(w, dtype=np.float64)
        if np.any(w < 0.0):
            raise ValueError("intake functions are defined for w >= 0")
        return w


@dataclass(frozen=True)
class HillIntake(IntakeSpec):
    """F(w) = w^2 / (w^2 + lam), the saturating intake of the original
    three-component model."""

    lam: float = 1.0

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError("HillIntake needs lam > 0")

    def value(self, w):
        w = self._check_domain(w)
        w2 = w * w
        return w2 / (w2 + self.lam)

    def derivative(self, w):
        w = self._check_domain(w)
        return 2.0 * self.lam * w / (w * w + self.lam) ** 2

    def lipschitz_bound(self, w_max: float) -> float:
        if w_max < 0.0:
            raise ValueError("w_max must be non-negative")
        # F' increases up to w = sqrt(lam/3) then decreases; max of F' there
        # is 3 sqrt(3) / (8 sqrt(lam)).
        w_star = math.sqrt(self.lam / 3.0)
        if w_max >= w_star:
            return 3.0 * math.sqrt(3.0) / (8.0 * math.sqrt(self.lam))
        return float(self.derivative(w_max))


@dataclass(frozen=True)
class LinearIntake(IntakeSpec):
    """F(w) = slope * w."""

    slope: float = 1.0

    def __post_init__(self):
        if self.slope <= 0.0:
            raise ValueError("LinearIntake needs slope > 0")

    def value(self, w):
        w = self._check_domain(w)
        return self.slope * w

    def derivative(self, w):
        w = self._check_domain(w)
        return np.full_like(w, self.slope)

    def lipschitz_bound(self, w_max: float) -> float:
        if w_max < 0.0:
            raise ValueError("w_max must be non-negative")
        return self.slope


@dataclass(frozen=True)
class TabulatedIntake(IntakeSpec):
    """Piecewise-linear interpolant of (w, F) samples; the table must start
    at (0, 0) so that F(0) = 0 holds exactly."""

    w_points: tuple[float, ...]
    f_points: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.w_points, dtype=np.float64)
        f = np.asarray(self.f_points, dtype=np.float64)
        if w.ndim != 1 or w.size < 2 or f.shape != w.shape:
            raise ValueError("need matching 1D tables with at least 2 points")
        if w[0] != 0.0 or f[0] != 0.0:
            raise ValueError("intake table must start at (0, 0)")
        if np.any(np.diff(w) <= 0.0):
            raise ValueError("w_points must be strictly increasing")
        if np.any(f[1:] <= 0.0):
            raise ValueError("intake table values must be positive for w > 0")
        object.__setattr__(self, "w_points", tuple(float(x) for x in w))
        object.__setattr__(self, "f_points", tuple(float(x) for x in f))

    def value(self, w):
        w = self._check_domain(w)
        return np.interp(w, self.w_points, self.f_points)

    def derivative(self, w, eps: float = 1e-7):
        w = self._check_domain(w)
        lo = np.maximum(w - eps, 0.0)
        hi = w + eps
        return (self.value(hi) - self.value(lo)) / (hi - lo)

    def lipschitz_bound(self, w_max: float) -> float:
        if w_max < 0.0:
            raise ValueError("w_max must be non-negative")
        # Max slope over segments intersecting [0, w_max]; constant beyond
        # the table, so slope 0 there.
        w = np.asarray(self.w_points)
        f = np.asarray(self.f_points)
        slopes = np.diff(f) / np.diff(w)
        active = w[:-1] < w_max
        if not active.any():
            active[0] = True
        return float(np.max(np.abs(slopes[active])))

    def max_over(self, w_values):
        return float(np.max(self.value(w_values)))


# ---------------------------------------------------------------------------
# c1 selection and assumption validation
# ---------------------------------------------------------------------------

def find_c1(spec: MotilitySpec, D: float, v_lo: float = DEFAULT_WORKING_RANGE[0],
            v_cap: float = 1e12) -> float:
    """Find c1 > 0 with gamma(c1) strictly below D.

    Targets gamma(c1) = D/2 (halving the sensitivity of the downstream bound
    denominator 1 - gamma(c1)/D) by bracketing and bisection to relative
    tolerance 1e-12.  When gamma is already below D/2 at ``v_lo`` the left
    end is returned; when gamma stays at or above D/2 out to ``v_cap`` the
    condition is reported unattainable.
    """
    if D <= 0.0:
        raise ValueError("D must be positive")
    target = 0.5 * D
    lo = float(v_lo)
    if float(spec.value(lo)) < target:
        return lo
    hi = lo
    while True:
        hi = hi * 2.0 if hi >= 1.0 else min(1.0, hi * 2.0)
        if hi > v_cap:
            raise ValueError(
                f"gamma(v) >= D/2 = {target:g} for all v up to {v_cap:g}; "
                "cannot satisfy gamma(c1) < D"
            )
        if float(spec.value(hi)) < target:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(spec.value(mid)) >= target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    c1 = 0.5 * (lo + hi)
    return c1


@dataclass
class AssumptionReport:
    """Per-condition verdicts from sampling the structural assumptions."""

    v_range: tuple[float, float]
    gamma_positive: bool
    gamma_strictly_decreasing: bool
    gamma_decays: bool                    # heuristic: gamma(v_hi) < gamma(v_lo)/10
    uniform_bound_holds: bool
    uniform_bound_k: float | None         # witness exponent
    uniform_bound_inf: float | None       # inf of v^k gamma(v) over samples
    intake_zero_at_zero: bool
    intake_positive: bool
    intake_lipschitz: float

    @property
    def motility_ok(self) -> bool:
        return self.gamma_positive and self.gamma_strictly_decreasing and self.gamma_decays

    @property
    def intake_ok(self) -> bool:
        return self.intake_zero_at_zero and self.intake_positive and math.isfinite(self.intake_lipschitz)

    @property
    def all_ok(self) -> bool:
        return self.motility_ok and self.intake_ok


def _uniform_bound_scan(spec: MotilitySpec, v: np.ndarray, g: np.ndarray):
    """Numeric witness search for inf v^k gamma(v) > 0 over the samples.

    A candidate exponent passes when the sampled infimum stays within nine
    orders of magnitude of the sampled median (so genuine exponential decay
    fails every candidate while power-law tails pass with their own k).
    """
    declared = spec.uniform_bound_exponent
    candidates = [declared] if declared is not None else [1.0, 2.0, 4.0, 8.0, 16.0]
    best = (False, None, None)
    for k in candidates:
        vals = v ** k * g
        inf = float(np.min(vals))
        med = float(np.median(vals))
        holds = inf > 0.0 and inf >= 1e-9 * med
        if holds:
            return True, float(k), inf
        if best[2] is None or (med > 0 and inf / med > best[2]):
            best = (False, float(k), inf if med == 0 else inf / med)
    k_best = best[1]
    inf_best = float(np.min(v ** k_best * g)) if k_best is not None else None
    return False, k_best, inf_best


def validate_assumptions(motility: MotilitySpec, intake, v_range=DEFAULT_WORKING_RANGE,
                         n_samples: int = 2000) -> AssumptionReport:
    """Sampled check of the structural conditions on gamma and F.

    Uses log-spaced samples of [v_lo, v_hi]; failures are report entries,
    not exceptions.
    """
    v_lo, v_hi = float(v_range[0]), float(v_range[1])
    if not (0.0 < v_lo < v_hi):
        raise ValueError("need 0 < v_lo < v_hi")
    n_samples = max(int(n_samples), 1000)
    v = np.logspace(math.log10(v_lo), math.log10(v_hi), n_samples)
    g = np.asarray(motility.value(v), dtype=np.float64)

    positive = bool(np.all(g > 0.0))
    decreasing = bool(np.all(np.diff(g) < 0.0))
    decays = bool(g[-1] < g[0] / 10.0)
    ub_holds, ub_k, ub_inf = _uniform_bound_scan(motility, v, g)

    w = np.linspace(0.0, 10.0, 1001)
    fw = np.asarray(intake.value(w), dtype=np.float64)
    zero_at_zero = bool(fw[0] == 0.0)
    intake_positive = bool(np.all(fw[1:] > 0.0))
    lip = float(intake.lipschitz_bound(float(w[-1])))

    return AssumptionReport(
        v_range=(v_lo, v_hi),
        gamma_positive=positive,
        gamma_strictly_decreasing=decreasing,
        gamma_decays=decays,
        uniform_bound_holds=ub_holds,
        uniform_bound_k=ub_k,
        uniform_bound_inf=ub_inf,
        intake_zero_at_zero=zero_at_zero,
        intake_positive=intake_positive,
        intake_lipschitz=lip,
    )
