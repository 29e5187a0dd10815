"""Scalar maximal monotone graphs: resolvents, Yosida maps, Moreau envelopes.

Each graph is the subdifferential of a nonnegative convex potential with
``potential(0) == 0``, so ``0`` always belongs to the graph at ``0``.  All
evaluation methods accept scalars or numpy arrays and are pure functions.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError

__all__ = [
    "MonotoneGraph",
    "LinearGraph",
    "PowerLawGraph",
    "CubicGraph",
    "SignGraph",
    "JumpGraph",
    "parse_graph",
]

_NEWTON_TOL = 1e-13
_NEWTON_MAX_ITER = 200


def _as_float_array(x):
    a = np.asarray(x, dtype=float)
    return a, (a.ndim == 0)


def _solve_monotone(beta, beta_prime, lam, x):
    """Solve y + lam*beta(y) = x elementwise by safeguarded Newton.

    The root has the sign of x and |y| <= |x|, so [min(0,x), max(0,x)] is a
    valid bracket.  Bisection takes over whenever a Newton step leaves the
    bracket or stalls.
    """
    lo = np.minimum(0.0, x)
    hi = np.maximum(0.0, x)
    y = x / (1.0 + lam)
    done = np.zeros(x.shape, dtype=bool)
    tol = _NEWTON_TOL * (1.0 + np.abs(x))
    for _ in range(_NEWTON_MAX_ITER):
        f = y + lam * beta(y) - x
        lo = np.where(~done & (f < 0.0), y, lo)
        hi = np.where(~done & (f > 0.0), y, hi)
        done |= (np.abs(f) <= tol) | (hi - lo <= tol)
        if done.all():
            break
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            y_new = y - f / (1.0 + lam * beta_prime(y))
        reject = ~np.isfinite(y_new) | (y_new <= lo) | (y_new >= hi) | (y_new == y)
        y = np.where(done, y, np.where(reject, 0.5 * (lo + hi), y_new))
    else:
        f = y + lam * beta(y) - x
        if np.any(np.abs(f) > 1e-9 * (1.0 + np.abs(x))):
            raise NumericError("resolvent iteration failed to converge")
    # Two plain Newton polish steps push the residual to round-off level;
    # needed so that yosida values sit inside the graph section to ~1e-15.
    for _ in range(2):
        f = y + lam * beta(y) - x
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            step = f / (1.0 + lam * beta_prime(y))
        y = np.where(np.isfinite(step), y - step, y)
    return y


class MonotoneGraph:
    """A maximal monotone graph on the real line, beta = subdifferential of j."""

    name = "monotone"

    def potential(self, x):
        """Convex potential j with j >= 0 and j(0) = 0."""
        raise NotImplementedError

    def section(self, x):
        """The set beta(x) as a closed interval (lo, hi); singleton a.e."""
        a, scalar = _as_float_array(x)
        lo, hi = self._section_impl(a)
        if scalar:
            return float(lo), float(hi)
        return lo, hi

    def _section_impl(self, x):
        raise NotImplementedError

    def resolvent(self, lam, x):
        """(I + lam*beta)^{-1} x: the unique y with x in y + lam*beta(y)."""
        if lam <= 0.0:
            raise ValueError(f"lambda must be positive, got {lam}")
        a, scalar = _as_float_array(x)
        y = self._resolvent_impl(float(lam), a)
        return float(y) if scalar else y

    def _resolvent_impl(self, lam, x):
        return _solve_monotone(self._beta, self._beta_prime, lam, x)

    def resolvent_warm(self, lam, x, y0=None):
        """Resolvent for trusted array input, seeded with a previous solution.

        Time steppers call this once per step with the previous nodal values
        as y0; graphs with closed-form resolvents ignore the hint.
        """
        return self._resolvent_impl(lam, x)

    def yosida(self, lam, x):
        """(x - resolvent(lam, x)) / lam: Lipschitz single-valued surrogate."""
        a, scalar = _as_float_array(x)
        out = (a - self.resolvent(lam, a)) / lam
        return float(out) if scalar else out

    def moreau(self, lam, x):
        """inf_y j(y) + (x-y)^2/(2 lam); the infimum sits at y = resolvent."""
        a, scalar = _as_float_array(x)
        y = self.resolvent(lam, a)
        out = self.potential(y) + 0.5 * lam * ((a - y) / lam) ** 2
        return float(out) if scalar else out

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class LinearGraph(MonotoneGraph):
    """beta(x) = c*x with c >= 0 (c = 0 turns the nonlinearity off)."""

    def __init__(self, c=1.0):
        if c < 0.0:
            raise ValueError(f"linear slope must be nonnegative, got {c}")
        self.c = float(c)
        self.name = f"linear:{self.c:g}"

    def potential(self, x):
        return 0.5 * self.c * np.square(x)

    def _section_impl(self, x):
        v = self.c * x
        return v, v

    def _resolvent_impl(self, lam, x):
        return x / (1.0 + lam * self.c)


def _soft_threshold(lam, x):
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


class SignGraph(MonotoneGraph):
    """beta = subdifferential of |x|: the sign graph with [-1, 1] at 0."""

    name = "sign"

    def potential(self, x):
        return np.abs(x)

    def _section_impl(self, x):
        s = np.sign(x)
        return np.where(x == 0.0, -1.0, s), np.where(x == 0.0, 1.0, s)

    def _resolvent_impl(self, lam, x):
        return _soft_threshold(lam, x)


def _warm_newton(graph, lam, x, y0):
    """Three plain Newton steps from a nearby start, falling back when unsure.

    A warm start within O(dt) of the root makes plain Newton machine-accurate
    in three quadratic steps for the smooth graphs; any entry whose residual
    disagrees sends the whole batch through the safeguarded solver.
    """
    y = np.clip(y0, np.minimum(0.0, x), np.maximum(0.0, x))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(3):
            f = y + lam * graph._beta(y) - x
            step = f / (1.0 + lam * graph._beta_prime(y))
            y = np.where(np.isfinite(step), y - step, y)
    f = y + lam * graph._beta(y) - x
    if np.all(np.abs(f) <= 1e-12 * (1.0 + np.abs(x))):
        return y
    return graph._resolvent_impl(lam, x)


class PowerLawGraph(MonotoneGraph):
    """beta(x) = |x|^(p-1) * sign(x) with p >= 1; p = 1 is the sign graph."""

    def __init__(self, p):
        if p < 1.0:
            raise ValueError(f"power exponent must be >= 1, got {p}")
        self.p = float(p)
        self.name = f"power:{self.p:g}"

    def potential(self, x):
        return np.abs(x) ** self.p / self.p

    def _section_impl(self, x):
        if self.p == 1.0:
            s = np.sign(x)
            return np.where(x == 0.0, -1.0, s), np.where(x == 0.0, 1.0, s)
        v = np.abs(x) ** (self.p - 1.0) * np.sign(x)
        return v, v

    def _beta(self, y):
        return np.abs(y) ** (self.p - 1.0) * np.sign(y)

    def _beta_prime(self, y):
        with np.errstate(divide="ignore", over="ignore"):
            return (self.p - 1.0) * np.abs(y) ** (self.p - 2.0)

    def _resolvent_impl(self, lam, x):
        if self.p == 1.0:
            return _soft_threshold(lam, x)
        return _solve_monotone(self._beta, self._beta_prime, lam, x)

    def resolvent_warm(self, lam, x, y0=None):
        if y0 is None or self.p == 1.0:
            return self._resolvent_impl(lam, x)
        return _warm_newton(self, lam, x, y0)


class CubicGraph(MonotoneGraph):
    """beta(x) = x^3, the classic defocusing cubic nonlinearity."""

    name = "cubic"

    def potential(self, x):
        return 0.25 * np.asarray(x, dtype=float) ** 4

    def _section_impl(self, x):
        v = x**3
        return v, v

    def _beta(self, y):
        return y**3

    def _beta_prime(self, y):
        return 3.0 * y**2

    def resolvent_warm(self, lam, x, y0=None):
        if y0 is None:
            return self._resolvent_impl(lam, x)
        # cubic derivative 1 + 3 lam y^2 never vanishes, so no guards needed
        y = y0
        lam3 = 3.0 * lam
        for _ in range(3):
            y2 = y * y
            y = y - (y * (1.0 + lam * y2) - x) / (1.0 + lam3 * y2)
        f = y * (1.0 + lam * y * y) - x
        if np.all(np.abs(f) <= 1e-12 * (1.0 + np.abs(x))):
            return y
        return self._resolvent_impl(lam, x)


class JumpGraph(MonotoneGraph):
    """beta(x) = x + a*H(x) with jump a > 0 at the origin, fill-in [0, a].

    Potential j(x) = x^2/2 + a*max(x, 0), whose subdifferential is exactly
    this graph.
    """

    def __init__(self, a):
        if a <= 0.0:
            raise ValueError(f"jump size must be positive, got {a}")
        self.a = float(a)
        self.name = f"jump:{self.a:g}"

    def potential(self, x):
        a = np.asarray(x, dtype=float)
        return 0.5 * np.square(a) + self.a * np.maximum(a, 0.0)

    def _section_impl(self, x):
        lo = np.where(x > 0.0, x + self.a, x)
        hi = np.where(x < 0.0, x, x + self.a)
        return lo, hi

    def _resolvent_impl(self, lam, x):
        neg = x / (1.0 + lam)
        pos = (x - lam * self.a) / (1.0 + lam)
        return np.where(x < 0.0, neg, np.where(x > lam * self.a, pos, 0.0))


def parse_graph(spec: str) -> MonotoneGraph:
    """Build a graph from a config token: cubic | linear:c | power:p | sign | jump:a."""
    head, _, arg = spec.strip().partition(":")
    head = head.lower()
    if head == "cubic":
        return CubicGraph()
    if head == "sign":
        return SignGraph()
    try:
        if head == "linear":
            return LinearGraph(float(arg) if arg else 1.0)
        if head == "power":
            return PowerLawGraph(float(arg))
        if head == "jump":
            return JumpGraph(float(arg))
    except ValueError as exc:
        raise ValueError(f"bad graph spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown graph kind {spec!r}")
