"""Intracellular input/output kinetics, homogeneous steady state and linearisation.

A kinetics spec maps a cell state ``x`` (n,) and input ``u`` (r,) to ``dx/dt``
and reads outputs ``y = h(x)``. Both maps broadcast over leading axes so the
simulator can evaluate all cells in one call.

The shipped example is a two-signal lateral-inhibition model with a
diffusive crosstalk, written with increasing Hill functions
``f_j(s) = s^k_j / (alpha_j + s^k_j)`` and decreasing ones
``g_j(s) = 1 / (1 + beta_j s^h_j)``::

    x1' = g1(u1) g2(x2) f1(u2) - x1
    x2' = f2(x1) - x2
    x3' = g3(x1) - x3
    y   = (x2, x3)
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NoConvergence, NonFinite, SingularA
from .numerics import eig_general, lu_factor

HSS_TOL = 1e-12
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class HillParameters:
    alpha: tuple = (0.01, 1.0)
    beta: tuple = (100.0, 100.0, 100.0)
    k: tuple = (2.0, 2.0)
    h: tuple = (2.0, 2.0, 1.0)

    def __post_init__(self):
        for name, n in (("alpha", 2), ("beta", 3), ("k", 2), ("h", 3)):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != n:
                raise ValueError(f"{name} needs {n} entries, got {len(vals)}")
            if not all(np.isfinite(v) and v > 0 for v in vals):
                raise ValueError(f"{name} entries must be positive and finite")
            object.__setattr__(self, name, vals)

    @classmethod
    def from_dict(cls, d: dict) -> "HillParameters":
        base = cls()
        return cls(**{key: tuple(d.get(key, getattr(base, key))) for key in ("alpha", "beta", "k", "h")})

    def as_dict(self):
        return {"alpha": list(self.alpha), "beta": list(self.beta), "k": list(self.k), "h": list(self.h)}

    # Hill forms, j is 1-based to match the usual labelling
    def f(self, j, s):
        s = np.asarray(s, float)
        sk = s ** self.k[j - 1]
        return sk / (self.alpha[j - 1] + sk)

    def df(self, j, s):
        s = np.asarray(s, float)
        a, k = self.alpha[j - 1], self.k[j - 1]
        sk = s ** k
        with np.errstate(divide="ignore"):
            return a * k * s ** (k - 1) / (a + sk) ** 2

    def g(self, j, s):
        s = np.asarray(s, float)
        return 1.0 / (1.0 + self.beta[j - 1] * s ** self.h[j - 1])

    def dg(self, j, s):
        s = np.asarray(s, float)
        b, h = self.beta[j - 1], self.h[j - 1]
        with np.errstate(divide="ignore"):
            return -b * h * s ** (h - 1) / (1.0 + b * s ** h) ** 2


class KineticsSpec:
    """Generic kinetics: supply ``f(x, u)`` and ``h(x)`` (broadcasting).

    Jacobians default to central differences with step ``1e-6 (1 + |x|)``.
    """

    def __init__(self, n: int, r: int, f: Callable, h: Callable, parameters: Optional[dict] = None,
                 output_index: Optional[tuple] = None):
        self.n = int(n)
        self.r = int(r)
        self._f = f
        self._h = h
        self.parameters = dict(parameters or {})
        self.output_index = output_index

    def rhs(self, x, u):
        return self._f(np.asarray(x, float), np.asarray(u, float))

    def output(self, x):
        return self._h(np.asarray(x, float))

    def jacobians(self, x, u):
        """(A, B, C) at a single point."""
        return fd_jacobians(self, x, u)


def fd_jacobians(spec, x, u):
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    n, r = spec.n, spec.r
    a = np.zeros((n, n))
    b = np.zeros((n, r))
    c = np.zeros((r, n))
    for i in range(n):
        step = 1e-6 * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        a[:, i] = (spec.rhs(xp, u) - spec.rhs(xm, u)) / (2 * step)
        c[:, i] = (spec.output(xp) - spec.output(xm)) / (2 * step)
    for j in range(r):
        step = 1e-6 * (1.0 + abs(u[j]))
        up, um = u.copy(), u.copy()
        up[j] += step
        um[j] -= step
        b[:, j] = (spec.rhs(x, up) - spec.rhs(x, um)) / (2 * step)
    return a, b, c


class HillKinetics(KineticsSpec):
    """The two-signal Hill example with analytic derivatives."""

    def __init__(self, params: Optional[HillParameters] = None):
        self.params = params or HillParameters()
        super().__init__(3, 2, self._rhs, self._out, self.params.as_dict(), output_index=(1, 2))

    def _rhs(self, x, u):
        p = self.params
        x1, x2 = x[..., 0], x[..., 1]
        u1, u2 = u[..., 0], u[..., 1]
        out = np.empty(np.broadcast_shapes(x.shape, u.shape[:-1] + (3,)))
        out[..., 0] = p.g(1, u1) * p.g(2, x2) * p.f(1, u2) - x1
        out[..., 1] = p.f(2, x1) - x2
        out[..., 2] = p.g(3, x1) - x[..., 2]
        return out

    @staticmethod
    def _out(x):
        return x[..., 1:3]

    def jacobians(self, x, u):
        p = self.params
        x1, x2, _ = np.asarray(x, float)
        u1, u2 = np.asarray(u, float)
        a = np.array([[-1.0, p.g(1, u1) * p.dg(2, x2) * p.f(1, u2), 0.0],
                      [p.df(2, x1), -1.0, 0.0],
                      [p.dg(3, x1), 0.0, -1.0]])
        b = np.array([[p.dg(1, u1) * p.g(2, x2) * p.f(1, u2), p.g(1, u1) * p.g(2, x2) * p.df(1, u2)],
                      [0.0, 0.0],
                      [0.0, 0.0]])
        c = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        return a, b, c

    def hss_scalar_residual(self, x1):
        """x1 - g1(f2(x1)) g2(f2(x1)) f1(g3(x1)); zero at the HSS."""
        p = self.params
        y2 = p.f(2, x1)
        return x1 - p.g(1, y2) * p.g(2, y2) * p.f(1, p.g(3, x1))


def evaluate_rhs(spec: KineticsSpec, x, u) -> np.ndarray:
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise NonFinite("state or input is not finite")
    out = spec.rhs(x, u)
    if not np.all(np.isfinite(out)):
        raise NonFinite("kinetics produced non-finite derivative")
    return out


def _newton(fun, jac, x, tol, max_iter=100):
    """Damped Newton on the nonnegative orthant; returns (x, residual)."""
    fx = fun(x)
    res = np.max(np.abs(fx))
    for _ in range(max_iter):
        if res <= tol:
            break
        lu = lu_factor(jac(x))
        if lu.singular_at is not None:
            break
        dx = lu.solve(-fx)
        step = 1.0
        while step > 1e-8:
            xn = np.maximum(x + step * dx, 0.0)
            fn = fun(xn)
            rn = np.max(np.abs(fn))
            if np.isfinite(rn) and rn < res:
                break
            step *= 0.5
        else:
            break
        x, fx, res = xn, fn, rn
    return x, res


def solve_hss(spec: KineticsSpec, x_guess=None, damping: float = 0.5, fp_iter: int = 500):
    """Homogeneous steady state ``(x0, u0)`` with ``u0 = h(x0)``.

    Stage 1 iterates the damped map ``u <- (1-d) u + d h(S(u))``, where
    ``S(u)`` solves ``f(x, u) = 0`` for fixed input. Stage 2 polishes with
    Newton on ``f(x, h(x)) = 0`` to a max-norm residual of 1e-12.
    """
    n = spec.n
    x = np.full(n, 0.5) if x_guess is None else np.array(x_guess, float)
    u = spec.output(x)

    def jac_x(xx, uu):
        return spec.jacobians(xx, uu)[0]

    for _ in range(fp_iter):
        x, _ = _newton(lambda xx: spec.rhs(xx, u), lambda xx: jac_x(xx, u), x, 1e-13, 50)
        u_new = (1.0 - damping) * u + damping * spec.output(x)
        if np.max(np.abs(u_new - u)) < 1e-13:
            u = u_new
            break
        u = u_new

    def full(xx):
        return spec.rhs(xx, spec.output(xx))

    def full_jac(xx):
        a, b, c = spec.jacobians(xx, spec.output(xx))
        return a + b @ c

    x, res = _newton(full, full_jac, x, HSS_TOL, 100)
    if not np.isfinite(res) or res > HSS_TOL:
        raise NoConvergence(f"steady-state residual {res:.3e} above {HSS_TOL:g}")
    return x, spec.output(x)


@dataclass(frozen=True)
class Linearization:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    DT: np.ndarray
    x0: np.ndarray
    u0: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def r(self):
        return self.DT.shape[0]


def linearize(spec: KineticsSpec, x0, u0) -> Linearization:
    x0 = np.asarray(x0, float)
    u0 = np.asarray(u0, float)
    a, b, c = spec.jacobians(x0, u0)
    lu = lu_factor(a)
    if lu.singular_at is not None:
        raise SingularA("A is singular at the evaluation point")
    dt = -c @ lu.solve(b)
    return Linearization(a, b, c, dt, x0, u0)


def hill_dt_closed_form(params: HillParameters, x0) -> np.ndarray:
    """Transfer derivative of the Hill example written out by hand."""
    p = params
    x1, x2, x3 = x0
    u1, u2 = x2, x3
    f1, g1, g2 = p.f(1, u2), p.g(1, u1), p.g(2, x2)
    df1, dg1, df2, dg2, dg3 = p.df(1, u2), p.dg(1, u1), p.df(2, x1), p.dg(2, x2), p.dg(3, x1)
    det_a = f1 * g1 * df2 * dg2 - 1.0
    return -np.array([[f1 * g2 * df2 * dg1, g1 * g2 * df1 * df2],
                      [f1 * g2 * dg1 * dg3, g1 * g2 * df1 * dg3]]) / det_a


def hill_A_eigs_closed_form(params: HillParameters, x0) -> np.ndarray:
    """-1 and -1 +/- sqrt(f1 g1 f2' g2') at the steady state."""
    p = params
    x1, x2, x3 = x0
    prod = p.f(1, x3) * p.g(1, x2) * p.df(2, x1) * p.dg(2, x2)
    root = np.sqrt(complex(prod))
    return np.array([-1.0, -1.0 + root, -1.0 - root])


def _irreducible_pattern(nz: np.ndarray) -> bool:
    from .interwoven import is_irreducible
    return is_irreducible(nz.astype(float))


def classify_transfer_signs(lin, tol: float = ZERO_TOL) -> str:
    """'S1' (checkerboard, negative diagonal), 'S2' (all <= 0) or 'Neither'."""
    dt = np.asarray(getattr(lin, "DT", lin), float)
    if dt.ndim == 0:
        dt = dt.reshape(1, 1)
    nz = np.abs(dt) >= tol
    if not _irreducible_pattern(nz):
        return "Neither"
    r = dt.shape[0]
    ii, jj = np.indices((r, r))
    checker = np.where((ii + jj) % 2 == 0, -1.0, 1.0)
    if np.all(dt[nz] * checker[nz] > 0):
        return "S1"
    if np.all(dt[nz] < 0):
        return "S2"
    return "Neither"


def reflection(r: int) -> np.ndarray:
    """diag(-1, 1, -1, ...): maps a checkerboard sign class onto all-nonpositive."""
    return np.diag([-1.0 if j % 2 == 0 else 1.0 for j in range(r)])


def intrinsic_eigs(lin: Linearization) -> np.ndarray:
    return eig_general(lin.A).values
