"""Simulation of the coupled N-cell system and pattern classification.

State layout is (cell, component) flattened row-major, so cell ``i`` owns
entries ``i*n .. i*n+n-1``. Inputs are ``u = P h(x)`` with P applied through
its constructors.
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NonFinite, StepSizeUnderflow
from .interwoven import InterwovenMatrix, interweave

MASK64 = (1 << 64) - 1

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class SplitMix64:
    """splitmix64: 64-bit state advanced by the golden-ratio increment."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform on [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def symmetric(self, size: int) -> np.ndarray:
        """``size`` draws uniform on [-1, 1)."""
        return np.array([2.0 * self.uniform() - 1.0 for _ in range(size)])


def perturb_hss(x0, n_cells: int, magnitude: float = 0.01, seed: int = 0) -> np.ndarray:
    """Replicate ``x0`` over cells with multiplicative noise ``1 + magnitude*xi``."""
    x0 = np.asarray(x0, float)
    if not (0.0 <= magnitude <= 0.1):
        raise ValueError("perturbation magnitude must lie in [0, 0.1]")
    if np.any(x0 <= 0):
        raise ValueError("steady state must be componentwise positive")
    xi = SplitMix64(seed).symmetric(n_cells * x0.size).reshape(n_cells, x0.size)
    return (x0[None, :] * (1.0 + magnitude * xi)).ravel()


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (checkpoints, N*n)
    converged: bool
    converged_at: Optional[float]
    seed: Optional[int] = None
    n_cells: int = 0
    n_state: int = 0
    steps: int = 0
    rejected: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def final_cells(self) -> np.ndarray:
        return self.final.reshape(self.n_cells, self.n_state)

    def to_csv(self) -> str:
        head = "t,cell," + ",".join(f"x{k + 1}" for k in range(self.n_state))
        lines = [head]
        for t, s in zip(self.times, self.states):
            cells = s.reshape(self.n_cells, self.n_state)
            ts = f"{t:.12g}"
            for i, row in enumerate(cells):
                lines.append(ts + f",{i}," + ",".join(f"{v:.12g}" for v in row))
        return "\n".join(lines) + "\n"


def trajectory_from_csv(text: str):
    """Parse a trajectory CSV into (times, states array (checkpoints, N, n))."""
    rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
    t = np.array([float(r[0]) for r in rows])
    cell = np.array([int(r[1]) for r in rows])
    vals = np.array([[float(v) for v in r[2:]] for r in rows])
    n_cells = cell.max() + 1
    times = t[::n_cells]
    return times, vals.reshape(times.size, n_cells, -1)


def make_rhs(spec, p: InterwovenMatrix):
    n, r = spec.n, spec.r
    n_cells = p.N

    def rhs(y):
        x = y.reshape(n_cells, n)
        u = p.apply(spec.output(x))
        return spec.rhs(x, u).ravel()

    return rhs


def _err_norm(err, y, yn, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y), np.abs(yn))
    return math.sqrt(float(np.mean((err / sc) ** 2)))


def integrate(spec, p: InterwovenMatrix, x_init, t_max: float = 1000.0, rtol: float = 1e-6,
              atol: float = 1e-9, h0: float = 1e-3, h_max: float = 0.5, checkpoint: float = 1.0,
              conv_tol: float = 1e-4, conv_window: int = 4, min_time: float = 0.0,
              h_min: float = 1e-10, seed: Optional[int] = None) -> Trajectory:
    """Adaptive Dormand-Prince integration with checkpoint-based early stop.

    A state is recorded every ``checkpoint`` time units. Integration stops
    once the last ``conv_window`` checkpoints differ componentwise by less
    than ``conv_tol`` and ``t >= min_time``.
    """
    y = np.array(x_init, dtype=float).ravel()
    n_cells = p.N
    if y.size != n_cells * spec.n:
        raise ValueError(f"state length {y.size} != N*n = {n_cells * spec.n}")
    if p.r != spec.r:
        raise ValueError("interconnection signal count differs from kinetics")
    if not np.all(np.isfinite(y)):
        raise NonFinite("initial state is not finite")
    f = make_rhs(spec, p)

    t = 0.0
    times = [0.0]
    states = [y.copy()]
    k1 = f(y)
    h = min(h0, h_max)
    next_cp = checkpoint
    steps = rejected = 0
    converged_at = None
    ks = np.empty((7, y.size))
    while t < t_max - 1e-12:
        h_try = min(h, h_max, next_cp - t)
        ks[0] = k1
        for s in range(1, 7):
            ks[s] = f(y + h_try * (np.asarray(_A[s]) @ ks[:s]))
        y_new = y + h_try * (_B5[:6] @ ks[:6])
        # FSAL: stage 7 was evaluated at y_new
        err = h_try * (_E @ ks)
        en = _err_norm(err, y, y_new, rtol, atol)
        if not np.isfinite(en):
            raise NonFinite(f"non-finite state near t={t:.6g}")
        if en <= 1.0:
            t += h_try
            y = y_new
            k1 = ks[6].copy()
            steps += 1
            fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            # a step shortened only to land on a checkpoint keeps the proposal
            if h_try >= h:
                h = h_try * fac
            if abs(t - next_cp) <= 1e-12 * max(1.0, next_cp):
                t = next_cp
                times.append(t)
                states.append(y.copy())
                next_cp = checkpoint * (len(times))
                if len(states) >= conv_window and t >= min_time:
                    win = np.array(states[-conv_window:])
                    if np.max(win.max(0) - win.min(0)) < conv_tol:
                        converged_at = t
                        break
        else:
            rejected += 1
            h = h_try * max(0.2, 0.9 * en ** -0.2)
            if h < h_min:
                raise StepSizeUnderflow(f"step size {h:.3e} below {h_min:g} at t={t:.6g}")
    return Trajectory(np.array(times), np.array(states), converged_at is not None, converged_at,
                      seed, n_cells, spec.n, steps, rejected)


@dataclass(frozen=True)
class PatternClass:
    label: str  # Homogeneous | Laminar | Other
    layer_means: tuple
    separation: float
    layer_stds: tuple = ()

    def __str__(self):
        return self.label


def classify_pattern(final, layer_split, x0, component: int = 0) -> PatternClass:
    """Label a final state as Homogeneous, Laminar or Other.

    ``final`` is the flat state or an (N, n) array.
    """
    n1, n2 = layer_split
    x0 = np.asarray(x0, float)
    cells = np.asarray(final, float).reshape(n1 + n2, x0.size)
    v = cells[:, component]
    ref = x0[component]
    l1, l2 = v[:n1], v[n1:]
    m1, m2 = float(l1.mean()), float(l2.mean())
    s1, s2 = float(l1.std()), float(l2.std())
    pooled = math.sqrt((n1 * s1 ** 2 + n2 * s2 ** 2) / (n1 + n2))
    diff = abs(m1 - m2)
    sep = diff / pooled if pooled > 0 else (math.inf if diff > 0 else 0.0)
    if np.all(np.abs(v - ref) <= 1e-3 * (1.0 + abs(ref))):
        return PatternClass("Homogeneous", (m1, m2), sep, (s1, s2))
    d1, d2 = m1 - ref, m2 - ref
    if (d1 * d2 < 0 and s1 < 0.1 * abs(d1) and s2 < 0.1 * abs(d2) and diff >= 10.0 * pooled):
        return PatternClass("Laminar", (m1, m2), sep, (s1, s2))
    return PatternClass("Other", (m1, m2), sep, (s1, s2))


def snapshot_rows(final, layer_split, n_state: int, component: int = 0):
    """(cell, layer, value) rows for rendering."""
    n1, n2 = layer_split
    cells = np.asarray(final, float).reshape(n1 + n2, n_state)
    return [(i, 1 if i < n1 else 2, float(cells[i, component])) for i in range(n1 + n2)]


def escape_time(growth_rate: float, magnitude: float, t_max: float) -> float:
    """Time before which the early-stop rule is ignored.

    Near an unstable homogeneous state the flow is slow, so the checkpoint
    rule alone would stop at the starting point. We wait until a mode growing
    at ``growth_rate`` could have amplified a perturbation of relative size
    ``magnitude`` to order one, doubled for safety.
    """
    if growth_rate <= 0 or magnitude <= 0:
        return 0.0
    return min(t_max, 2.0 * math.log(1.0 / magnitude) / growth_rate)


@dataclass
class SimulationResult:
    trajectory: Trajectory
    pattern: PatternClass
    layer_split: tuple
    x0: np.ndarray
    growth_rate: float
    min_time: float


def simulate_pattern(spec, graphs: Sequence, weights: Sequence, seed: int = 0, magnitude: float = 0.01,
                     mode: str = "large", t_max: float = 1000.0, rtol: float = 1e-6, atol: float = 1e-9,
                     hss=None, guard: bool = True) -> SimulationResult:
    """Perturb the homogeneous state and integrate the large or quotient system.

    The quotient run starts from the per-layer means of the large-scale
    initial state, so both runs leave the steady state in the same direction.
    """
    from .bilayer_graph import weighted_adjacency
    from .kinetics import linearize, solve_hss
    from .quotient import reduce_adjacency
    from .stability import large_scale_instability

    x0, u0 = hss if hss is not None else solve_hss(spec)
    lin = linearize(spec, x0, u0)
    wadjs = [weighted_adjacency(g, w) for g, w in zip(graphs, weights)]
    g0 = graphs[0]
    split = (g0.layer1_size, g0.layer2_size)
    n_cells = g0.n_vertices
    x_init = perturb_hss(x0, n_cells, magnitude, seed)
    if mode == "large":
        p = interweave(wadjs)
        init = x_init
        growth = large_scale_instability(lin, wadjs).max_real
        out_split = split
    elif mode == "quotient":
        quots = [reduce_adjacency(w) for w in wadjs]
        p = interweave([q.matrix for q in quots])
        cells = x_init.reshape(n_cells, spec.n)
        init = np.concatenate([cells[:split[0]].mean(0), cells[split[0]:].mean(0)])
        growth = large_scale_instability(lin, [q.matrix for q in quots]).max_real
        out_split = (1, 1)
    else:
        raise ValueError(f"unknown simulation mode {mode!r}")
    tmin = escape_time(growth, magnitude, t_max) if guard else 0.0
    traj = integrate(spec, p, init, t_max=t_max, rtol=rtol, atol=atol, min_time=tmin, seed=seed)
    pat = classify_pattern(traj.final, out_split, x0)
    return SimulationResult(traj, pat, out_split, x0, growth, tmin)
