"""Instability and monotonicity conditions, plus polarity-plane sweeps."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from .bilayer_graph import BilayerGraph, DegreeProfile, PolarityWeights, WeightedAdjacency, weighted_adjacency
from .errors import LaminarError, SignClassViolation
from .interwoven import InterwovenMatrix, block_diag, interweave
from .kinetics import KineticsSpec, Linearization, classify_transfer_signs, reflection
from .numerics import eig_general, max_abs
from .quotient import QuotientAdjacency, quotient_from_profile, reduce_adjacency, spectral_position

STRICT = 1e-12


# ---------------------------------------------------------------------------
# determinant condition
# ---------------------------------------------------------------------------

def instability_condition(dt, lambdas):
    """Product of (1 - mu) over the eigenvalues mu of Lambda DT.

    ``lambdas`` is either the diagonal of Lambda or the matrix itself.
    Returns ``(product, unstable)`` with unstable meaning product < -1e-12.
    """
    dt = np.atleast_2d(np.asarray(dt, float))
    lam = np.asarray(lambdas, float)
    lam = np.diag(lam) if lam.ndim == 1 else np.atleast_2d(lam)
    mu = eig_general(lam @ dt).values
    prod = complex(np.prod(1.0 - mu))
    if abs(prod.imag) > 1e-9 * max(1.0, abs(prod.real)):
        raise LaminarError(f"product has imaginary residue {prod.imag:.3e}")
    return prod.real, bool(prod.real < -STRICT)


def mode_eigenvalues(dt, lambdas) -> np.ndarray:
    lam = np.asarray(lambdas, float)
    lam = np.diag(lam) if lam.ndim == 1 else lam
    return eig_general(lam @ np.atleast_2d(np.asarray(dt, float))).values


def siso_condition(lam: float, tprime: float):
    """Single signal: unstable iff 1 < lam T'. Returns (1 - lam T', unstable)."""
    val = 1.0 - lam * tprime
    return val, bool(val < -STRICT)


def dido_condition(dt, lambdas):
    """Two signals: unstable iff 1 < Tr(Lambda DT) - det(Lambda DT)."""
    lam = np.asarray(lambdas, float)
    lam = np.diag(lam) if lam.ndim == 1 else lam
    m = lam @ np.asarray(dt, float)
    tr = m[0, 0] + m[1, 1]
    dm = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    val = 1.0 - tr + dm
    return val, bool(val < -STRICT)


DIFFUSION = (2, 4)
CONTACT = (2, 2)


def quotient_instability_example(w11: float, w12: float, w2, lin: Linearization):
    """Closed-form test for the Hill example on the diffusion/contact pair.

    Uses the factor structure of the example's Jacobians:
    ``f1 g2 g1' f2' = B[0,0] A[1,0]`` and ``g1 g2 f1' g3' = B[0,1] A[2,0]``.
    Returns ``(unstable, margin)`` with ``margin = rhs - 1``.
    """
    w21, w22 = (w2, w2) if np.isscalar(w2) else w2
    if min(w11, w12, w21, w22) <= 0:
        raise ValueError("weights must be positive")
    a, b = lin.A, lin.B
    det_a = a[0, 1] * a[1, 0] - 1.0  # f1 g1 f2' g2' - 1
    c1 = (w11 - 2.0 * w21) / (w11 + 2.0 * w21)
    c2 = (w12 - w22) / (w12 + w22)
    rhs = -(c1 * b[0, 0] * a[1, 0] + c2 * b[0, 1] * a[2, 0]) / det_a
    margin = rhs - 1.0
    return bool(margin > STRICT), margin


# ---------------------------------------------------------------------------
# monotonicity
# ---------------------------------------------------------------------------

def monotone_polarity_check(profiles: Sequence[DegreeProfile], weights: Sequence[PolarityWeights]) -> bool:
    """n1 w1 <= n2 w2 for every layer of every signal graph."""
    for prof, w in zip(profiles, weights):
        for k in (1, 2):
            n1, n2 = prof.layer(k)
            if n1 * w.w1 > n2 * w.w2:
                return False
    return True


def layer_signs(layer_split) -> np.ndarray:
    n1, n2 = layer_split
    return np.concatenate([np.ones(n1), -np.ones(n2)])


def typeK_rowsum_check(p: InterwovenMatrix, dt_samples, layer_split, reflect: bool = True, tol: float = STRICT):
    """Worst off-diagonal row sum of -I + R P diag(DT_i) R.

    Each per-cell DT is first mapped by the sign reflection (when ``reflect``)
    and must then be all-nonpositive. Returns ``(ok, worst)``.
    """
    r, n = p.r, p.N
    dts = [np.asarray(d, float) for d in dt_samples]
    if len(dts) == 1:
        dts = dts * n
    if len(dts) != n:
        raise ValueError("need one DT per cell")
    m_ref = reflection(r)
    out = []
    for d in dts:
        dd = m_ref @ d @ m_ref if reflect else d
        if np.any(dd > STRICT):
            raise SignClassViolation("DT has positive entries after reflection")
        out.append(dd)
    rr = np.kron(np.diag(layer_signs(layer_split)), np.eye(r))
    jac = -np.eye(r * n) + rr @ p.dense @ block_diag(out) @ rr
    off = jac.sum(1) - np.diag(jac)
    worst = float(off.min())
    return bool(worst >= -tol), worst


# ---------------------------------------------------------------------------
# large-scale Jacobian
# ---------------------------------------------------------------------------

def large_scale_jacobian(lin: Linearization, wadjs: Sequence) -> np.ndarray:
    """Jacobian of the coupled N-cell system at the homogeneous state."""
    mats = [np.asarray(getattr(w, "matrix", w)) for w in wadjs]
    n_cells = mats[0].shape[0]
    jac = np.kron(np.eye(n_cells), lin.A)
    for j, w in enumerate(mats):
        jac += np.kron(w, np.outer(lin.B[:, j], lin.C[j]))
    return jac


def _shift_symbols(w: np.ndarray, m: int, thetas: np.ndarray):
    """2x2 symbols W(theta) of a matrix invariant under the joint layer shift, or None."""
    if w.shape[0] != 2 * m:
        return None
    idx = np.concatenate([(np.arange(m) + 1) % m, m + (np.arange(m) + 1) % m])
    if max_abs(w[np.ix_(idx, idx)] - w) > 1e-14:
        return None
    phase = np.exp(1j * np.outer(thetas, np.arange(m)))  # (K, m)
    sym = np.empty((thetas.size, 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            sym[:, a, b] = phase @ w[a * m, b * m:(b + 1) * m]
    return sym


def _complex_eigs(mat: np.ndarray) -> np.ndarray:
    """Eigenvalues of a complex matrix via its real 2n x 2n embedding."""
    x, y = mat.real, mat.imag
    emb = np.block([[x, -y], [y, x]])
    return eig_general(emb, max_dim=None).values


@dataclass(frozen=True)
class LargeScaleResult:
    max_real: float
    unstable: bool
    method: str
    eigenvalues: Optional[np.ndarray] = None


def large_scale_instability(lin: Linearization, wadjs: Sequence) -> LargeScaleResult:
    """Largest growth rate of the homogeneous state in the full system.

    When all adjacencies are invariant under the joint one-step rotation of
    both layer rings they share the Fourier eigenbasis of that rotation, and
    the Jacobian splits into one 2n x 2n block per wave number. Otherwise the
    dense rN-dimensional Jacobian is used.
    """
    mats = [np.asarray(getattr(w, "matrix", w)) for w in wadjs]
    n_cells = mats[0].shape[0]
    m = n_cells // 2
    thetas = 2 * np.pi * np.arange(m) / m
    syms = [_shift_symbols(w, m, thetas) for w in mats] if n_cells % 2 == 0 else [None]
    if all(s is not None for s in syms):
        blocks_eigs = []
        bc = [np.outer(lin.B[:, j], lin.C[j]) for j in range(len(mats))]
        # wave numbers k and m-k give complex-conjugate blocks; the real
        # embedding of block k carries both, so only k <= m/2 is visited
        for k in range(m // 2 + 1):
            jk = np.kron(np.eye(2), lin.A).astype(complex)
            for j, s in enumerate(syms):
                jk += np.kron(s[k], bc[j])
            if k == 0 or 2 * k == m:
                blocks_eigs.append(eig_general(jk.real, max_dim=None).values)
            else:
                blocks_eigs.append(_complex_eigs(jk))
        ev = np.concatenate(blocks_eigs)
        method = "fourier"
    else:
        ev = eig_general(large_scale_jacobian(lin, mats), max_dim=None).values
        method = "dense"
    mr = float(np.max(ev.real))
    return LargeScaleResult(mr, mr > STRICT, method, ev)


def quotient_jacobian(lin: Linearization, quotients: Sequence[QuotientAdjacency]) -> np.ndarray:
    return large_scale_jacobian(lin, [q.matrix for q in quotients])


# ---------------------------------------------------------------------------
# verdicts and sweeps
# ---------------------------------------------------------------------------

@dataclass
class StabilityVerdict:
    instability_margin: float
    unstable: bool
    monotone_polarity_ok: bool
    lambda2: tuple
    lambda2_is_min: tuple
    typeK_ok: bool
    typeK_worst: float
    mode_eigs: list

    @property
    def exists(self) -> bool:
        return self.unstable and self.monotone_polarity_ok

    @property
    def converges(self) -> bool:
        return self.exists and all(self.lambda2_is_min)

    def as_dict(self):
        d = asdict(self)
        d["mode_eigs"] = [[float(z.real), float(z.imag)] for z in self.mode_eigs]
        d["exists"] = self.exists
        d["converges"] = self.converges
        return d


class SpectrumCache:
    """Thread-safe-enough memo of lambda2 minimality per (graph, weights).

    Concurrent misses only duplicate work; the stored values are identical.
    """

    def __init__(self):
        self._d = {}

    def is_min(self, k: int, g: BilayerGraph, w: PolarityWeights) -> bool:
        key = (k, w.w1, w.w2)
        if key not in self._d:
            wa = weighted_adjacency(g, w)
            q = reduce_adjacency(wa)
            self._d[key] = spectral_position(wa, q.lambda2).is_min
        return self._d[key]


def evaluate_point(lin: Linearization, graphs: Sequence[BilayerGraph], weights: Sequence[PolarityWeights],
                   cache: Optional[SpectrumCache] = None, with_typeK: bool = True) -> StabilityVerdict:
    profiles = [g.degree_profile for g in graphs]
    quots = [quotient_from_profile(p, w) for p, w in zip(profiles, weights)]
    lam2 = np.array([q.lambda2 for q in quots])
    prod, unstable = instability_condition(lin.DT, lam2)
    mono = monotone_polarity_check(profiles, weights)
    cache = cache or SpectrumCache()
    mins = tuple(cache.is_min(k, g, w) for k, (g, w) in enumerate(zip(graphs, weights)))
    tk_ok, tk_worst = True, float("nan")
    if with_typeK:
        p = interweave([weighted_adjacency(g, w) for g, w in zip(graphs, weights)])
        try:
            tk_ok, tk_worst = typeK_rowsum_check(p, [lin.DT], (graphs[0].layer1_size, graphs[0].layer2_size))
        except SignClassViolation:
            tk_ok = False
    return StabilityVerdict(-prod, unstable, mono, tuple(float(v) for v in lam2), mins, tk_ok, tk_worst,
                            list(mode_eigenvalues(lin.DT, lam2)))


@dataclass
class SweepCell:
    w1_sig1: float
    w1_sig2: float
    verdict: Optional[StabilityVerdict] = None
    failure: Optional[str] = None
    sim_class: Optional[str] = None


@dataclass
class SweepGrid:
    axis1: tuple  # (name, values)
    axis2: tuple
    cells: list   # cells[i][j] for axis1[i], axis2[j]

    @property
    def shape(self):
        return len(self.axis1[1]), len(self.axis2[1])

    def rows(self):
        """CSV rows (w1_sig1, w1_sig2, margin, exists, converges, sim_class)."""
        out = []
        for row in self.cells:
            for c in row:
                v = c.verdict
                out.append((c.w1_sig1, c.w1_sig2,
                            float("nan") if v is None else v.instability_margin,
                            None if v is None else v.exists,
                            None if v is None else v.converges,
                            c.sim_class if c.failure is None else f"failed:{c.failure}"))
        return out


def log_axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 1:
        return np.array([lo])
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


def sweep_regions(lin: Linearization, graphs: Sequence[BilayerGraph], axis1: Sequence[float],
                  axis2: Sequence[float], w2=(1.0, 1.0), threads: int = 1, simulate=None,
                  names=("w1_sig1", "w1_sig2")) -> SweepGrid:
    """Evaluate every grid point; failures are recorded per cell.

    ``simulate`` is an optional callable ``(w1_sig1, w1_sig2) -> class name``.
    """
    axis1 = [float(v) for v in axis1]
    axis2 = [float(v) for v in axis2]
    if not axis1 or not axis2 or min(axis1 + axis2) <= 0:
        raise ValueError("sweep axes must be non-empty and positive")
    if len(axis1) * len(axis2) > 10_000:
        raise ValueError("sweep grid exceeds 10^4 points")
    cache = SpectrumCache()
    # warm the spectra cache serially per axis value so threads only read it
    for a in axis1:
        cache.is_min(0, graphs[0], PolarityWeights(a, w2[0]))
    for b in axis2:
        cache.is_min(1, graphs[1], PolarityWeights(b, w2[1]))

    def one(ab):
        a, b = ab
        cell = SweepCell(a, b)
        try:
            ws = [PolarityWeights(a, w2[0]), PolarityWeights(b, w2[1])]
            cell.verdict = evaluate_point(lin, graphs, ws, cache)
            if simulate is not None:
                cell.sim_class = simulate(a, b)
        except Exception as exc:  # recorded, never aborts the sweep
            cell.failure = f"{type(exc).__name__}: {exc}"
        return cell

    points = [(a, b) for a in axis1 for b in axis2]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            flat = list(ex.map(one, points))
    else:
        flat = [one(p) for p in points]
    nb = len(axis2)
    cells = [flat[i * nb:(i + 1) * nb] for i in range(len(axis1))]
    return SweepGrid((names[0], tuple(axis1)), (names[1], tuple(axis2)), cells)
