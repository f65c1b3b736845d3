"""Two-cell equitable partition by layer, quotient adjacency and lifting."""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bilayer_graph import BilayerGraph, DegreeProfile, PolarityWeights, WeightedAdjacency, weighted_adjacency
from .errors import NotEquitable, NotInSpectrum
from .numerics import eig_general, spectra_match

EQUITABLE_TOL = 1e-12
MATCH_TOL = 1e-8


@dataclass(frozen=True)
class LaminarPartition:
    layer1_indices: tuple
    layer2_indices: tuple

    @classmethod
    def from_graph(cls, g: BilayerGraph) -> "LaminarPartition":
        return cls(tuple(range(g.layer1_size)), tuple(range(g.layer1_size, g.n_vertices)))

    @property
    def n(self) -> int:
        return len(self.layer1_indices) + len(self.layer2_indices)

    def cells(self):
        return (np.asarray(self.layer1_indices, int), np.asarray(self.layer2_indices, int))


@dataclass(frozen=True)
class QuotientAdjacency:
    a: float
    b: float
    source: Optional[WeightedAdjacency] = None

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, 1.0 - self.a], [1.0 - self.b, self.b]])

    @property
    def lambda2(self) -> float:
        return self.a + self.b - 1.0

    @property
    def eigvector2(self) -> np.ndarray:
        """Eigenvector of lambda2, normalised with first entry 1."""
        if self.a == 1.0:
            raise ZeroDivisionError("a = 1 leaves the layers decoupled")
        return np.array([1.0, (self.b - 1.0) / (1.0 - self.a)])


def quotient_from_profile(profile: DegreeProfile, w: PolarityWeights) -> QuotientAdjacency:
    """Closed-form a, b from the per-layer neighbour counts."""
    n1, n2 = profile.layer(1)
    a = n1 * w.w1 / (n1 * w.w1 + n2 * w.w2)
    n1, n2 = profile.layer(2)
    b = n1 * w.w1 / (n1 * w.w1 + n2 * w.w2)
    return QuotientAdjacency(a, b)


def verify_equitable(w, p: LaminarPartition, tol: float = EQUITABLE_TOL) -> np.ndarray:
    """Check the layer partition is equitable for ``w``.

    ``w`` may be a WeightedAdjacency or a plain square matrix. Returns the
    2x2 array of constants ``wbar[i, j]`` (row sums from cell i into cell j).
    """
    mat = np.asarray(getattr(w, "matrix", w), dtype=float)
    cells = p.cells()
    covered = np.sort(np.concatenate(cells))
    if covered.size != mat.shape[0] or np.any(covered != np.arange(mat.shape[0])):
        raise NotEquitable("partition does not cover every vertex exactly once")
    const = np.zeros((2, 2))
    for i, ci in enumerate(cells):
        for j, cj in enumerate(cells):
            sums = mat[np.ix_(ci, cj)].sum(1)
            k = int(np.argmax(np.abs(sums - sums[0])))
            if abs(sums[k] - sums[0]) > tol:
                raise NotEquitable(
                    f"rows {ci[0]} and {ci[k]} see {sums[0]:.6g} vs {sums[k]:.6g} into cell {j + 1}",
                    rows=(int(ci[0]), int(ci[k])))
            const[i, j] = sums[0]
    return const


def reduce_adjacency(w: WeightedAdjacency, p: Optional[LaminarPartition] = None) -> QuotientAdjacency:
    if p is None:
        p = LaminarPartition.from_graph(w.graph)
    const = verify_equitable(w, p)
    q = QuotientAdjacency(float(const[0, 0]), float(const[1, 1]), source=w)
    if isinstance(w, WeightedAdjacency) and w.graph.degree_profile is not None:
        ref = quotient_from_profile(w.graph.degree_profile, w.weights)
        if abs(ref.a - q.a) > 1e-12 or abs(ref.b - q.b) > 1e-12:
            raise NotEquitable("quotient constants disagree with the neighbour-count formula")
    return q


def lifting_matrix(p: LaminarPartition) -> np.ndarray:
    l = np.zeros((p.n, 2))
    c1, c2 = p.cells()
    l[c1, 0] = 1.0
    l[c2, 1] = 1.0
    return l


def lift_eigenvector(q: QuotientAdjacency, l: np.ndarray, check: bool = True) -> np.ndarray:
    """L v2, checked against the source adjacency when one is attached."""
    v = np.asarray(l) @ q.eigvector2
    if check and q.source is not None:
        w = q.source.matrix
        res = np.max(np.abs(w @ v - q.lambda2 * v))
        if res > 1e-9:
            raise NotInSpectrum(f"lifted vector is not an eigenvector (residual {res:.3e})")
    return v


@dataclass(frozen=True)
class SpectralPosition:
    index: int  # 1-based ascending
    is_min: bool
    is_max: bool
    n: int


def spectral_position(w, lam: float, spectrum=None, tol: float = MATCH_TOL) -> SpectralPosition:
    """Ascending 1-based index of ``lam`` in Sp(w), ties to the lowest index."""
    if spectrum is None:
        spectrum = w.spectrum
    s = np.sort(np.asarray(spectrum, dtype=float))
    hits = np.nonzero(np.abs(s - lam) <= tol)[0]
    if hits.size == 0:
        raise NotInSpectrum(f"{lam:.12g} not within {tol:g} of any eigenvalue")
    idx = int(hits[0]) + 1
    return SpectralPosition(idx, idx == 1, bool(lam >= s[-1] - tol), int(s.size))


def spectrum_rows(w: WeightedAdjacency, q: QuotientAdjacency):
    """(index, eigenvalue, is_quotient_lambda2) rows, λ2 flagged once."""
    s = w.spectrum
    pos = spectral_position(w, q.lambda2, s)
    return [(i + 1, float(v), (i + 1) == pos.index) for i, v in enumerate(s)]


def quotient_interwoven(quotients: Sequence[QuotientAdjacency]) -> np.ndarray:
    """Dense 2r x 2r P-bar built from the quotient matrices."""
    from .interwoven import interweave
    return interweave([q.matrix for q in quotients]).dense


def block_triangular_spectra(quotients: Sequence[QuotientAdjacency], mt: np.ndarray):
    """Both sides of the quotient spectral splitting.

    Returns ``(lhs, rhs)`` where lhs = eig(P-bar (I_2 (x) M)) and rhs is
    eig(M) together with eig(Lambda2 M), Lambda2 = diag(a_k + b_k - 1).
    """
    mt = np.asarray(mt, float)
    pbar = quotient_interwoven(quotients)
    lhs = eig_general(pbar @ np.kron(np.eye(2), mt)).values
    lam2 = np.diag([q.lambda2 for q in quotients])
    rhs = np.concatenate([eig_general(mt).values, eig_general(lam2 @ mt).values])
    return lhs, rhs


def check_block_triangular(quotients, mt, tol=1e-7) -> bool:
    lhs, rhs = block_triangular_spectra(quotients, mt)
    return spectra_match(lhs, rhs, tol)


def lambda2_is_min(g: BilayerGraph, w: PolarityWeights) -> bool:
    wa = weighted_adjacency(g, w)
    return spectral_position(wa, reduce_adjacency(wa).lambda2).is_min


def minimality_crossover(g: BilayerGraph, w2: float = 1.0, lo: float = 1e-3, hi: float = 2.0,
                         iters: int = 40) -> Optional[float]:
    """Largest w1 in [lo, hi] at which lambda2 is still the spectral minimum.

    Bisection on log w1, assuming minimality holds below the crossover and
    fails above it. Returns None when minimality fails already at ``lo``,
    and ``hi`` when it never fails.
    """
    def ok(w1):
        return lambda2_is_min(g, PolarityWeights(w1, w2))

    if not ok(lo):
        return None
    if ok(hi):
        return hi
    a, b = np.log(lo), np.log(hi)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if ok(np.exp(mid)):
            a = mid
        else:
            b = mid
    return float(np.exp(a))
