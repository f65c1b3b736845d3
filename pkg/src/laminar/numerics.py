"""Dense linear algebra kernels.

Three routines cover everything the rest of the package needs:

* ``eig_symmetric``  -- cyclic Jacobi with a parallel (round-robin) ordering,
  so a whole sweep of disjoint rotations is applied with numpy slicing.
* ``eig_general``    -- Householder reduction to Hessenberg form followed by
  the Francis double-shift QR iteration.
* ``lu_factor`` / ``solve_linear`` / ``det`` -- LU with partial pivoting.

numpy is used for array storage and elementwise arithmetic only; none of the
``numpy.linalg`` decompositions are called here.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import NoConvergence, NonFinite, NonSquare, NotSymmetric, Singular

EPS = np.finfo(float).eps

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-12
PIVOT_TOL = 1e-13
GENERAL_MAX_DIM = 64


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray  # complex for the general path, real for the symmetric path
    vectors: Optional[np.ndarray] = None
    is_symmetric_path: bool = False

    def __len__(self):
        return len(self.values)


def as_matrix(m, name="matrix") -> np.ndarray:
    """Validate and copy ``m`` into a finite, 2-D float array."""
    a = np.array(m, dtype=float, copy=True)
    if a.ndim == 1 and a.size == 1:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise NonSquare(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} has non-finite entries")
    return a


def _square(m, name="matrix") -> np.ndarray:
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"{name} is {a.shape[0]}x{a.shape[1]}")
    return a


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# symmetric path
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _round_robin(n: int):
    """Rounds of disjoint index pairs covering every pair (p < q) once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p >= n or q >= n:
                continue  # bye for odd n
            if p > q:
                p, q = q, p
            ps.append(p)
            qs.append(q)
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def eig_symmetric(m, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenDecomposition:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Returns eigenvalues ascending with orthonormal eigenvectors as columns.
    Raises NotSymmetric when ``max|m - m^T| > 1e-12 * max|m|``.
    """
    a = _square(m)
    n = a.shape[0]
    scale = max_abs(a)
    if max_abs(a - a.T) > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
        raise NotSymmetric(f"asymmetry {max_abs(a - a.T):.3e} exceeds tolerance")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n == 1 or scale == 0.0:
        return EigenDecomposition(np.diag(a).copy(), v, True)

    fro = np.sqrt(np.sum(a * a))
    rounds = _round_robin(n)
    for sweep in range(max_sweeps + 1):
        d = np.diag(a)
        off = np.sqrt(np.sum(a * a - np.diag(d * d)))
        if off <= tol * fro:
            break
        if sweep == max_sweeps:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > EPS * 1e-3 * fro
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = a[p, p], a[q, q]
            tau = (aqq - app) / (2.0 * apq)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # columns, then rows (A <- J^T A J), then accumulate V <- V J
            ap, aq = a[:, p].copy(), a[:, q]
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :]
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order], True)


# ---------------------------------------------------------------------------
# general path
# ---------------------------------------------------------------------------

def hessenberg(m) -> np.ndarray:
    """Orthogonally similar upper Hessenberg form (Householder reflections)."""
    h = _square(m)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.sqrt(np.dot(x, x))
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        x[0] -= alpha
        vnorm = np.sqrt(np.dot(x, x))
        if vnorm == 0.0:
            continue
        u = x / vnorm
        h[k + 1:, :] -= 2.0 * np.outer(u, u @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ u, u)
        h[k + 2:, k] = 0.0
    return h


def _hqr(a: np.ndarray, max_iter: int) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix (Francis double shift).

    ``a`` is overwritten. Row/column updates of each bulge-chasing step are
    done with numpy slices; the deflation logic is scalar.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        anorm += np.sum(np.abs(a[i, max(i - 1, 0):]))
    nn = n - 1
    t = 0.0
    total = 0
    while nn >= 0:
        its = 0
        while True:
            # single small subdiagonal element
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= EPS * s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + np.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if total >= max_iter:
                raise NoConvergence(f"QR iteration exceeded {max_iter} steps")
            if its in (10, 20):
                # exceptional shift
                t += x
                idx = np.arange(nn + 1)
                a[idx, idx] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            total += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= EPS * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = np.copysign(np.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                # rows k..k+2, columns k..nn
                pr = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1]
                if k != nn - 1:
                    pr = pr + r * a[k + 2, k:nn + 1]
                    a[k + 2, k:nn + 1] -= pr * z
                a[k + 1, k:nn + 1] -= pr * y
                a[k, k:nn + 1] -= pr * x
                # columns k..k+2, rows l..min(nn, k+3)
                hi = min(nn, k + 3) + 1
                pc = x * a[l:hi, k] + y * a[l:hi, k + 1]
                if k != nn - 1:
                    pc = pc + z * a[l:hi, k + 2]
                    a[l:hi, k + 2] -= pc * r
                a[l:hi, k + 1] -= pc * q
                a[l:hi, k] -= pc
            if l >= nn - 1:
                break
    return wr + 1j * wi


def eig_general(m, max_dim: Optional[int] = GENERAL_MAX_DIM) -> EigenDecomposition:
    """Eigenvalues of a general real square matrix.

    Values are complex and sorted by (real, imag). ``max_dim`` guards the
    intended use on small kinetics blocks; pass ``None`` to lift it.
    """
    a = _square(m)
    n = a.shape[0]
    if max_dim is not None and n > max_dim:
        raise NonSquare(f"dimension {n} exceeds the general-path cap {max_dim}")
    if n == 0:
        return EigenDecomposition(np.zeros(0, dtype=complex))
    # eigenvalues scale linearly; normalising keeps deflation tests away from underflow
    scale = max_abs(a)
    if scale == 0.0:
        return EigenDecomposition(np.zeros(n, dtype=complex))
    vals = _hqr(hessenberg(a / scale), max_iter=30 * n)
    vals = np.asarray(vals, dtype=complex) * scale
    order = np.lexsort((vals.imag, vals.real))
    return EigenDecomposition(vals[order], None, False)


def eigvals(m, symmetric: Optional[bool] = None) -> np.ndarray:
    """Convenience dispatcher; picks the Jacobi path for symmetric input."""
    a = _square(m)
    if symmetric is None:
        symmetric = max_abs(a - a.T) <= SYMMETRY_TOL * max(max_abs(a), np.finfo(float).tiny)
    if symmetric:
        return eig_symmetric(a).values
    return eig_general(a, max_dim=None).values


# ---------------------------------------------------------------------------
# LU
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LUFactorization:
    lu: np.ndarray      # unit-lower L below the diagonal, U on and above
    perm: np.ndarray    # row permutation: (P m)[i] = m[perm[i]]
    sign: float         # parity of the permutation
    singular_at: Optional[int] = None

    def det(self) -> float:
        return float(self.sign * np.prod(np.diag(self.lu)))

    def solve(self, rhs) -> np.ndarray:
        if self.singular_at is not None:
            raise Singular(f"pivot {self.singular_at} below threshold", index=self.singular_at)
        b = np.array(rhs, dtype=float)
        vec = b.ndim == 1
        if vec:
            b = b[:, None]
        y = b[self.perm].copy()
        n = self.lu.shape[0]
        for i in range(n):
            y[i] -= self.lu[i, :i] @ y[:i]
        for i in range(n - 1, -1, -1):
            y[i] = (y[i] - self.lu[i, i + 1:] @ y[i + 1:]) / self.lu[i, i]
        return y[:, 0] if vec else y


def lu_factor(m) -> LUFactorization:
    """Doolittle LU with partial pivoting.

    Never raises on singular input; a pivot with magnitude at or below
    ``1e-13 * max|m|`` is recorded in ``singular_at`` and elimination skips
    that column, so ``det`` stays usable.
    """
    a = _square(m)
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1.0
    thresh = PIVOT_TOL * max(max_abs(a), np.finfo(float).tiny)
    singular_at = None
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
            sign = -sign
        if abs(a[k, k]) <= thresh:
            if singular_at is None:
                singular_at = k
            continue
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return LUFactorization(a, perm, sign, singular_at)


def solve_linear(m, rhs) -> np.ndarray:
    """Solve ``m x = rhs`` (vector or matrix right-hand side)."""
    b = np.asarray(rhs, dtype=float)
    a = _square(m)
    if b.shape[0] != a.shape[0]:
        raise NonSquare(f"rhs has {b.shape[0]} rows, matrix has {a.shape[0]}")
    if not np.all(np.isfinite(b)):
        raise NonFinite("rhs has non-finite entries")
    return lu_factor(a).solve(b)


def det(m) -> float:
    return lu_factor(m).det()


def inverse(m) -> np.ndarray:
    a = _square(m)
    return lu_factor(a).solve(np.eye(a.shape[0]))


def spectra_match(a, b, tol: float = 1e-7) -> bool:
    """Order-insensitive multiset comparison of two eigenvalue lists.

    Both lists are sorted by (real, imag); each value of ``a`` is then paired
    greedily with the nearest still-unused value of ``b``.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return False
    a = a[np.lexsort((a.imag, a.real))]
    b = b[np.lexsort((b.imag, b.real))]
    used = np.zeros(b.size, dtype=bool)
    for z in a:
        d = np.abs(b - z)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol:
            return False
        used[j] = True
    return True
