"""Randomised identity suites used by ``laminar verify`` and the tests.

``numpy.linalg`` serves here only as the independent dense oracle that the
constructor-based routines are compared against.
"""
import time
from dataclasses import dataclass

import numpy as np

from .interwoven import (block_diag, block_diagonalize, interweave, interwoven_det, interwoven_inverse,
                         interwoven_power, interwoven_spectrum, interwoven_trace, is_irreducible, kron_dense)
from .numerics import spectra_match
from .quotient import QuotientAdjacency, block_triangular_spectra
from .stability import dido_condition, instability_condition, quotient_instability_example, siso_condition


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _well_conditioned(rng, n, max_cond=1e4):
    while True:
        m = rng.normal(size=(n, n))
        if np.linalg.cond(m) < max_cond:
            return m


def interwoven_suite(instances: int = 200, seed: int = 0):
    """Block round trip, spectrum union, trace, determinant, inverse, power, irreducibility."""
    rng = np.random.default_rng(seed)
    fails = {k: 0 for k in ("block round trip", "dense realisation", "spectrum union", "trace sum",
                            "determinant product", "inverse interweave", "power interweave",
                            "P reducible", "P diag(Q) irreducible")}
    worst = {k: 0.0 for k in fails}
    t0 = time.perf_counter()
    for _ in range(instances):
        r = int(rng.integers(1, 4))
        n = int(rng.integers(1, 7))
        cons = [_well_conditioned(rng, n) for _ in range(r)]
        p = interweave(cons)
        dense = p.dense

        if np.any(dense != kron_dense(cons)):
            fails["dense realisation"] += 1
        _, blocks = block_diagonalize(p)
        if any(np.any(b != c) for b, c in zip(blocks, cons)):
            fails["block round trip"] += 1

        ev = interwoven_spectrum(p).values
        if not spectra_match(ev, np.linalg.eigvals(dense), 1e-7):
            fails["spectrum union"] += 1

        err = abs(interwoven_trace(p) - np.trace(dense))
        worst["trace sum"] = max(worst["trace sum"], err)
        if err > 1e-10:
            fails["trace sum"] += 1

        d_ref = np.linalg.det(dense)
        err = abs(interwoven_det(p) - d_ref) / max(abs(d_ref), 1e-300)
        worst["determinant product"] = max(worst["determinant product"], err)
        if err > 1e-8:
            fails["determinant product"] += 1

        inv = interwoven_inverse(p).dense
        err = np.max(np.abs(dense @ inv - np.eye(r * n)))
        worst["inverse interweave"] = max(worst["inverse interweave"], err)
        if err > 1e-7:
            fails["inverse interweave"] += 1

        k = int(rng.integers(1, 5))
        pk = interwoven_power(p, k).dense
        ref = np.linalg.matrix_power(dense, k)
        err = np.max(np.abs(pk - ref)) / max(np.max(np.abs(ref)), 1e-300)
        worst["power interweave"] = max(worst["power interweave"], err)
        if err > 1e-8:
            fails["power interweave"] += 1

        if r >= 2:
            pos = interweave([rng.uniform(0.1, 1.0, size=(n, n)) for _ in range(r)])
            if is_irreducible(pos.dense):
                fails["P reducible"] += 1
            q = block_diag([rng.uniform(0.1, 1.0, size=(r, r)) for _ in range(n)])
            if not is_irreducible(pos.dense @ q):
                fails["P diag(Q) irreducible"] += 1
    elapsed = time.perf_counter() - t0
    out = []
    for k, f in fails.items():
        detail = f"{instances - f}/{instances}"
        if worst[k]:
            detail += f", worst {worst[k]:.2e}"
        out.append(CheckResult(f"interwoven: {k}", f == 0, detail))
    out.append(CheckResult("interwoven: suite runtime < 10 s", elapsed < 10.0, f"{elapsed:.2f} s"))
    return out


def quotient_splitting_suite(instances: int = 100, seed: int = 1):
    """eig(Pbar (I2 (x) M)) = eig(M) u eig(Lambda2 M) for random M and quotients."""
    rng = np.random.default_rng(seed)
    fails = 0
    for _ in range(instances):
        r = int(rng.integers(1, 4))
        quots = [QuotientAdjacency(*rng.uniform(0.01, 0.99, size=2)) for _ in range(r)]
        mt = rng.normal(size=(r, r))
        lhs, rhs = block_triangular_spectra(quots, mt)
        if not spectra_match(lhs, rhs, 1e-7):
            fails += 1
    return [CheckResult("quotient spectral splitting", fails == 0, f"{instances - fails}/{instances}")]


def condition_suite(instances: int = 500, seed: int = 2, lin=None, grid=None):
    """Closed-form single/double signal conditions against the eigenvalue product."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    fails = 0
    for i in range(instances):
        if i % 2 == 0:
            lam, tp = rng.uniform(-1, 1), rng.normal(scale=3)
            g, gu = instability_condition([[tp]], [lam])
            c, cu = siso_condition(lam, tp)
        else:
            dt = rng.normal(size=(2, 2))
            lam = rng.uniform(-1, 1, size=2)
            g, gu = instability_condition(dt, lam)
            c, cu = dido_condition(dt, lam)
        err = abs(g - c)
        worst = max(worst, err)
        if err > 1e-10 or (gu != cu and abs(c) > 1e-10):
            fails += 1
    out = [CheckResult("condition closed forms vs product", fails == 0,
                       f"{instances - fails}/{instances}, worst {worst:.2e}")]
    if lin is not None:
        grid = grid if grid is not None else np.exp(np.linspace(np.log(0.01), np.log(2.0), 25))
        worst = 0.0
        bad = 0
        for a in grid:
            for b in grid:
                prod, _ = instability_condition(lin.DT, [(a - 2) / (a + 2), (b - 1) / (b + 1)])
                _, margin = quotient_instability_example(a, b, 1.0, lin)
                err = abs(margin + prod)
                worst = max(worst, err)
                bad += err > 1e-9
        out.append(CheckResult("example inequality vs generic product", bad == 0,
                               f"{len(grid) ** 2 - bad}/{len(grid) ** 2}, worst {worst:.2e}"))
    return out


def run_all(seed: int = 0, instances: int = 200, splitting_instances: int = 100, condition_instances: int = 500):
    from .kinetics import HillKinetics, linearize, solve_hss
    spec = HillKinetics()
    lin = linearize(spec, *solve_hss(spec))
    res = []
    res += interwoven_suite(instances, seed)
    res += quotient_splitting_suite(splitting_instances, seed + 1)
    res += condition_suite(condition_instances, seed + 2, lin=lin)
    return res
