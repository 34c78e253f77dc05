"""Canonical gauge solve: the divergence-free, tangential representative
of a 1-form with prescribed exterior derivative.

Given a degree-2 field G, the solver minimizes

    ||curl a - G||^2 + div_penalty ||div a||^2
                     + boundary_penalty ||a . n||^2 on the cube faces

by conjugate gradients on the normal equations, all norms trapezoid-
weighted.  On a simply connected domain the penalties pin the minimizer
uniquely; the defining property is weak, orthogonality to every gradient,
which is what the report measures.  Pointwise normals are ambiguous on
cube edges, so the penalty is applied facewise and the weak form is the
test that matters.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotConverged
from .fields import VecField, grad, l1_norm, l2_norm, lp_norm
from . import solvers


@dataclass
class GaugeSolveConfig:
    """Stopping and penalty parameters; None picks the grid-dependent
    default (boundary_penalty 10/h, max_iters 20n)."""

    max_iters: int = None
    rel_tol: float = 1e-8
    boundary_penalty: float = None
    div_penalty: float = 1.0

    def resolved(self, grid):
        max_iters = 20 * grid.n if self.max_iters is None else self.max_iters
        bnd = 10.0 / grid.h if self.boundary_penalty is None else self.boundary_penalty
        if max_iters <= 0 or not 0.0 < self.rel_tol < 1.0:
            raise ValueError("bad solver configuration")
        if bnd <= 0.0 or self.div_penalty <= 0.0:
            raise ValueError("penalties must be positive")
        return max_iters, self.rel_tol, bnd, self.div_penalty


@dataclass
class GaugeReport:
    curl_residual_rel: float
    div_norm: float
    normal_trace_norm: float
    weak_trace_defect: float
    iterations: int
    l32_l1_ratio: float

    def to_dict(self):
        return dict(self.__dict__)


def _normal_matrix(n, div_penalty, boundary_penalty):
    curl_m = solvers.curl_matrix(n)
    div_m = solvers.div_matrix(n)
    norm_m, wb = solvers.boundary_normal_operator(n)
    w = solvers.flat_weights(n)
    import scipy.sparse as sp
    w3 = sp.diags(np.concatenate([w, w, w]))
    w1 = sp.diags(w)
    mat = (curl_m.T @ w3 @ curl_m
           + div_penalty * (div_m.T @ w1 @ div_m)
           + boundary_penalty * (norm_m.T @ sp.diags(wb) @ norm_m))
    return mat.tocsr(), curl_m, div_m, norm_m, wb, w


def random_test_functions(grid, trials, seed):
    """Smooth scalar test functions: a linear ramp plus a few cosine
    plane waves with full 3-vector frequencies."""
    rng = np.random.default_rng(seed)
    x1, x2, x3 = grid.coords()
    out = []
    for _ in range(trials):
        lin = rng.normal(size=3)
        psi = lin[0] * x1 + lin[1] * x2 + lin[2] * x3
        for _ in range(4):
            k = rng.uniform(-4.0, 4.0, 3)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            psi = psi + rng.normal() * np.cos(k[0] * x1 + k[1] * x2 + k[2] * x3 + phase)
        out.append(psi)
    return out


def _weak_trace_defect(a: VecField, trials=20, seed=2024):
    """Max over test gradients of the relative L^2 pairing with a."""
    from .fields import ScalarField, l2_inner
    na = l2_norm(a)
    if na == 0.0:
        return 0.0
    worst = 0.0
    for psi in random_test_functions(a.grid, trials, seed):
        gpsi = grad(ScalarField(a.grid, psi))
        worst = max(worst, abs(l2_inner(a, gpsi)) / (na * l2_norm(gpsi)))
    return worst


def canonical_gauge(g_form: VecField, cfg: GaugeSolveConfig = None):
    """Solve for the canonical representative a with curl a ~ G.

    Returns (a, GaugeReport).  The solver runs regardless of whether G is
    actually in the range of curl and reports the attainable residual;
    NotConverged (carrying the partial result) is raised when the
    iteration budget runs out first.
    """
    if g_form.degree != 2:
        raise ValueError("canonical_gauge expects a degree-2 field")
    cfg = cfg or GaugeSolveConfig()
    grid = g_form.grid
    max_iters, rel_tol, bnd_pen, div_pen = cfg.resolved(grid)
    n = grid.n

    mat, curl_m, div_m, norm_m, wb, w = _normal_matrix(n, div_pen, bnd_pen)
    w3 = np.concatenate([w, w, w])
    g_flat = solvers.flat_vector(g_form.values)
    rhs = curl_m.T @ (w3 * g_flat)

    x, iters, achieved, converged = solvers.conjugate_gradient(
        mat, rhs, rel_tol, max_iters)
    a = VecField(grid, 1, solvers.unflat_vector(x, n))
    report = _gauge_report(a, g_form, x, g_flat, curl_m, div_m, norm_m, wb,
                           w, w3, iters)
    if not converged:
        raise NotConverged(
            f"gauge solve stopped at {iters} iterations with relative "
            f"gradient {achieved:.3e}", result=(a, report))
    return a, report


def _gauge_report(a, g_form, x, g_flat, curl_m, div_m, norm_m, wb, w, w3,
                  iters):
    resid = curl_m @ x - g_flat
    g_norm = float(np.sqrt((g_flat * w3 * g_flat).sum()))
    curl_rel = float(np.sqrt((resid * w3 * resid).sum()))
    curl_rel = curl_rel / g_norm if g_norm > 0.0 else curl_rel
    dvec = div_m @ x
    div_norm = float(np.sqrt((dvec * w * dvec).sum()))
    nvec = norm_m @ x
    normal_norm = float(np.sqrt((nvec * wb * nvec).sum()))
    ratio = 0.0
    g_l1 = l1_norm(g_form, region="ball")
    if g_l1 > 0.0:
        ratio = lp_norm(a, 1.5, region="ball") / g_l1
    return GaugeReport(
        curl_residual_rel=curl_rel,
        div_norm=div_norm,
        normal_trace_norm=normal_norm,
        weak_trace_defect=_weak_trace_defect(a),
        iterations=iters,
        l32_l1_ratio=ratio,
    )


def gauge_minimality_check(a: VecField, trials=20, seed=7):
    """Best norm reduction ||a|| - min_c ||a + c grad psi|| over random
    smooth trial directions psi, the scale c minimized in closed form.

    At most solver tolerance exactly when a is L^2-orthogonal to
    gradients (the weak form of the canonical conditions); any leftover
    gradient component shows up as a positive reduction.
    """
    from .fields import ScalarField, l2_inner
    na = l2_norm(a)
    if na == 0.0:
        return 0.0
    worst = -np.inf
    for psi in random_test_functions(a.grid, trials, seed):
        gpsi = grad(ScalarField(a.grid, psi))
        ng_sq = l2_inner(gpsi, gpsi)
        if ng_sq == 0.0:
            continue
        pairing = l2_inner(a, gpsi)
        best_sq = max(na * na - pairing * pairing / ng_sq, 0.0)
        worst = max(worst, na - np.sqrt(best_sq))
    return float(worst)
