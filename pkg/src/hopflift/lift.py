"""Construct the circle-bundle lift of a sphere-valued map from its
gauge.

Given (u, eta) with curl eta ~ D(u), the lift is assembled in one chart:
compose a section with u, measure how far its gauge is from eta, check
that the mismatch is closed, integrate it into a phase by least squares,
and rotate the section by that phase.  The result satisfies h(uhat) = u
exactly (the section roundtrip survives the fiberwise rotation) and
2 uhat*theta = eta up to discretization.  Maps whose range is dense in
the target sphere leave no admissible chart and are rejected.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ChartExhausted, NotClosed, NotConverged
from .fields import LiftField, ScalarField, SphereMapField, VecField, curl, l2_norm
from .hopf import (DEFAULT_POLE_ANGLE, energy_identity_defect, gauge_of_lift,
                   hopf, section_of_map)
from . import solvers

#: treat norms below this as zero when forming relative errors
_TINY = 1e-12


def default_pole_candidates():
    """The 12 icosahedron vertices plus the 6 signed axes."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    raw = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            raw += [(0.0, s1, s2 * phi), (s1, s2 * phi, 0.0), (s2 * phi, 0.0, s1)]
    raw += [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0),
            (0.0, -1.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    pts = np.asarray(raw)
    return pts / np.linalg.norm(pts, axis=-1, keepdims=True)


def select_pole(u: SphereMapField, candidates=None, min_angle=DEFAULT_POLE_ANGLE):
    """Pick the candidate direction farthest (in min angle) from the
    range of u; first in candidate order on ties.

    Raises ChartExhausted when no candidate clears ``min_angle``: the
    range of u is too dense on the sphere for a single chart.
    """
    cands = default_pole_candidates() if candidates is None else np.asarray(
        candidates, dtype=np.float64)
    if cands.size == 0:
        raise ValueError("empty candidate list")
    pts = u.values.reshape(-1, 3)
    # min over nodes of the angle to each candidate == arccos of the max dot
    dots = pts @ cands.T
    min_angles = np.arccos(np.clip(dots.max(axis=0), -1.0, 1.0))
    best = int(np.argmax(min_angles))
    if min_angles[best] < min_angle:
        raise ChartExhausted(
            f"range of u is {min_angle}-dense on S^2; best candidate only "
            f"{min_angles[best]:.4f} rad clear")
    return cands[best]


@dataclass
class LiftConfig:
    """None entries pick grid-dependent defaults: closed_tol 50 h^2,
    max_iters 20 n."""

    closed_tol: float = None
    rel_tol: float = 1e-8
    max_iters: int = None
    pole_candidates: tuple = None
    min_pole_angle: float = DEFAULT_POLE_ANGLE

    def resolved(self, grid):
        closed = 50.0 * grid.h ** 2 if self.closed_tol is None else self.closed_tol
        iters = 20 * grid.n if self.max_iters is None else self.max_iters
        return closed, self.rel_tol, iters


@dataclass
class LiftReport:
    pole_used: tuple          # None when produced by verify_lift
    min_pole_distance: float
    alpha_closedness: float
    projection_error: float
    gauge_error: float
    energy_defect: float
    phase_anchor: int
    iterations: int = 0

    def to_dict(self):
        d = dict(self.__dict__)
        d["pole_used"] = None if self.pole_used is None else list(self.pole_used)
        return d


def _phase_rotate(values, phase):
    """Apply the fiberwise rotation e^{i phase} to (.., 4) lift values."""
    c, s = np.cos(phase), np.sin(phase)
    out = np.empty_like(values)
    out[..., 0] = values[..., 0] * c - values[..., 1] * s
    out[..., 1] = values[..., 0] * s + values[..., 1] * c
    out[..., 2] = values[..., 2] * c - values[..., 3] * s
    out[..., 3] = values[..., 2] * s + values[..., 3] * c
    return out


def _solve_phase(grid, alpha: VecField, rel_tol, max_iters):
    """Least-squares solution of grad phi = alpha, anchored to zero at
    the node nearest the origin."""
    n = grid.n
    gm = solvers.grad_matrix(n)
    w = solvers.flat_weights(n)
    w3 = np.concatenate([w, w, w])
    rhs = gm.T @ (w3 * solvers.flat_vector(alpha.values))
    import scipy.sparse as sp
    mat = (gm.T @ sp.diags(w3) @ gm).tocsr()
    phi, iters, achieved, converged = solvers.conjugate_gradient(
        mat, rhs, rel_tol, max_iters)
    anchor = grid.origin_index()
    phi = phi - phi[anchor]
    return phi.reshape(n, n, n), anchor, iters, converged, achieved


def _projection_error(uhat_values, u_values):
    diff = hopf(uhat_values) - u_values
    return float(np.sqrt(np.einsum("...c,...c->...", diff, diff)).max())


def _gauge_error(grid, uhat: LiftField, eta: VecField):
    recovered = gauge_of_lift(uhat)
    diff = VecField(grid, 1, recovered.values - eta.values)
    denom = l2_norm(eta)
    err = l2_norm(diff)
    return err / denom if denom > _TINY else err


def _energy_defect(uhat, u, eta):
    defect = energy_identity_defect(uhat, u, eta)
    mask = uhat.grid.cube_interior_mask()
    return float(np.abs(defect.values[mask]).max())


def lift(u: SphereMapField, eta: VecField, cfg: LiftConfig = None):
    """Produce uhat with h(uhat) = u and gauge close to eta.

    Raises ChartExhausted when no section chart fits the range of u,
    NotClosed when curl of the phase 1-form is too large relative to its
    size (the supplied eta cannot match the pullback of u), and
    NotConverged from the phase solve.
    """
    if u.grid != eta.grid:
        raise ValueError("fields live on different grids")
    if eta.degree != 1:
        raise ValueError("eta must be a degree-1 field")
    cfg = cfg or LiftConfig()
    grid = u.grid
    closed_tol, rel_tol, max_iters = cfg.resolved(grid)

    pole = select_pole(u, cfg.pole_candidates, cfg.min_pole_angle)
    pts = u.values.reshape(-1, 3)
    min_dist = float(np.arccos(np.clip(pts @ pole, -1.0, 1.0)).min())

    section = section_of_map(u, pole, cfg.min_pole_angle)
    section_gauge = gauge_of_lift(section)
    alpha = VecField(grid, 1,
                     0.5 * (eta.values - section_gauge.values))
    curl_alpha = curl(alpha)
    # curl alpha is measured against the problem scale, not just ||alpha||:
    # a bare ratio misfires in both directions, blowing up when eta already
    # sits near the section's gauge (alpha ~ 0 and its curl is two
    # difference stencils' worth of noise) and going quiet when alpha is
    # dominated by a large legitimate gradient part.  The scale combines
    # the gauge size per domain length and the pullback size carried by
    # the section's gauge.
    scale = max(l2_norm(alpha),
                0.25 * (l2_norm(eta) + l2_norm(section_gauge)),
                0.5 * l2_norm(curl(section_gauge)), _TINY)
    closedness = l2_norm(curl_alpha) / scale
    if closedness > closed_tol:
        raise NotClosed(
            f"curl of the phase form is {closedness:.3e} relative, above "
            f"the closedness tolerance {closed_tol:.3e}; eta does not "
            f"match the pullback of u")

    phi, anchor, iters, converged, achieved = _solve_phase(
        grid, alpha, rel_tol, max_iters)
    uhat = LiftField(grid, _phase_rotate(section.values, phi))
    report = LiftReport(
        pole_used=tuple(float(c) for c in pole),
        min_pole_distance=min_dist,
        alpha_closedness=closedness,
        projection_error=_projection_error(uhat.values, u.values),
        gauge_error=_gauge_error(grid, uhat, eta),
        energy_defect=_energy_defect(uhat, u, eta),
        phase_anchor=anchor,
        iterations=iters,
    )
    if not converged:
        raise NotConverged(
            f"phase solve stopped at {iters} iterations with relative "
            f"gradient {achieved:.3e}", result=(uhat, report))
    return uhat, report


def verify_lift(u: SphereMapField, eta: VecField, uhat: LiftField) -> LiftReport:
    """Recompute the lift diagnostics from scratch, independent of how
    uhat was produced.  Pure: repeated calls agree bit-exactly."""
    if not (u.grid == eta.grid == uhat.grid):
        raise ValueError("fields live on different grids")
    return LiftReport(
        pole_used=None,
        min_pole_distance=float("nan"),
        alpha_closedness=float("nan"),
        projection_error=_projection_error(uhat.values, u.values),
        gauge_error=_gauge_error(u.grid, uhat, eta),
        energy_defect=_energy_defect(uhat, u, eta),
        phase_anchor=u.grid.origin_index(),
    )


def relative_phase(uhat: LiftField, reference: LiftField):
    """Pointwise fiber phase of uhat against a reference lift of the
    same map, as an angle field centred on its circular mean.

    For uhat = e^{i delta} reference the pairing
    z conj(z0) + w conj(w0) equals e^{i delta} exactly, and measuring
    deviations from the circular mean keeps a constant offset near +-pi
    from wrapping into a fake spread.
    """
    v, r = uhat.values, reference.values
    z = (v[..., 0] + 1j * v[..., 1]) * (r[..., 0] - 1j * r[..., 1])
    w = (v[..., 2] + 1j * v[..., 3]) * (r[..., 2] - 1j * r[..., 3])
    pair = z + w
    mags = np.abs(pair)
    pair = pair / np.where(mags < _TINY, 1.0, mags)
    mean_dir = pair.mean()
    mean_dir /= max(abs(mean_dir), _TINY)
    return np.angle(pair * np.conj(mean_dir))
