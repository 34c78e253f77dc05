"""Constraint-preserving smooth approximation.

The pipeline smooths the lift, not the map: mollify uhat componentwise,
renormalize, project down, and take the gauge of the smoothed lift.  The
smoothed pair then satisfies the exactness constraint by construction, up
to the closed remainder eta - 2 uhat*theta, which is mollified and added
back.  Widths too coarse for the map's oscillation collapse the
mollified modulus and are rejected rather than renormalized through zero.
"""

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ProjectionDegenerate
from .fields import (LiftField, SphereMapField, VecField, component_partials,
                     curl, l2_norm, mollify_components, mollify_region_mask)
from .hopf import gauge_of_lift, hopf
from .lift import LiftConfig, LiftReport, lift
from .pullback import pullback_area_form

#: mollified lift moduli below this cannot be renormalized meaningfully
MODULUS_FLOOR = 0.5


@dataclass
class ApproxReport:
    eps: float
    constraint_residual: float   # ||curl eta_eps - D(u_eps)|| on the deep interior
    dist_u_w12: float            # ||u_eps - u||_W12 on the ball mask
    dist_eta_l2: float           # ||eta_eps - eta||_L2 on the ball mask
    curl_remainder_norm: float   # ||curl (eta - gauge(uhat))||
    min_modulus: float
    lift: LiftReport

    def to_dict(self):
        d = dict(self.__dict__)
        d["lift"] = self.lift.to_dict()
        return d

    def row(self):
        return (self.eps, self.dist_u_w12, self.dist_eta_l2,
                self.constraint_residual)


def _masked_l2(grid, values, mask):
    w = grid.node_weights()
    sq = np.einsum("...c,...c->...", values, values)
    return float(np.sqrt((sq * w)[mask].sum()))


def _w12_distance(grid, diff, mask):
    w = grid.node_weights()
    sq = np.einsum("...c,...c->...", diff, diff)
    d = component_partials(diff, grid.h)
    sq = sq + np.einsum("...jc,...jc->...", d, d)
    return float(np.sqrt((sq * w)[mask].sum()))


def approximate(u: SphereMapField, eta: VecField, eps, cfg: LiftConfig = None):
    """One smoothing step at width eps.

    Returns (u_eps, eta_eps, ApproxReport).  Raises ProjectionDegenerate
    when the mollified lift modulus falls below 1/2 anywhere, or when
    3*eps exceeds the domain half-width so that no node gets mollified at
    all; lift errors propagate.
    """
    grid = u.grid
    uhat, lift_report = lift(u, eta, cfg)

    region = mollify_region_mask(grid, eps)
    if not region.any():
        raise ProjectionDegenerate(
            f"mollification window 3*eps = {3 * eps:.3f} exceeds the domain "
            "half-width; no node is smoothed")
    smoothed = mollify_components(grid, uhat.values, eps)
    moduli = np.sqrt(np.einsum("...c,...c->...", smoothed, smoothed))
    min_modulus = float(moduli.min())
    if min_modulus < MODULUS_FLOOR:
        raise ProjectionDegenerate(
            f"mollified lift modulus dropped to {min_modulus:.3f}; width "
            f"eps = {eps} is too coarse for the map's oscillation")
    uhat_eps = LiftField(grid, smoothed / moduli[..., None])
    u_eps = SphereMapField(grid, hopf(uhat_eps.values))
    zeta = gauge_of_lift(uhat_eps)

    remainder = VecField(grid, 1, eta.values - gauge_of_lift(uhat).values)
    curl_remainder = l2_norm(curl(remainder))
    zeta_tilde = mollify_components(grid, remainder.values, eps)
    eta_eps = VecField(grid, 1, zeta.values + zeta_tilde)

    # constraint residual where the smoothing is exact convolution and
    # the curl stencil stays inside that region
    x1, x2, x3 = grid.coords()
    depth = 1.0 - 3.0 * eps - 2.0 * grid.h
    deep = (np.abs(x1) <= depth) & (np.abs(x2) <= depth) & (np.abs(x3) <= depth)
    resid = curl(eta_eps).values - pullback_area_form(u_eps).values
    constraint = _masked_l2(grid, resid, deep) if deep.any() else float("nan")

    ball = grid.ball_mask()
    report = ApproxReport(
        eps=float(eps),
        constraint_residual=constraint,
        dist_u_w12=_w12_distance(grid, u_eps.values - u.values, ball),
        dist_eta_l2=_masked_l2(grid, eta_eps.values - eta.values, ball),
        curl_remainder_norm=curl_remainder,
        min_modulus=min_modulus,
        lift=lift_report,
    )
    return u_eps, eta_eps, report


def max_workers():
    """Worker cap for the sweep: HOPFLIFT_THREADS, default all cores."""
    env = os.environ.get("HOPFLIFT_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def convergence_sweep(u: SphereMapField, eta: VecField, eps_list,
                      cfg: LiftConfig = None):
    """One approximate call per width, widths strictly decreasing.

    The calls are independent, so they run on a thread pool capped by
    HOPFLIFT_THREADS; results are gathered in input order, so the output
    does not depend on the thread count.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    workers = min(max_workers(), max(1, len(eps_list)))
    if workers == 1:
        results = [approximate(u, eta, e, cfg) for e in eps_list]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(approximate, u, eta, e, cfg) for e in eps_list]
            results = [f.result() for f in futures]
    return [rep for _, _, rep in results]


def write_sweep_csv(reports, path):
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eps", "dist_u_w12", "dist_eta_l2",
                         "constraint_residual"])
        for rep in reports:
            writer.writerow([repr(v) for v in rep.row()])
