"""Grid calculus for sphere-valued maps: pullback area forms, weak
exactness tests, canonical Hodge gauges, circle-bundle lifts, and
constraint-preserving smoothing."""

from .fields import (DEFAULT_BALL_MARGIN, Grid3, LiftField, ScalarField,
                     SphereMapField, VecField, curl, div, grad, l1_norm,
                     l2_inner, l2_norm, lp_norm, make_grid, mollify)
from .fileio import export_vtk, read_h3f, write_h3f
from .hopf import (energy_identity_defect, frame_checks, gauge_of_lift, hopf,
                   project_to_sphere, stereo_section, theta_at)
from .hodge import (GaugeReport, GaugeSolveConfig, canonical_gauge,
                    gauge_minimality_check)
from .lift import LiftConfig, LiftReport, lift, select_pole, verify_lift
from .approx import ApproxReport, approximate, convergence_sweep
from .pullback import (ExactnessReport, exactness_defect,
                       pointwise_identities, pullback_area_form, sphere_flux)
from . import testmaps

__version__ = "0.1.0"

__all__ = [
    "ApproxReport", "DEFAULT_BALL_MARGIN", "ExactnessReport", "GaugeReport",
    "GaugeSolveConfig", "Grid3", "LiftConfig", "LiftField", "LiftReport",
    "ScalarField", "SphereMapField", "VecField", "approximate",
    "canonical_gauge", "convergence_sweep", "curl", "div",
    "energy_identity_defect", "exactness_defect", "export_vtk",
    "frame_checks", "gauge_minimality_check", "gauge_of_lift", "grad",
    "hopf", "l1_norm", "l2_inner", "l2_norm", "lift", "lp_norm",
    "make_grid", "mollify", "pointwise_identities", "project_to_sphere",
    "pullback_area_form", "read_h3f", "select_pole", "sphere_flux",
    "stereo_section", "testmaps", "theta_at", "verify_lift", "write_h3f",
]
