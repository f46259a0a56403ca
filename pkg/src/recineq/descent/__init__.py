"""Descent methods and fixed-point schemes that produce the recursive inequality."""

from .fixedpoint import (
    MANN_CLAMP_FLOOR,
    MannRate,
    PowerLaw,
    accretive_rate,
    accretive_star_instance,
    check_tail_small,
    mann_rate,
    mann_rate_details,
    run_accretive_implicit,
    run_km,
    sigma_zero,
    sine_omega,
    sine_star_instance,
    wc_rate_sine,
)
from .problems import ConvexProblem, check_oracle, l1_box, quadratic
from .sets import Ball, Box, ConvexSet, Halfspace, contains, project, sample_points
from .subgradient import (
    CONDITION_NAMES,
    AbstractSetup,
    GradientConstants,
    abstract_constants,
    certify_gradient_meta,
    check_abstract_conditions,
    gradient_meta_bound,
    projective_constants,
    quadratic_constants,
    run_gradient_descent,
    run_projected_subgradient,
    sabotage,
    sample_ys,
    star_instance_from_trajectory,
)
from .trajectory import StepRecord, Trajectory
from .zoo import ZOO, ZooEntry, l1_box_setup, quadratic_setup, zoo_trajectory

__all__ = [name for name in dir() if not name.startswith("_")]
