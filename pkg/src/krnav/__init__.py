"""Artificial potentials for navigating a convex objective among convex obstacles."""
from krnav.conditions import check_ellipsoid, check_general, max_condition_number
from krnav.navigate import FlowConfig, adjustable_k, gradient_flow, normalized_flow, switched_flow
from krnav.potential import PotentialConfig, QuadraticObjective, grad_phi_k, hess_phi_k, phi_k
from krnav.world import EggObstacle, EllipsoidObstacle, Workspace, WorldModel, generate_world

__all__ = [
    "EggObstacle", "EllipsoidObstacle", "FlowConfig", "PotentialConfig", "QuadraticObjective",
    "Workspace", "WorldModel", "adjustable_k", "check_ellipsoid", "check_general", "generate_world",
    "grad_phi_k", "gradient_flow", "hess_phi_k", "max_condition_number", "normalized_flow", "phi_k",
    "switched_flow",
]
