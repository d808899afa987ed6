"""Discrete Ricci curvatures of weighted hypergraphs."""

from .exceptions import (
    Disconnected,
    HypercurvError,
    InvalidSpec,
    LPFailure,
    NonStabilized,
    NotAGraph,
    ParseError,
    SolverFailure,
    UnsupportedStructure,
    ValidationError,
)
from .hypergraph import FamilySpec, Hypergraph, clique_expansion, distance_matrix, generate, parse, serialize
from .kantorovich import c_closed_form, c_generic, c_two_level, c_value, kappa, kd, verify_key_property, wkd
from .laplacian import argmax_face, energy, laplacian_l0, laplacian_members
from .resolvent import ProxProblem, probe_liminf, psi, resolve
from .transport import lly_curvature, random_walk_measure, w1

__version__ = "0.1.0"

__all__ = [
    "Disconnected",
    "HypercurvError",
    "InvalidSpec",
    "LPFailure",
    "NonStabilized",
    "NotAGraph",
    "ParseError",
    "SolverFailure",
    "UnsupportedStructure",
    "ValidationError",
    "FamilySpec",
    "Hypergraph",
    "clique_expansion",
    "distance_matrix",
    "generate",
    "parse",
    "serialize",
    "argmax_face",
    "energy",
    "laplacian_l0",
    "laplacian_members",
    "ProxProblem",
    "probe_liminf",
    "psi",
    "resolve",
    "lly_curvature",
    "random_walk_measure",
    "w1",
    "c_closed_form",
    "c_generic",
    "c_two_level",
    "c_value",
    "kappa",
    "kd",
    "verify_key_property",
    "wkd",
]
