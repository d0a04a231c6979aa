"""Small canonical causal graphs used by tests, examples and the benchmark."""

from __future__ import annotations

from .causal_graph import CausalGraph, graph_from_edges
from .preferences import PreferenceSpec


def negative_fork() -> CausalGraph:
    """X <- A -> Y with opposite signs: a confounder that anti-correlates X and Y."""
    return graph_from_edges([("A", "X", 1.0), ("A", "Y", -1.0)], nodes=["A", "X", "Y"])


def positive_collider() -> CausalGraph:
    """X -> C <- Y with positive edges."""
    return graph_from_edges([("X", "C", 1.0), ("Y", "C", 1.0)], nodes=["C", "X", "Y"])


def positive_chain() -> CausalGraph:
    return graph_from_edges([("X", "M", 1.0), ("M", "Y", 1.0)], nodes=["M", "X", "Y"])


def housing() -> CausalGraph:
    """Commute and Price driven by distance to the center (confounder) and scenic quality."""
    return graph_from_edges(
        [
            ("Distance_to_city_center", "Commute", 1.0),
            ("Distance_to_city_center", "Price", -1.0),
            ("Scenic_quality", "Commute", 1.0),
            ("Scenic_quality", "Price", 1.0),
            ("Commute", "Price", -1.0),
        ],
        nodes=["Commute", "Distance_to_city_center", "Price", "Scenic_quality"],
    )


def housing_preferences() -> PreferenceSpec:
    return PreferenceSpec(("Commute", "Price"), ("min", "min"))


def two_confounder_fork() -> CausalGraph:
    """X and Z share confounder A directly and through B; a weak direct X -> Z edge.

    The noise on Z's three incoming edges sums to one.
    """
    third = 1.0 / 3.0
    return graph_from_edges(
        [
            ("A", "X", 1.0),
            ("A", "B", 1.0),
            ("A", "Z", -0.5, third),
            ("B", "Z", -0.5, third),
            ("X", "Z", 0.1, third),
        ],
        nodes=["A", "B", "X", "Z"],
    )


def misaligned(noise_var: float = 0.1) -> CausalGraph:
    """Two min-min preferences X, Y with a negative confounder C and a negative direct edge.

    Low edge noise makes the confounder dominate, so X and Y are strongly
    anti-correlated until C is conditioned.
    """
    return graph_from_edges(
        [("C", "X", 1.0, noise_var), ("C", "Y", -1.0, noise_var), ("X", "Y", -0.5, noise_var)],
        nodes=["C", "X", "Y"],
    )


def all_positive() -> CausalGraph:
    """Every path between X and Y is positive; W is a disconnected bystander."""
    return graph_from_edges(
        [("C", "X", 1.0), ("C", "Y", 1.0), ("X", "Y", 0.5)],
        nodes=["C", "W", "X", "Y"],
    )


def xy_min() -> PreferenceSpec:
    return PreferenceSpec(("X", "Y"), ("min", "min"))


def xz_min() -> PreferenceSpec:
    return PreferenceSpec(("X", "Z"), ("min", "min"))
