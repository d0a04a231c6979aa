"""Instrumented skyline algorithms with compiled or pure-Python kernels."""

from ._backend import BACKEND
from .algorithms import (
    BASE_ALGORITHMS,
    DominanceCounter,
    SkylineResult,
    canonical_matrix,
    dominates,
    run_core,
    skyline,
    skyline_bbs,
    skyline_bnl,
    skyline_bruteforce,
    skyline_dc,
    skyline_salsa,
    skyline_sfs,
)

__all__ = [
    "BACKEND",
    "BASE_ALGORITHMS",
    "DominanceCounter",
    "SkylineResult",
    "canonical_matrix",
    "dominates",
    "run_core",
    "skyline",
    "skyline_bbs",
    "skyline_bnl",
    "skyline_bruteforce",
    "skyline_dc",
    "skyline_salsa",
    "skyline_sfs",
]
