"""Curvature-flow laboratory for O(n)-invariant convex profiles.

Thin re-export of the compiled core; see the README for the CLI and the
artifact formats.
"""

try:  # installed wheel layout
    from ._core import (
        ConvexityError,
        FlowError,
        Profile,
        Speed,
        Trajectory,
        circle_profile,
        curvatures,
        evolve_from_oval,
        fit_area_asymptotics,
        geometry_fidelity,
        grim_reaper,
        make_speed,
        oval_exact,
        oval_profile,
        run_flow,
    )
except ImportError:  # in-tree build: _core sits next to us on PYTHONPATH
    from _core import (
        ConvexityError,
        FlowError,
        Profile,
        Speed,
        Trajectory,
        circle_profile,
        curvatures,
        evolve_from_oval,
        fit_area_asymptotics,
        geometry_fidelity,
        grim_reaper,
        make_speed,
        oval_exact,
        oval_profile,
        run_flow,
    )

__all__ = [
    "ConvexityError",
    "FlowError",
    "Profile",
    "Speed",
    "Trajectory",
    "circle_profile",
    "curvatures",
    "evolve_from_oval",
    "fit_area_asymptotics",
    "geometry_fidelity",
    "grim_reaper",
    "make_speed",
    "oval_exact",
    "oval_profile",
    "run_flow",
]

__version__ = "0.1.0"
