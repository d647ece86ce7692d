"""Chordal Loewner evolution workbench: singular solutions, slit traces,
driving terms from slit curves and harmonic measures of slit sides."""
from .curves import Curve, hausdorff, read_curve_csv, write_curve_csv
from .driving import DrivingTerm, eval_on_mesh, evaluate
from .errors import (
    ConsistencyError,
    DivergenceError,
    DomainError,
    GeometryError,
    HullCollisionError,
    LoewnerError,
)
from .evolution import (
    EvolutionResult,
    TimeMesh,
    compute_trace,
    elementary_slit_map,
    elementary_slit_map_inverse,
    evolve,
    hydrodynamic_coefficient,
    make_graded_mesh,
    singular_solutions,
    solve_forward,
    solve_inverse,
)
from .measure import (
    MeasureSeries,
    WalkResult,
    hm_interval,
    hm_mc_oracle,
    hm_slit_sides,
    measure_series,
)
from .zipper import (
    arclength_profile,
    compute_driving,
    make_arc_curve,
    make_line_curve,
    make_vertical_curve,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
