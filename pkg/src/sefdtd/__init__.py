"""Spontaneous-emission dynamics in structured vacua via FDTD.

A quantum emitter is replaced by a complex dipole oscillator that radiates
into, and is driven by, its own field on a Yee grid. The excited-state
population is read off as ``|P(t)|**2``.
"""

__version__ = "0.1.0"

from sefdtd.analysis import (
    AmbiguousOscillation,
    DecayFit,
    OscillationFit,
    compare_traces,
    count_revivals,
    extract_oscillation_frequency,
    fit_exponential_decay,
)
from sefdtd.config import ConfigError, ScenarioConfig, load_config, validate_config
from sefdtd.constants import (
    CONSTANTS,
    DEFAULT_EMITTER,
    EmitterSpec,
    PhysicalConstants,
    normalization_factor,
)
from sefdtd.emitter import DipoleState, PopulationTrace, simulate
from sefdtd.fdtd import FieldState, NumericalInstability, YeeSolver
from sefdtd.grid import (
    BoundarySpec,
    Grid,
    build_bragg_cavity_1d,
    build_disk_2d,
    build_free_space,
    build_pec_cavity_1d,
    build_square_cavity_2d,
    courant_dt,
)
from sefdtd.oracle import (
    ModeSet,
    ThreeLevelTrace,
    closed_forms,
    integrate_eq1,
    modes_pec_box_1d,
    modes_pec_box_2d,
)
from sefdtd.scenarios import RunSummary, list_scenarios, run_scenario
