"""Impulsive integrated pest management simulator and Floquet stability analyzer."""

from ._core import (
    ConfigError,
    DiagnosticsReport,
    DomainError,
    EventRecord,
    ImpulseEvent,
    ImpulseKind,
    ImpulseSchedule,
    IntegrationError,
    ModelParameters,
    SolverConfig,
    SolverStats,
    StabilityReport,
    SystemState,
    Trajectory,
    analytic_multipliers,
    analyze_stability,
    check_conditions,
    critical_period,
    impulse_calendar,
    integrate,
    monodromy,
    preset_names,
    preset_text,
    run_config,
    run_preset,
    theoretical_bound,
    vector_field,
    verify_trajectory,
)

__version__ = "0.1.0"
