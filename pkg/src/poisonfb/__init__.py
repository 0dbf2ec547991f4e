"""Closed-loop multicast beamforming under poisoned channel feedback."""

from poisonfb.attacker import (
    AttackConfig,
    AttackResult,
    attack_honest,
    attack_maxmin_poison,
    attack_orthogonal_starvation,
    attack_power_drain,
    starvation_direction,
)
from poisonfb.experiments import (
    ScenarioResult,
    ScenarioSpec,
    default_spec,
    read_results,
    run_scenario,
    write_results,
)
from poisonfb.model import (
    ChannelMatrix,
    SystemConfig,
    all_snrs,
    db_to_linear,
    generate_channel,
    isotropic_baseline_snr,
    linear_to_db,
    min_rate,
    snr,
)
from poisonfb.numerics import (
    RandomizationResult,
    SdpProblem,
    SdpSolution,
    principal_eigenvector,
    randomize_rank1,
    sdp_solve,
)
from poisonfb.plotting import render_plot
from poisonfb.streams import channel_stream, substream
from poisonfb.transmitter import (
    MaxMinSolution,
    QosSolution,
    solve_max_avg_snr,
    solve_max_min_iterative,
    solve_max_min_sdr,
    solve_power_min,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "ChannelMatrix",
    "MaxMinSolution",
    "QosSolution",
    "RandomizationResult",
    "ScenarioResult",
    "ScenarioSpec",
    "SdpProblem",
    "SdpSolution",
    "SystemConfig",
    "all_snrs",
    "attack_honest",
    "attack_maxmin_poison",
    "attack_orthogonal_starvation",
    "attack_power_drain",
    "channel_stream",
    "db_to_linear",
    "default_spec",
    "generate_channel",
    "isotropic_baseline_snr",
    "linear_to_db",
    "min_rate",
    "principal_eigenvector",
    "randomize_rank1",
    "read_results",
    "render_plot",
    "run_scenario",
    "sdp_solve",
    "snr",
    "solve_max_avg_snr",
    "solve_max_min_iterative",
    "solve_max_min_sdr",
    "solve_power_min",
    "starvation_direction",
    "substream",
    "write_results",
]
