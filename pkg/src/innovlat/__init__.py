"""Event-driven simulator for three-state innovation diffusion on lattices."""

__version__ = "0.1.0"

from .lattice import LatticeSpec, build_lattice, neighbors
from .dynamics import (Params, Distribution, exact_transient, local_rates,
                       neighbor_counts, total_rate, single_site_config,
                       product_measure_config)
from .harris import (Event, EventStream, Trajectory, apply_event,
                     evolve_harris, generate_events)
from .gillespie import evolve_gillespie
from .coupling import (CoupledPair, coupled_alpha_pair, coupled_contact,
                       project_to_contact, check_alpha_ordering,
                       check_projection)
from .observables import (AWARENESS, ADOPTION, SURVIVED_PAST_HORIZON,
                          BassParams, SurvivalEstimate, bass_trajectory,
                          estimate_survival, extinction_time,
                          spacetime_raster, state_counts)
from .renormalization import (BlockField, ExtinctionBlockSpec,
                              SurvivalBlockSpec, classify_extinction_block,
                              classify_survival_block, oriented_reachability,
                              sample_block_field)
from .estimation import CriticalEstimate, SweepRow, estimate_critical, sweep

__all__ = [
    "LatticeSpec", "build_lattice", "neighbors",
    "Params", "Distribution", "exact_transient", "local_rates",
    "neighbor_counts", "total_rate", "single_site_config",
    "product_measure_config",
    "Event", "EventStream", "Trajectory", "apply_event", "evolve_harris",
    "generate_events",
    "evolve_gillespie",
    "CoupledPair", "coupled_alpha_pair", "coupled_contact",
    "project_to_contact", "check_alpha_ordering", "check_projection",
    "AWARENESS", "ADOPTION", "SURVIVED_PAST_HORIZON", "BassParams",
    "SurvivalEstimate", "bass_trajectory", "estimate_survival",
    "extinction_time", "spacetime_raster", "state_counts",
    "BlockField", "ExtinctionBlockSpec", "SurvivalBlockSpec",
    "classify_extinction_block", "classify_survival_block",
    "oriented_reachability", "sample_block_field",
    "CriticalEstimate", "SweepRow", "estimate_critical", "sweep",
]
