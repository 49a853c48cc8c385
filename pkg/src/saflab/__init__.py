"""Outage and diversity-multiplexing analysis of slotted amplify-and-forward relaying."""

from .channel import ChannelRealization, LinkStats, SampleKey, sample_batch, sample_realization, symmetric_network
from .errors import ConfigError, DiagnosticError
from .outage import OutageCurve, OutageEstimate, diversity_slope, estimate_outage, mutual_information, power_gain_at
from .scheduling import Schedule
from .schemes import EquivalentChannel, PowerAllocation, SchemeSpec, build_channel

__version__ = "0.1.0"
