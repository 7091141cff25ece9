"""Simulator for a three-QPU distributed repetition code."""
from . import analysis, channels, dqpu, protocol, qcore
from .channels import ErrorPattern, PauliRates
from .dqpu import Network, NodeId, create_network, transcript_stats
from .protocol import CodeBasis, LogicalQubitSpec, Syndrome, decode, encode, run_roundtrip

__version__ = "0.1.0"
