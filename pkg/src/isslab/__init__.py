"""Numerical checks for input-to-state stable systems and their interconnections."""

from .analyzers import (StabilityReport, Verdict, analyze_interconnection,
                        analyze_special_interconnection, assumption4_check, consensus_analyze,
                        consensus_error_oracle, small_gain_check)
from .dynamics import (InputSignal, ISSCertificate, SystemModel, Trajectory, integrate,
                       integrate_coupled, replay_subsystem)
from .envelope import (EnvelopeParams, EnvelopeReport, XiPolicy, check_containment, delta_term,
                       envelope_corollary1, envelope_corollary2, envelope_theorem1, envelope_theorem2)
from .funcalg import ClassKLFunction, ComparisonFunction, Kind, compose, derivative, invert
from .matrix_bounds import FunctionMatrix, ScalarBoundPair, check_definiteness, scalar_bounds
from .registry import get_example, list_examples
from .report import VerificationReport

__version__ = "0.1.0"
