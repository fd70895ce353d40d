"""netlump: merge provably equivalent neurons in feed-forward ReLU networks.

Core pipeline: max_lumpability finds the coarsest groups of hidden neurons
whose biases and per-group input sums are positively proportional,
check_lumpability verifies such a grouping, and reduce_network collapses
each group into one neuron without changing the network's outputs.  The
relax module removes neurons that are positive combinations of several
others (exact only where donor pre-activations share a sign), and the
chains module applies the same lumping theory to continuous-time Markov
chains and labelled graphs.
"""

from .bench import (AgreementMetrics, PlantSpec, argmax_agreement,
                    degradation_sweep, gen_planted, max_deviation,
                    write_sweep_csv)
from .chains import (Chain, ChainViolation, StatePartition, brute_force_max,
                     check_lumping, class_sums, max_lumping, quotient_chain,
                     validate_chain)
from .errors import (InputError, InternalCheckError, ToolError,
                     VerificationFailure)
from .lumping import (Lumping, LumpingViolation, check_lumpability,
                      max_lumpability, partition_layer, signatures)
from .network import (Activation, ForwardTrace, Layer, Network, Violation,
                      apply_activation, forward, forward_layer, forward_trace,
                      validate)
from .partition import Partition
from .quotient import (ReductionReport, detect_and_reduce, parameter_count,
                       reduce_network, reduction_report)
from .relax import (Elimination, SignReport, eliminate,
                    find_linear_dependencies, sign_condition_rate)

__version__ = "0.1.0"

__all__ = [
    "Activation", "AgreementMetrics", "Chain", "ChainViolation",
    "Elimination", "ForwardTrace", "InputError", "InternalCheckError",
    "Layer", "Lumping", "LumpingViolation", "Network", "Partition",
    "PlantSpec", "ReductionReport", "SignReport", "StatePartition",
    "ToolError", "VerificationFailure", "Violation", "apply_activation",
    "argmax_agreement", "brute_force_max", "check_lumpability",
    "check_lumping", "class_sums", "degradation_sweep", "detect_and_reduce",
    "eliminate", "find_linear_dependencies", "forward", "forward_layer",
    "forward_trace", "gen_planted", "max_deviation", "max_lumpability",
    "max_lumping", "parameter_count", "partition_layer", "quotient_chain",
    "reduce_network", "reduction_report", "signatures",
    "sign_condition_rate", "validate", "validate_chain", "write_sweep_csv",
]
