"""Turbo-annihilation decoding of correlated hook errors in BB codes.

Pipeline: build a bivariate bicycle code, derive its measurement circuit,
compile the joint Tanner graph with trellis equalizer nodes, and decode
Z-syndromes of circuit-level X noise by message passing; circuit-level
min-sum and min-sum + OSD0 baselines and a Monte-Carlo harness round out
the package.
"""

from .codes import BBSpec, CssCode, TannerGraph, build_bb_code, code_dimension, get_code, tanner_graph
from .circuit import (FaultSet, MeasurementCircuit, NoiseParams, build_circuit,
                      propagate, sample_faults, syndrome, trial_rng)
from .jointgraph import (CircuitLevelGraph, EqualizerSpec, JointGraph,
                         PropagationMatrix, build_circuit_level_graph,
                         build_joint_graph, build_p_matrix, canonical_g,
                         compile_joint_graph, fault_priors, group_segments)
from .trellis import bcjr, branch_metrics, extrinsic
from .decoder import (DecodeResult, DecoderConfig, TaDecoder, count_operations,
                      decode, diversity_decode)
from .baselines import SoftDecision, bposd0_decode, nms_decode, osd0, reconstruct_data_error
from .harness import (ExperimentConfig, LerRecord, emit_csv, emit_plot,
                      is_logical_error, run_experiment)

__all__ = [
    "BBSpec", "CssCode", "TannerGraph", "build_bb_code", "code_dimension",
    "get_code", "tanner_graph",
    "FaultSet", "MeasurementCircuit", "NoiseParams", "build_circuit",
    "propagate", "sample_faults", "syndrome", "trial_rng",
    "CircuitLevelGraph", "EqualizerSpec", "JointGraph", "PropagationMatrix",
    "build_circuit_level_graph", "build_joint_graph", "build_p_matrix",
    "canonical_g", "compile_joint_graph", "fault_priors", "group_segments",
    "bcjr", "branch_metrics", "extrinsic",
    "DecodeResult", "DecoderConfig", "TaDecoder", "count_operations", "decode",
    "diversity_decode",
    "SoftDecision", "bposd0_decode", "nms_decode", "osd0", "reconstruct_data_error",
    "ExperimentConfig", "LerRecord", "emit_csv", "emit_plot", "is_logical_error",
    "run_experiment",
]

__version__ = "0.1.0"
