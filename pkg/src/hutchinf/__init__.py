"""Attractors of finite families of maps defined on spaces of bounded sequences."""

from .metric import (ABSOLUTE, DISCRETE, EUCLIDEAN, MAXIMUM, BaseMetric, MetricParams, TailSeq,
                     base_dist, diameter, epsnet_prune, hausdorff, hausdorff_seq, seq_dist)
from .seqspace import NestedSeq, constant, diagonal_embed, diam_level, leaf, level_dist, node, project
from .maps import (AffineSum, Constant, GifsSystem, LipCert, SupScale, classify, error_bound,
                   gen_fixed_point, tail_error, tilde_eval, truncate)
from .engine import (AttractorApprox, attractor, gen_iterate_sets, gifs_attractor, gifs_iterate,
                     hutchinson, invariance_residual, iterate_bound_table, secelean_iterate,
                     truncated_system)
from .codespace import (CodePoint, code_dist, compose_address, constant_code, conjugacy_check, discrepancy_bound,
                        format_address, parse_address, pi, shift, slice_code, slices, tile)
from .cantor import (check_fin4, derive_params, measure_certificate, minimal_fin4_sequence, squares)
from .systems import builtin, planar_system, sup_interval_system, sup_pair_system

__version__ = "0.1.0"

__all__ = [
    "ABSOLUTE", "DISCRETE", "EUCLIDEAN", "MAXIMUM", "BaseMetric", "MetricParams", "TailSeq",
    "base_dist", "diameter", "epsnet_prune", "hausdorff", "hausdorff_seq", "seq_dist", "NestedSeq",
    "constant", "diagonal_embed", "diam_level", "leaf", "level_dist", "node", "project",
    "AffineSum", "Constant", "GifsSystem", "LipCert", "SupScale", "classify", "error_bound",
    "gen_fixed_point", "tail_error", "tilde_eval", "truncate", "AttractorApprox", "attractor",
    "gen_iterate_sets", "gifs_attractor", "gifs_iterate", "hutchinson", "invariance_residual",
    "iterate_bound_table", "secelean_iterate", "truncated_system", "CodePoint", "code_dist", "constant_code",
    "compose_address", "conjugacy_check", "discrepancy_bound", "format_address", "parse_address",
    "pi", "shift", "slice_code", "slices", "tile", "check_fin4", "derive_params", "measure_certificate",
    "minimal_fin4_sequence", "squares", "builtin", "planar_system", "sup_interval_system",
    "sup_pair_system",
]
