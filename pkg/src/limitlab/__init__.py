"""Simulation library for in-the-limit language generation and identification
games over ultimately periodic sets, with exact density accounting and
topological identifiability checks."""

from .upsets import UPSet, intersect_all
from .families import (ArithProg, CoSingleton, Family, Multiples, builtin,
                       BUILTIN_NAMES)
from .engine import ProtocolViolation, Report, Step, Transcript, analyze, run
from .adversaries import (ChainTeaser, FixedEnumerator, Recycler,
                          TeaserExhausted, density_subset)
from .learners import (anchored_chain, element_to_semiindex, gcd_learner,
                       identifier, naive_chain, pod, semiindex_to_element,
                       weak_density)
from .density import (DensityCurve, density_curve, empirical_lower,
                      gb_partition, prefix_density)
from .topology import (PreorderRelation, Verdict, angluin_full,
                       fails_td_partial, identifiable_partial,
                       spec_preorder_full, spec_preorder_partial,
                       verdict_table)

__all__ = [
    "UPSet", "intersect_all", "Family", "CoSingleton", "Multiples", "ArithProg",
    "builtin", "BUILTIN_NAMES", "run", "analyze", "Transcript", "Step", "Report",
    "ProtocolViolation", "FixedEnumerator", "Recycler", "ChainTeaser",
    "TeaserExhausted", "density_subset", "naive_chain", "anchored_chain",
    "weak_density", "pod", "identifier", "gcd_learner", "element_to_semiindex",
    "semiindex_to_element", "DensityCurve", "prefix_density", "density_curve",
    "empirical_lower", "gb_partition", "Verdict", "PreorderRelation",
    "angluin_full", "identifiable_partial", "fails_td_partial",
    "spec_preorder_full", "spec_preorder_partial", "verdict_table",
]
__version__ = "0.1.0"
