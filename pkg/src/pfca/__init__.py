"""Probabilistic formal concepts: causal rule mining and fixed-point clustering.

Typical use::

    from pfca import build_context, mine_mscr, cluster, RunConfig

    ctx = build_context(rows, schema)
    rules = mine_mscr(ctx, config=RunConfig(alpha=0.01))
    concepts = cluster(ctx, rules)
"""

from ._kernels import HAVE_NUMBA
from .config import ConfigError, RunConfig
from .context import (
    Atom,
    Context,
    ContextError,
    LiteralSet,
    atom_of,
    build_context,
    derive_down,
    derive_up,
    enumerate_formal_concepts,
    is_positive,
    negate,
    negative,
    object_intent,
    positive,
)
from .fixpoint import (
    FixedPointConcept,
    MonotonicityError,
    UpsilonEngine,
    classify,
    closure,
    cluster,
    int_criterion,
    predict_step,
    upsilon_fixpoint,
    upsilon_step,
)
from .measure import ContingencyTable2x2, Measure, eta, fisher_one_sided, gamma, nu
from .miner import SearchError, mine_mscr, spi_chains
from .rules import CausalRule, RuleSet, is_probabilistic_causal, is_subrelation, refines
from .synthetic import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
