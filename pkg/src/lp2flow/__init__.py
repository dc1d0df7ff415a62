"""Exact compiler from linear programs to 2-commodity flow instances.

The chain LP -> LEN -> 2-LEN -> 1-LEN -> FHF -> FPHF -> SFF -> 2CFF -> 2CFR
-> 2CF is run by `compile`; `witness_chain` pushes an exact LP solution up
the chain and `recover` maps any 2CF flow back down to an LP vector.
"""
from .mapback import ErrorBudget, error_budget, map_back, map_back_chain
from .model import (FhfInstance, FlowGraph, FphfInstance, KLenInstance,
                    LenInstance, LpInstance, NonnegVector, SffInstance,
                    SparseIntMatrix, TwoCffInstance, TwoCfInstance,
                    TwoCfrInstance, TwoCommodityFlow, compute_X, size_stats,
                    validate)
from .pipeline import CompileReport, compile, recover
from .reduce import STAGES, Trace, TriviallyInfeasible, reduce_all, reduce_stage
from .verify import ErrorReport, check
from .witness import WitnessError, construct_witness, witness_chain

__version__ = "0.1.0"
