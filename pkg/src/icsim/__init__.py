"""Simulation laboratory for finite-state interactive protocols over noisy channels.

The package splits into a protocol layer (finite-state protocols and their
transcripts), a channel layer (BSC / BEC / binary-input AWGN with capacity and
error-exponent machinery), block codes used to convey transcript columns, and
the simulation schemes themselves: a genie-aided vertical scheme, two-state
lookahead schemes, and the coinciding m-state scheme with tail exchange.
"""

from .channel import ERASURE, ChannelModel, binary_entropy
from .coding import CodeSpec, OracleCode, RandomLinearCode, RepetitionCode, convey
from .harness import (
    ExperimentConfig,
    SweepRow,
    SweepSummary,
    compare_bounds,
    run_sweep,
    run_trial,
    wilson_interval,
)
from .multistate import (
    CoincidenceCertificate,
    TailPlan,
    all_blocks_coincidence_bound,
    balanced_tables,
    coincidence_bound,
    coincidence_failure_trials,
    fourth_root_ceil,
    is_coinciding,
    is_useful,
    make_tail_plan,
    mstate_provider,
    simulate_mstate,
    tail_exhaustive_lookahead,
)
from .protocol import (
    FiniteStateProtocol,
    Party,
    PartyView,
    TranscriptTrace,
    load_protocol,
    make_markovian,
    owner_of_round,
    pad_protocol,
    party_view,
    protocol_from_dict,
    protocol_to_dict,
    random_protocol,
    run_protocol,
    save_protocol,
)
from .threestate import (
    DisjInstance,
    build_example2,
    count_transcript_triples,
    disj_via_protocol,
    reduce_disjointness,
    transcript_triple,
)
from .twostate import (
    AdvanceClass,
    BlockLookaheadMessage,
    CompositeFunction,
    block_lookahead,
    block_messages,
    classify_advance,
    composite_of,
    exhaustive_two_state,
    iterate_composites,
    random_two_state_protocol,
    run_exhaustive_block,
    run_lookahead_exchange,
    simulate_two_state,
    twostate_provider,
)
from .vertical import (
    AuditRecord,
    LookaheadResult,
    SimulationReport,
    VerticalSchedule,
    accounting,
    genie_lookahead,
    genie_provider,
    known_states_provider,
    make_schedule,
    overhead_bound,
    simulate_vertical,
)

__version__ = "0.1.0"

__all__ = [
    "ERASURE",
    "AdvanceClass",
    "AuditRecord",
    "BlockLookaheadMessage",
    "ChannelModel",
    "CodeSpec",
    "CoincidenceCertificate",
    "CompositeFunction",
    "DisjInstance",
    "ExperimentConfig",
    "FiniteStateProtocol",
    "LookaheadResult",
    "OracleCode",
    "Party",
    "PartyView",
    "RandomLinearCode",
    "RepetitionCode",
    "SimulationReport",
    "SweepRow",
    "SweepSummary",
    "TailPlan",
    "TranscriptTrace",
    "VerticalSchedule",
    "accounting",
    "all_blocks_coincidence_bound",
    "balanced_tables",
    "binary_entropy",
    "block_lookahead",
    "block_messages",
    "build_example2",
    "classify_advance",
    "coincidence_bound",
    "coincidence_failure_trials",
    "compare_bounds",
    "composite_of",
    "convey",
    "count_transcript_triples",
    "disj_via_protocol",
    "exhaustive_two_state",
    "fourth_root_ceil",
    "genie_lookahead",
    "genie_provider",
    "is_coinciding",
    "is_useful",
    "iterate_composites",
    "known_states_provider",
    "load_protocol",
    "make_markovian",
    "make_schedule",
    "make_tail_plan",
    "mstate_provider",
    "overhead_bound",
    "owner_of_round",
    "pad_protocol",
    "party_view",
    "protocol_from_dict",
    "protocol_to_dict",
    "random_protocol",
    "random_two_state_protocol",
    "reduce_disjointness",
    "run_exhaustive_block",
    "run_lookahead_exchange",
    "run_protocol",
    "run_sweep",
    "run_trial",
    "save_protocol",
    "simulate_mstate",
    "simulate_two_state",
    "simulate_vertical",
    "tail_exhaustive_lookahead",
    "transcript_triple",
    "twostate_provider",
    "wilson_interval",
]
