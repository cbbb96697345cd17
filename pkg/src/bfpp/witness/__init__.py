"""Executable diagonalization producing a compact K that no contractive image covers locally."""

from .construction import (
    DISJOINT,
    INITIAL_RADIUS,
    INSERTED,
    ConstructionFault,
    FiniteHull,
    StageCertificate,
    choose_k,
    construct,
    contiguous_intervals,
    insertion_window,
    place_progressions,
    refine_stage,
)
from .enumeration import (
    Requirement,
    cantor_pair,
    cantor_unpair,
    enumerate_requirements,
    pair_index,
    rational_pair,
    requirement_index,
)
from .history import HistoryFormatError, RawHistory, load_history, parse_history, save_history, history_to_json
from .sets import (
    IN,
    OUT,
    UNKNOWN,
    Verdict,
    cover_length,
    enumerate_translates,
    gdelta_cover_report,
    member_fsigma,
    member_gdelta,
    recheck_verdict,
)
from .verify import Failure, verify_construction, verify_history, verify_stage
