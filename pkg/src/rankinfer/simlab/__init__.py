"""Simulation designs, Monte Carlo engine and table emitters."""

from rankinfer.simlab.designs import (
    OMEGA_1,
    OMEGA_2,
    Design,
    gen_gaussian_direct,
    gen_hetero_ma,
    gen_linear_gaussian,
    gen_motivation,
    outer_contributions,
    sym_sqrt,
)
from rankinfer.simlab.emit import emit, parse, table_from_records
from rankinfer.simlab.montecarlo import (
    Context,
    EstimatorSpec,
    MethodSpec,
    RankHistogram,
    RejectionTable,
    Row,
    rank_distribution,
    run_monte_carlo,
)

__all__ = [
    "OMEGA_1", "OMEGA_2", "Context", "Design", "EstimatorSpec", "MethodSpec", "RankHistogram",
    "RejectionTable", "Row", "emit", "gen_gaussian_direct", "gen_hetero_ma", "gen_linear_gaussian",
    "gen_motivation", "outer_contributions", "parse", "rank_distribution", "run_monte_carlo",
    "sym_sqrt", "table_from_records",
]
