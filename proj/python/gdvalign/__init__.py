"""Graphlet degree vectors, node similarity and network alignment."""

from ._core import (
    NUM_ORBITS,
    ConfigError,
    DegenerateInputError,
    Error,
    FormatError,
    Graph,
    ParameterError,
    __version__,
    brute_force_orbits,
    count_orbits,
    derive_seed,
    generate_geo,
    generate_sf,
    graphlet_similarity,
    node_correctness,
    pca_reduce,
    rank_records,
    rewire,
    run_benchmark,
    s3_score,
    sa_align,
    wave_align,
)

__all__ = [
    "NUM_ORBITS",
    "ConfigError",
    "DegenerateInputError",
    "Error",
    "FormatError",
    "Graph",
    "ParameterError",
    "__version__",
    "brute_force_orbits",
    "count_orbits",
    "derive_seed",
    "generate_geo",
    "generate_sf",
    "graphlet_similarity",
    "node_correctness",
    "pca_reduce",
    "rank_records",
    "rewire",
    "run_benchmark",
    "s3_score",
    "sa_align",
    "wave_align",
]
