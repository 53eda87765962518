"""Kronecker sequences with few nearest-neighbour distances, in exact arithmetic."""
from .cf import (
    CoefficientStream,
    Convergent,
    StreamError,
    complement,
    convergents,
    denominators,
    format_stream,
    parse_stream,
    rational_to_cf,
    value_of,
)
from .torus import L1, L2, LINF, Metric, coord_norm, distance_key, parse_metric, parse_metrics
from .nn import (
    GapSpectrum,
    NNRecord,
    OffsetTable,
    PointSet,
    TruncationError,
    circle_gaps,
    gap_spectrum,
    generate,
    h_profile,
    nearest_neighbor,
    nn_graph,
    nn_records,
    realize,
    stability_check,
)

__version__ = "0.1.0"
