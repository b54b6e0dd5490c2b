"""Resistance scaling on 4N-carpet pre-fractals."""

import json

from ._carpet import (
    CapExceeded,
    beta_coefficients,
    carpet_svg,
    cell_count,
    contraction_ratio,
    duality,
    fem_resistance,
    graph_stats,
    hausdorff_dimension,
    outer_vertex,
    rho_estimate,
)
from . import _carpet


def graph_resistance(N, m, kind="G"):
    """Effective resistance record of G_m or D_m as a dict; "R" holds the value."""
    return json.loads(_carpet._graph_resistance_json(N, m, kind))


def scaling_report(N, m_max=4, fem_n_max=2, fem_k=3, slack=0.05):
    return json.loads(_carpet._scaling_report_json(N, m_max, fem_n_max, fem_k, slack))


__all__ = [
    "CapExceeded",
    "beta_coefficients",
    "carpet_svg",
    "cell_count",
    "contraction_ratio",
    "duality",
    "fem_resistance",
    "graph_resistance",
    "graph_stats",
    "hausdorff_dimension",
    "outer_vertex",
    "rho_estimate",
    "scaling_report",
]
