"""Inversion of polynomial automorphisms ``F = X + H`` via the Δ_F iteration.

Sparse exact polynomials over the integers, the rationals and prime fields;
Pascal-finite inversion with a step bound that decides invertibility;
denominator clearing by specialization of ``t^-1 F(tX)``; and a modular
pipeline that rebuilds integer inverses from inverses modulo primes.
"""

from importlib import resources

from .bounds import BoundReport, coeff_bound_b, global_bound_C, length_bound_l
from .inversion import InversionResult, Status, invert, stats_stream, step_bound_mu, step_bounds
from .mapdoc import MapDocument, MapSyntaxError, parse_map, read_map, render_map
from .modcrt import (CrtAccumulator, ModularWitness, crt_merge, invert_mod_p, pipeline_invert_crt,
                     reduce_map, select_primes, stabilization_check)
from .poly import PolyMap, Polynomial, compose, compose_map, shape_of
from .ring import GF, QQ, ZZ, PrimeField, parse_ring
from .segre import clear_denominators, specialize_homotopy, transport_inverse

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "CrtAccumulator", "GF", "InversionResult", "MapDocument", "MapSyntaxError",
    "ModularWitness", "PolyMap", "Polynomial", "PrimeField", "QQ", "Status", "ZZ", "bundled_map",
    "bundled_map_names", "clear_denominators", "coeff_bound_b", "compose", "compose_map", "crt_merge",
    "global_bound_C", "invert", "invert_mod_p", "length_bound_l", "parse_map", "parse_ring",
    "pipeline_invert_crt", "read_map", "reduce_map", "render_map", "select_primes", "shape_of",
    "specialize_homotopy", "stabilization_check", "stats_stream", "step_bound_mu", "step_bounds",
    "transport_inverse",
]


def bundled_map(name: str) -> MapDocument:
    """Load one of the bundled example maps, e.g. ``bundled_map("deg15")``."""
    if not name.endswith(".map"):
        name += ".map"
    text = resources.files(__package__).joinpath("maps", name).read_text(encoding="utf-8")
    return parse_map(text)


def bundled_map_names() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files(__package__).joinpath("maps").iterdir()
                  if p.name.endswith(".map"))
