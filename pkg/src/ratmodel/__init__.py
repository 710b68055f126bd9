"""Exact rational computations for equivariant stable homotopy: Burnside rings,
dg modules over finite groups, E_a ringoids, their module categories and skew group rings."""

__version__ = "0.1.0"

from .exactq import MatQ
from .permgrp import PermGroup, group_from_spec
from .burnside import BurnsideElement, table_of_marks, idempotent_basis, split_unit_report
from .dgmod import DGModule, DGMap, homology
from .ringoid import DGCategory, EaCategory, build_Ea, formality_zigzag
