"""Unitriangular matrix groups over small finite fields: arithmetic, central
series, maximal abelian ideals and automorphisms."""

from .gf import Field, FieldElem, field_make, field_from_order
from .ntcore import NtMat, RootElem, root
from .autgrp import AutMap, verify, compose, apply
from .decomp import DecompWord, decompose

__all__ = ["Field", "FieldElem", "field_make", "field_from_order", "NtMat", "RootElem", "root",
           "AutMap", "verify", "compose", "apply", "DecompWord", "decompose"]
