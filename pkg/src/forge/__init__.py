"""Workbench for bounded two-sorted formulas.

Compile machine acceptance into formulas, evaluate formulas over finite
slices, translate them to propositional form, and check sequent proofs.
"""

from . import (acc, cli, codec, errors, evaluate, formulas, machine, nepo,
               proofs, prop, reflect, sexpr)

__all__ = ["acc", "cli", "codec", "errors", "evaluate", "formulas", "machine",
           "nepo", "proofs", "prop", "reflect", "sexpr"]
