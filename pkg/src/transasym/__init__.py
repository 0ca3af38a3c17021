"""Symbolic expansion of exp-log germs over quasianalytic classes.

The pipeline: parse a term (termlang), evaluate it into a germ at +infinity
(germ, gqc), expand the germ into a truncated transseries (expand, hahn,
transmono), validate numerically (interval oracle), and analyze supports
(analysis).  The `transasym` CLI drives all of it.
"""

__version__ = "0.1.0"
