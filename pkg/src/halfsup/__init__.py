"""Numerical toolkit for half-integral weight forms on Gamma_0(4N).

Modules: arith (number theory, groups, multipliers), qexp (q-expansions),
geometry (fundamental sets), hecke, amplifier, latcount (matrix counts),
kernel (automorphic kernel), supnorm, cli.
"""
__version__ = "0.1.0"
