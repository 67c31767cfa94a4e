"""Microgrid resilience toolkit for green-hydrogen storage scheduling.

Couples nonlinear PEM electrolyzer / fuel-cell electrochemistry with a
piecewise-linear MILP scheduler, a shrinking-horizon MPC driver with greedy
feasibility projection, and resilience metrics reporting.
"""

__version__ = "0.1.0"
