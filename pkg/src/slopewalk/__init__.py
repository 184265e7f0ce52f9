"""Slope locomotion toolkit for a 2-DOF-per-leg quadruped.

Onboard control stack (terrain estimation, gait scheduling, virtual model
control, contact-force optimization), a quasi-static inclined-plane
simulator, slope-dependent energy models and an energy-aware RRT*/Dubins
planner over elevation grids.
"""

__version__ = "0.1.0"
