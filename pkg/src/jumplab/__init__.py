"""Planar quadruped jumping workbench.

A desk-scale pipeline for practicing precise jumps: an articulated planar
simulator stands in for the robot, a single-rigid-body model predicts how
foot-force changes move the trunk from one trial to the next, and a staged
constrained-QP learner refines the force schedule until the jump lands on
target. Converged force schedules transfer to harder targets by re-optimizing
only the terminal goal.
"""

__version__ = "0.1.0"
