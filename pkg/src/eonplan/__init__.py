"""Multi-period elastic optical network planning.

Provisions a fixed set of connections over a shared spectrum grid, one
planning epoch at a time, from multi-step traffic predictions.  Exact
branch-and-bound and first-fit heuristic engines share the same state
model and reporting, so their blocking / disruption / provisioning-gap
numbers are directly comparable.
"""

__version__ = "0.1.0"
