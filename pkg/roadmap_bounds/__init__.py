"""
roadmap-bounds: finite-sample bounds for probabilistic roadmaps

Computes sample counts sufficient for PRMs to find paths of a given clearance,
checks them with seeded Monte Carlo experiments on narrow-hallway environments,
and uses them to schedule sampling effort across motion-planning subproblems.
"""

__version__ = "0.1.0"
