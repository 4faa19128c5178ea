"""rotowin: win-probability engine and draft assistant for Rotisserie
category leagues.

The package computes a closed-form approximation of the probability of
winning a Rotisserie league from a matrix of normalized matchup means, its
analytic gradient, Monte Carlo ground-truth oracles, draft agents built on
the objective, and a season simulator for agent-vs-agent experiments.
"""

__version__ = "0.1.0"
