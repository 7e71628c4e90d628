"""Bayesian ideal point estimation for roll-call votes."""
