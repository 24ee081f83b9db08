"""Prometheus metrics for solves, trials and errors."""
