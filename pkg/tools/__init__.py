"""Run configuration parsing and tabular scan output for the command line."""
