"""Experiment harness: configs, sweeps, verification and the CLI."""
