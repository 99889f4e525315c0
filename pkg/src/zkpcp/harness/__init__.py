"""Experiment harness: seeds, statistics, adversary and forgery zoos, experiment drivers, reports and the CLI."""
