"""Benchmarking, rendering and verification around the planner."""
