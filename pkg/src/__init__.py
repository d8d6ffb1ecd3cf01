"""Tangent graph planner for K topologically distinct paths on grid maps."""
