"""Grover cycle walk - source modules."""
