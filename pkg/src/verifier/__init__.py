"""Verifier module - acceptance criteria for the walk toolkit."""

from .evaluator import AcceptanceEvaluator

__all__ = ["AcceptanceEvaluator"]
