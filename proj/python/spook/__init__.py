"""Probabilistic object-oriented knowledge bases with flat and structured inference."""

from ._core import (
    KnowledgeBase,
    Service,
    SpookError,
    binomial,
    check,
    format,
    generate_battalion,
    quantifier_joint,
)


def marginals(result):
    """Map each target of a query result to {value: probability}."""
    return {t["target"]: dict(zip(t["range"], t["marginal"])) for t in result["targets"]}


__all__ = [
    "KnowledgeBase",
    "Service",
    "SpookError",
    "binomial",
    "check",
    "format",
    "generate_battalion",
    "marginals",
    "quantifier_joint",
]
