"""Single-step corruptions of proof traces, for exercising the checker.

Every operator is chosen so that the mutated step is no longer licensed by
any rule; the checker must reject each one.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .trace import RULES, ProofTrace, Step

OPERATORS = ("retag", "drop-ref", "forward-ref", "negate", "unempty", "conclusion")


def _replace_step(trace: ProofTrace, i: int, step: Step) -> ProofTrace:
    steps = list(trace.steps)
    steps[i] = step
    return dataclasses.replace(trace, steps=tuple(steps))


def _apply(trace: ProofTrace, op: str, i: int, rng: np.random.Generator) -> ProofTrace | None:
    step = trace.steps[i]
    if op == "retag":
        others = [r for r in RULES if r != step.rule]
        return _replace_step(trace, i, dataclasses.replace(step, rule=others[rng.integers(len(others))]))
    if op == "drop-ref":
        if not step.refs:
            return None
        k = int(rng.integers(len(step.refs)))
        return _replace_step(trace, i, dataclasses.replace(step, refs=step.refs[:k] + step.refs[k + 1:]))
    if op == "forward-ref":
        if i + 1 >= len(trace.steps):
            return None
        later = int(rng.integers(i + 1, len(trace.steps)))
        return _replace_step(trace, i, dataclasses.replace(step, refs=(*step.refs, later)))
    if op == "negate":
        for rel in (" = ", " ⊆ ", " ⟶ "):
            if rel in step.assertion:
                text = step.assertion.replace(rel, " ≠ ", 1)
                return _replace_step(trace, i, dataclasses.replace(step, assertion=text))
        return None
    if op == "unempty":
        if not step.assertion.endswith("= ∅"):
            return None
        other = trace.preparations[1]
        text = step.assertion[: -len("∅")] + f"L[{other}]"
        return _replace_step(trace, i, dataclasses.replace(step, assertion=text))
    if op == "conclusion":
        return dataclasses.replace(trace, conclusion=trace.conclusion.replace("= ∅", "≠ ∅"))
    raise ValueError(f"unknown mutation operator {op!r}")


def mutate_trace(trace: ProofTrace, rng: np.random.Generator) -> tuple[ProofTrace, int, str]:
    """A randomly corrupted copy of ``trace``, the affected index and the operator.

    The index of a conclusion mutation is ``len(trace.steps)``.
    """
    while True:
        op = OPERATORS[rng.integers(len(OPERATORS))]
        i = int(rng.integers(len(trace.steps)))
        out = _apply(trace, op, i, rng)
        if out is not None:
            return out, (len(trace.steps) if op == "conclusion" else i), op
