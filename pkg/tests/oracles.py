"""Independent reference computations used by the tests.

Nothing here imports the code under test except plain data containers, so a
bug in the library cannot hide itself by agreeing with its own oracle.
"""

from __future__ import annotations

import math
from itertools import product


def mzi_probabilities(alpha2: float, prep: str, phase: float, bs3: bool) -> dict[str, float]:
    """Detector probabilities by following amplitudes path by path.

    psi: alpha in a0, beta in a1; phi: all amplitude in a0.  The phase shifter
    multiplies a1 by e^{i phase}.  BS3 keeps sqrt(T) of a1 (T = alpha^2/beta^2)
    and diverts the rest to b0.  BS2 sends a0 and a1' to (b1 +- b2)/sqrt2.
    """
    alpha, beta = math.sqrt(alpha2), math.sqrt(1 - alpha2)
    a0, a1 = (alpha, beta) if prep == "psi" else (1.0, 0.0)
    a1 = a1 * complex(math.cos(phase), math.sin(phase))
    b0 = 0.0
    if bs3:
        t = alpha2 / (1 - alpha2)
        b0 = math.sqrt(1 - t) * a1
        a1 = math.sqrt(t) * a1
    b1 = (a0 + a1) / math.sqrt(2)
    b2 = (a0 - a1) / math.sqrt(2)
    out = {"B1": abs(b1) ** 2, "B2": abs(b2) ** 2}
    if bs3:
        out["B0"] = abs(b0) ** 2
    return out


def smallest_M(alpha2: float) -> int:
    """ceil(1/beta^2), read off by counting rather than by ceil()."""
    inv = 1 / (1 - alpha2)
    M = 1
    while M < inv - 1e-12:
        M += 1
    return M


def expected_disjuncts(alpha2: float, N: int) -> list[set[str]]:
    """Which side(s) of the either-or condition may hold for each n.

    a0 lives on d_1..d_M, so n = 0 and n > M are orthogonal to it.  For
    n = 1..M the transformed psi has a hole at position n.
    """
    M = max(smallest_M(alpha2), 2)
    out = []
    for n in range(N + 1):
        if n == 0 or n > M:
            out.append({"first", "both"})
        else:
            out.append({"second", "both"})
    return out


def gamma_squared(alpha2: float) -> float:
    M = max(smallest_M(alpha2), 2)
    return (1 - alpha2) - alpha2 / (M - 1)


# set algebra -------------------------------------------------------------------------


def eval_expr(expr, env: dict) -> frozenset:
    """Evaluate a parsed set expression with Python sets (duck-typed on the AST)."""
    name = type(expr).__name__
    if name == "Atom":
        return env[expr]
    if name == "Empty":
        return frozenset()
    parts = [eval_expr(a, env) for a in expr.args]
    out = parts[0]
    for p in parts[1:]:
        out = out & p if name == "Inter" else out | p
    return out


def holds(assertion, env) -> bool:
    lhs, rhs = eval_expr(assertion.lhs, env), eval_expr(assertion.rhs, env)
    return lhs == rhs if assertion.rel == "=" else lhs <= rhs


def brute_entails(premises, conclusion, atoms, universe=(0, 1)) -> bool:
    """Search for a counter-model: every atom an arbitrary subset of a small universe."""
    subsets = [frozenset(s for s, keep in zip(universe, bits) if keep) for bits in product((0, 1), repeat=len(universe))]
    for choice in product(subsets, repeat=len(atoms)):
        env = dict(zip(atoms, choice))
        if all(holds(p, env) for p in premises) and not holds(conclusion, env):
            return False
    return True


# finite model search -----------------------------------------------------------------


def brute_force_models(preps, members, measurements, K: int, nonempty: bool):
    """Every model on K states: supports, responses and deterministic maps.

    ``measurements`` maps a name to its outcomes.  Yields plain dicts.
    """
    states = range(K)
    resp_options = []
    for outs in measurements.values():
        subsets = [frozenset(c) for bits in product((0, 1), repeat=len(outs))
                   for c in [[o for o, b in zip(outs, bits) if b]]]
        resp_options.append([s for s in subsets if s or not nonempty])
    membership = list(product((0, 1), repeat=len(preps)))
    per_state = list(product(membership, product(*resp_options)))
    maps = list(product(states, repeat=K))
    for desc in product(per_state, repeat=K):
        supports = {p: frozenset(i for i in states if desc[i][0][j]) for j, p in enumerate(preps)}
        if any(not s for s in supports.values()):
            continue
        responses = {k: [desc[i][1][ki] for i in states] for ki, k in enumerate(measurements)}
        for chosen in product(maps, repeat=len(members)):
            yield {
                "supports": supports,
                "responses": responses,
                "maps": dict(zip(members, chosen)),
            }


def model_satisfies(model, poss, fixes, pointwise_oi: bool, complete: bool) -> bool:
    """poss[(prep, member, meas)] = set of possible outcomes; fixes[(member, prep)] = bool."""
    for (p, m, k), want in poss.items():
        if complete:
            t = model["maps"][m]
            got = set()
            for lam in model["supports"][p]:
                got |= model["responses"][k][t[lam]]
            if got != want:
                return False
    if pointwise_oi:
        for (m, p), f in fixes.items():
            if f and any(model["maps"][m][lam] != lam for lam in model["supports"][p]):
                return False
    return True
