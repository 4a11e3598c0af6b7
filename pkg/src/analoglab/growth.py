"""Growth trees over binary strings and trial-and-error search for the leftmost path.

Nodes are strings over ``"01"`` (``0`` = left).  A tree is a decidable,
downward-closed membership predicate.  The explorer of :func:`run_trial`
walks the tree in preorder, backing off to the right whenever it reaches a
terminal node; it never passes the leftmost infinite path and eventually
settles on every finite prefix of it, but how long that takes is not
bounded by anything computable.

Everything that would need an infinite search (fertility, potential size,
the leftmost path itself) is answered relative to a depth budget.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Iterator

from .resets import InputFamily, MachineFamily, ProgramFamily, dovetail, parse_assembly

__all__ = [
    "AtLeast",
    "ExhaustedRight",
    "GrowthTree",
    "NoPathWithinBudget",
    "NotInTree",
    "PathTrace",
    "agreement_threshold",
    "contains",
    "full_tree",
    "kleene_tree",
    "leftmost_path_oracle",
    "parity_family",
    "n_of_J",
    "potential_size",
    "run_trial",
    "tree_from_nodes",
    "trial_step",
]


class NotInTree(ValueError):
    pass


class NoPathWithinBudget(LookupError):
    pass


class _ExhaustedRight:
    """Trace terminus: an all-ones terminal node, nothing further right."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ExhaustedRight"


ExhaustedRight = _ExhaustedRight()


@dataclass(frozen=True, order=True)
class AtLeast:
    """A budget-capped lower bound standing in for an unbounded value."""

    value: int


class GrowthTree:
    """Binary tree given by a membership predicate, memoised per node."""

    def __init__(self, predicate: Callable[[str], bool], name: str = "tree"):
        self.name = name
        self._predicate = functools.lru_cache(maxsize=None)(predicate)

    def __repr__(self):
        return f"GrowthTree({self.name!r})"

    def __contains__(self, u: str) -> bool:
        return u == "" or bool(self._predicate(u))

    def children(self, u: str) -> list[str]:
        return [u + b for b in "01" if (u + b) in self]

    def is_terminal(self, u: str) -> bool:
        return not self.children(u)

    def nodes(self, max_depth: int) -> Iterator[str]:
        """All nodes of length ``<= max_depth``, in preorder."""
        stack = [""]
        while stack:
            u = stack.pop()
            yield u
            if len(u) < max_depth:
                stack.extend(reversed(self.children(u)))


def contains(tree: GrowthTree, u: str) -> bool:
    return u in tree


def full_tree() -> GrowthTree:
    return GrowthTree(lambda u: True, "full")


def tree_from_nodes(nodes: Iterable[str], name: str = "finite") -> GrowthTree:
    """Finite tree from an explicit node set (must be downward closed)."""
    members = set(nodes) | {""}
    for u in members:
        if u[:-1] not in members:
            raise ValueError(f"node set not downward closed at {u!r}")
    return GrowthTree(members.__contains__, name)


################################################################################
# Trial-and-error explorer


def trial_step(tree: GrowthTree, u: str) -> str | _ExhaustedRight:
    """One move of the explorer.

    Non-terminal ``u`` moves down to ``u0`` (or to ``u1`` if that is its only
    child).  Terminal ``u = v0 1...1`` moves to ``v1``; if ``v1`` is not a
    node it is itself terminal and the rule is applied again.  A terminal
    all-ones node has nothing to its right.
    """
    if u not in tree:
        raise NotInTree(u)
    if u + "0" in tree:
        return u + "0"
    if u + "1" in tree:
        return u + "1"
    while True:
        v = u.rstrip("1")
        if not v:
            return ExhaustedRight
        u = v[:-1] + "1"
        if u in tree:
            return u


@dataclass
class PathTrace:
    steps: list[str] = field(default_factory=lambda: [""])
    exhausted: bool = False
    backtracks: list[int] = field(default_factory=lambda: [0])

    @property
    def status(self) -> str:
        return "ExhaustedRight" if self.exhausted else "Running"

    def __len__(self):
        return len(self.steps)

    def growth_function(self) -> dict[str, str]:
        """The successor map ``u_n -> u_{n+1}`` along the trace."""
        return dict(zip(self.steps, self.steps[1:]))


def run_trial(tree: GrowthTree, max_steps: int) -> PathTrace:
    """Iterate :func:`trial_step` from the root until ``max_steps`` nodes are listed."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    trace = PathTrace()
    u = ""
    backtracks = 0
    while len(trace.steps) < max_steps:
        nxt = trial_step(tree, u)
        if nxt is ExhaustedRight:
            trace.exhausted = True
            break
        if not nxt.startswith(u):
            backtracks += 1
        trace.steps.append(nxt)
        trace.backtracks.append(backtracks)
        u = nxt
    return trace


def n_of_J(trace: PathTrace, lambda_prefix: str) -> int | None:
    """First index at which the trace stands on ``lambda_prefix``."""
    try:
        return trace.steps.index(lambda_prefix)
    except ValueError:
        return None


################################################################################
# Budgeted oracles


def _reaches(tree: GrowthTree, u: str, depth: int) -> bool:
    """Whether some node extending ``u`` has length ``depth``."""
    if len(u) >= depth:
        return True
    return any(_reaches(tree, c, depth) for c in tree.children(u))


def leftmost_path_oracle(tree: GrowthTree, J: int, depth_budget: int) -> str | None:
    """Least string of length ``J`` in the tree with an extension to ``depth_budget``."""
    if depth_budget < J:
        raise ValueError("depth_budget must be >= J")

    def search(u: str) -> str | None:
        if len(u) == J:
            return u if _reaches(tree, u, depth_budget) else None
        for c in tree.children(u):
            found = search(c)
            if found is not None:
                return found
        return None

    return search("")


def potential_size(tree: GrowthTree, v: str, depth_budget: int) -> int | AtLeast:
    """Length of the longest node extending ``v``, or ``AtLeast(budget)`` if the search reaches it."""
    if v not in tree:
        raise NotInTree(v)
    best = len(v)
    stack = [v]
    while stack:
        u = stack.pop()
        if len(u) >= depth_budget:
            return AtLeast(depth_budget)
        best = max(best, len(u))
        stack.extend(tree.children(u))
    return best


def agreement_threshold(tree: GrowthTree, J: int, depth_budget: int) -> int | AtLeast:
    """Least ``k`` such that every node longer than ``k`` agrees with the leftmost path on ``J`` places.

    A node agrees if it is consistent with the first ``J`` symbols of the
    path.  If disagreeing nodes survive to ``depth_budget`` the answer is
    ``AtLeast(depth_budget)``.
    """
    prefix = leftmost_path_oracle(tree, J, depth_budget)
    if prefix is None:
        raise NoPathWithinBudget(f"no node of length {J} reaches depth {depth_budget}")
    worst = 0
    for u in tree.nodes(depth_budget):
        head = u[:J]
        if head != prefix[: len(head)]:
            if len(u) >= depth_budget:
                return AtLeast(depth_budget)
            worst = max(worst, len(u))
    return worst


################################################################################
# A tree with infinite paths but no computable one


def parity_family() -> InputFamily:
    """Slow parity machine (``data/parity.rm``) run on input ``p``."""
    text = resources.files("analoglab").joinpath("data/parity.rm").read_text()
    return InputFamily(parse_assembly(text))


@dataclass(frozen=True)
class SeparationConstraint:
    stage: int
    position: int
    bit: int


def separation_constraints(family: MachineFamily, max_stage: int) -> list[SeparationConstraint]:
    """Dovetailer log: program ``e`` halting with register 0 empty forces bit 1, otherwise bit 0."""
    out = []
    for ev in dovetail(family, max_stage):
        out.append(SeparationConstraint(ev.stage, ev.program, 1 if ev.registers[0] == 0 else 0))
    return out


def kleene_tree(machine_pair_budget: int, family: MachineFamily | None = None) -> GrowthTree:
    """Separating tree for the accept/reject halting sets, truncated at a stage budget.

    ``u`` is a node iff it obeys every constraint found within
    ``min(len(u), budget)`` dovetailing stages at positions ``< len(u)``.
    Its infinite paths are exactly the separators consistent with the
    constraints found within the budget.
    """
    if machine_pair_budget < 1:
        raise ValueError("budget must be >= 1")
    family = family or ProgramFamily()
    log = separation_constraints(family, machine_pair_budget)

    def member(u: str) -> bool:
        n = len(u)
        horizon = min(n, machine_pair_budget)
        return all(u[c.position] == str(c.bit) for c in log if c.stage <= horizon and c.position < n)

    tree = GrowthTree(member, f"kleene-{machine_pair_budget}")
    tree.constraints = log
    return tree
