"""Enumeration of scattering diagrams as capped ballot paths.

A diagram for an m-photon process is a time ordering of m creation and
m annihilation events whose running excitation level stays between 0
and a system-dependent cap, starting and ending at the vacuum. Paths
are represented by step sequences (+1 creation, -1 annihilation) in
time order, earliest step first; the printable label follows the
opposite convention (latest operator leftmost), matching how the
corresponding vacuum expectation value is written.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate

_UP = "a†"  # a-dagger
_DOWN = "a"


@dataclass(frozen=True)
class Diagram:
    """A capped ballot path of 2m steps."""

    steps: tuple[int, ...]

    def __post_init__(self) -> None:
        steps = tuple(int(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps or len(steps) % 2:
            raise ValueError("a diagram needs an even, positive number of steps")
        if any(s not in (-1, 1) for s in steps):
            raise ValueError("steps must be +1 (creation) or -1 (annihilation)")
        level = 0
        for s in steps:
            level += s
            if level < 0:
                raise ValueError("the excitation level dipped below the vacuum")
        if level != 0:
            raise ValueError("the path must return to the vacuum")

    @property
    def m(self) -> int:
        return len(self.steps) // 2

    @property
    def levels(self) -> tuple[int, ...]:
        """Excitation level after each step (the final entry is 0)."""
        return tuple(accumulate(self.steps))

    @property
    def max_level(self) -> int:
        return max(self.levels)

    def touches_vacuum_midway(self) -> bool:
        return 0 in self.levels[:-1]


def enumerate_diagrams(m: int, cap: int) -> list[Diagram]:
    """All ballot paths of length 2m with maximum level <= cap.

    The list is ordered lexicographically on step sequences with -1
    before +1, which places the fully alternating path first and the
    single-peak path last. The count equals the Catalan number C_m
    whenever cap >= m, and 1 when cap == 1.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    out: list[Diagram] = []
    steps: list[int] = []

    def extend(level: int, used_up: int) -> None:
        pos = len(steps)
        if pos == 2 * m:
            out.append(Diagram(tuple(steps)))
            return
        remaining = 2 * m - pos
        # Down first keeps the ordering lexicographic (-1 < +1).
        if level > 0:
            steps.append(-1)
            extend(level - 1, used_up)
            steps.pop()
        if used_up < m and level < cap and remaining - 1 >= level + 1:
            steps.append(1)
            extend(level + 1, used_up + 1)
            steps.pop()

    extend(0, 0)
    return out


def diagram_label(d: Diagram) -> str:
    """Operator-string label with the latest operator leftmost."""
    ops = [_UP if s > 0 else _DOWN for s in reversed(d.steps)]
    return "⟨" + " ".join(ops) + "⟩"


def parse_label(text: str) -> Diagram:
    """Inverse of diagram_label (whitespace between operators optional)."""
    body = text.strip()
    if body.startswith("⟨"):
        body = body[1:]
    if body.endswith("⟩"):
        body = body[:-1]
    ops: list[int] = []
    for token in body.replace(_UP, " +1 ").replace(_DOWN, " -1 ").split():
        ops.append(int(token))
    return Diagram(tuple(reversed(ops)))


def ascii_profile(d: Diagram) -> str:
    """Multi-line mountain rendering of the level profile."""
    levels = d.levels
    top = max(levels)
    rows = []
    for h in range(top, 0, -1):
        prev = 0
        chars = []
        for s, lv in zip(d.steps, levels):
            if s > 0 and lv == h:
                chars.append("/")
            elif s < 0 and prev == h:
                chars.append("\\")
            else:
                chars.append(" ")
            prev = lv
        rows.append("".join(chars).rstrip())
    return "\n".join(rows)
