"""Three-valued certified verdicts and self-contained refutation witnesses.

Every membership query in the package answers CertifiedYes with a
certificate, CertifiedNo with a witness, or Unknown with a reason.  The
tool never guesses: Unknown is a first-class outcome.  Witnesses carry
enough exact data that `verify_witness` can reproduce the refutation from
the witness alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CertifiedYes:
    certificate: tuple = ()

    status = "certified_yes"

    def to_json(self):
        return {"status": self.status, "certificate": [_j(c) for c in self.certificate]}


@dataclass(frozen=True)
class CertifiedNo:
    witness: object = None

    status = "certified_no"

    def to_json(self):
        return {"status": self.status, "witness": _j(self.witness)}


@dataclass(frozen=True)
class Unknown:
    reason: str = ""

    status = "unknown"

    def to_json(self):
        return {"status": self.status, "reason": self.reason}


Verdict = "CertifiedYes | CertifiedNo | Unknown"


def is_yes(v) -> bool:
    return isinstance(v, CertifiedYes)


def is_no(v) -> bool:
    return isinstance(v, CertifiedNo)


def is_unknown(v) -> bool:
    return isinstance(v, Unknown)


def _j(x):
    if x is None or isinstance(x, (str, int, float, bool)):
        return x
    if isinstance(x, (list, tuple)):
        return [_j(v) for v in x]
    if isinstance(x, dict):
        return {k: _j(v) for k, v in x.items()}
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


# ---------------------------------------------------------------------------
# Witness kinds


@dataclass(frozen=True)
class CompositionNotSmooth:
    """A generator composition failed smoothness certification."""

    function_text: str
    plot_label: str
    smoothness: object  # a CertifiedNotCk record

    def to_json(self):
        return {
            "kind": "composition_not_smooth",
            "function": self.function_text,
            "plot": self.plot_label,
            "evidence": _j(self.smoothness),
        }


@dataclass(frozen=True)
class RankObstruction:
    """A sampled point where the differential has rank >= 2, refuting
    membership in any curve-generated plot family."""

    plot_label: str
    point: tuple
    rank: int
    jacobian: tuple = ()
    exact: bool = True

    def to_json(self):
        return {
            "kind": "rank_obstruction",
            "plot": self.plot_label,
            "point": [_j(p) for p in self.point],
            "rank": self.rank,
            "jacobian": [[_j(x) for x in row] for row in self.jacobian],
            "exact": self.exact,
        }


@dataclass(frozen=True)
class NoContinuousLift:
    """A forced branch assignment that jumps, so no continuous local lift."""

    plot_label: str
    point: tuple
    monodromy: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "kind": "no_continuous_lift",
            "plot": self.plot_label,
            "point": [_j(p) for p in self.point],
            "monodromy": _j(self.monodromy),
        }


@dataclass(frozen=True)
class NotLocallyConstant:
    """A continuous candidate with two distinct values into a totally
    disconnected carrier; the intermediate value theorem refutes it."""

    plot_label: str
    interval: tuple
    values: tuple

    def to_json(self):
        return {
            "kind": "not_locally_constant",
            "plot": self.plot_label,
            "interval": [_j(x) for x in self.interval],
            "values": [_j(v) for v in self.values],
        }


@dataclass(frozen=True)
class TopologyObstruction:
    """An exact arithmetic obstruction, e.g. a jump value outside the
    lattice Z + alpha*Z that any continuous lift would need to realize."""

    description: str
    data: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "kind": "topology_obstruction",
            "description": self.description,
            "data": _j(self.data),
        }


@dataclass(frozen=True)
class JetObstruction:
    """An exactly inconsistent linear system for extension jets: the branch
    derivative constraints at a junction admit no common solution."""

    description: str
    matrix: tuple
    rhs: tuple
    order: int

    def to_json(self):
        return {
            "kind": "jet_obstruction",
            "description": self.description,
            "matrix": [[_j(x) for x in row] for row in self.matrix],
            "rhs": [_j(x) for x in self.rhs],
            "order": self.order,
        }


@dataclass(frozen=True)
class ValueJump:
    """A carrier point where one-sided limits of a candidate function differ,
    so no continuous (hence no smooth) local extension exists."""

    function_text: str
    point: object
    left: object
    right: object

    def to_json(self):
        return {
            "kind": "value_jump",
            "function": self.function_text,
            "point": _j(self.point),
            "left": _j(self.left),
            "right": _j(self.right),
        }
