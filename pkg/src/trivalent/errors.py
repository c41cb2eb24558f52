"""Exception hierarchy.

Validation problems (bad input data) derive from :class:`ValidationError`,
numerical failures from :class:`SolverError`.  The CLI maps the two groups to
distinct exit codes.
"""

from __future__ import annotations


class TrivalentError(Exception):
    """Base class for all package errors."""


class ValidationError(TrivalentError):
    """Input does not describe a valid graph or surface."""


class NonTrivalent(ValidationError):
    def __init__(self, vertex: int, degree: int):
        super().__init__(f"vertex {vertex} has {degree} outgoing edges, expected 3")
        self.vertex = vertex
        self.degree = degree


class BadRotation(ValidationError):
    def __init__(self, vertex: int, message: str = "rotation does not list each outgoing edge once"):
        super().__init__(f"vertex {vertex}: {message}")
        self.vertex = vertex


class DegenerateVertex(ValidationError):
    def __init__(self, vertex: int, message: str = "edge vectors are collinear"):
        super().__init__(f"vertex {vertex}: {message}")
        self.vertex = vertex


class NonInjective(ValidationError):
    def __init__(self, a: int, b: int):
        super().__init__(f"vertices {a} and {b} have the same position")
        self.pair = (a, b)


class ZeroNormal(DegenerateVertex):
    def __init__(self, vertex: int):
        super().__init__(vertex, "area element vanishes, normal undefined")


class DegenerateTriangle(ValidationError):
    """det I of a triangle is not positive."""


class AllPairsSkipped(DegenerateVertex):
    def __init__(self, vertex: int):
        super().__init__(vertex, "all three edge pairs are degenerate")


class NonClosed(ValidationError):
    """Face tracing did not close up."""


class NotParallel(ValidationError):
    def __init__(self, deviation: float):
        super().__init__(f"normal differences are not tangent (deviation {deviation:.3e})")
        self.deviation = deviation


class DegenerateChirality(ValidationError):
    """Chiral index for which the tube or its closed form collapses."""


class NotHarmonic(ValidationError):
    def __init__(self, residual: float):
        super().__init__(f"harmonic residual {residual:.3e} exceeds tolerance")
        self.residual = residual


class ParseError(ValidationError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SolverError(TrivalentError):
    """A linear or nonlinear solve failed."""


class SingularSystem(SolverError):
    """The harmonic system is singular (typically a disconnected graph)."""


class GaugeConflict(SolverError):
    """Constraints or gauge pins contradict each other."""


class RankDeficient(SolverError):
    def __init__(self, nullity: int):
        super().__init__(f"system is underdetermined beyond gauge, nullity {nullity}")
        self.nullity = nullity


class HypothesisFailed(SolverError):
    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex}: reference normal derivatives are dependent")
        self.vertex = vertex
