"""Exception hierarchy.

Two broad families so the CLI can map failures to exit codes:
``ValidationError`` (bad inputs, bad config, bad graph -> exit 1) and
``ComputationError`` (numeric failure during estimation -> exit 2).
"""


class CausalPipeError(Exception):
    """Base class for all package errors."""


class ValidationError(CausalPipeError):
    """Invalid user input: files, config, graph structure, column schema."""


class ComputationError(CausalPipeError):
    """Numeric failure while estimating: singular systems, positivity, divergence."""


class DagSyntaxError(ValidationError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DagCycleError(ValidationError):
    def __init__(self, cycle):
        super().__init__("graph contains a cycle: " + " -> ".join(cycle))
        self.cycle = tuple(cycle)


class DagStructureError(ValidationError):
    """Duplicate nodes or edges, self loops, undeclared edge endpoints."""


class UnknownNodeError(ValidationError):
    def __init__(self, node):
        super().__init__(f"unknown node {node!r}")
        self.node = node


class SchemaError(ValidationError):
    """CSV does not match the declared column schema."""


class IdentificationError(ValidationError):
    """The requested adjustment set fails the back-door criterion."""


class ConfigError(ValidationError):
    """Pipeline configuration is malformed or internally inconsistent."""


class SingularDesignError(ComputationError):
    """Design or information matrix is rank deficient."""


class PositivityError(ComputationError):
    def __init__(self, rows):
        rows = list(rows)
        shown = ", ".join(str(r) for r in rows[:10])
        more = "" if len(rows) <= 10 else f" (+{len(rows) - 10} more)"
        super().__init__(f"propensity score too close to 0 or 1 for rows: {shown}{more}")
        self.rows = rows


class BootstrapError(ComputationError):
    """Too many bootstrap replicates failed to produce an estimate."""


class StageError(CausalPipeError):
    """Wraps an error with the pipeline stage where it occurred."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
