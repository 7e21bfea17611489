"""Exception types raised across the package."""


class PipeplanError(Exception):
    pass


class PipelineError(PipeplanError, ValueError):
    """Malformed pipeline, catalog or workload parameters."""


class InvalidConfigError(PipeplanError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"invalid configuration: {detail}")


class UnsatisfiableOperatorError(PipeplanError, ValueError):
    def __init__(self, operator_id):
        self.operator_id = operator_id
        super().__init__(f"unsatisfiable operator: {operator_id!r} is not supported by any image")


class InfeasibleBaselineError(PipeplanError, ValueError):
    pass


class InapplicableActionError(PipeplanError, ValueError):
    pass


class NoPlanError(PipeplanError):
    pass


class OracleTooLargeError(PipeplanError, ValueError):
    pass


class PlanParseError(PipeplanError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
