from ..reports import CheckResult, RunReport


class ReproductionCheck:
    """
    Base class for all reproduction checks.
    """

    name = "check"

    def __init__(self, **kwargs):
        self.other_kwargs = kwargs

    def check_condition(self, context) -> bool:
        """
        Check if the check applies to the given context.
        Can be overridden by subclasses. Default implementation always returns True.
        """
        return True

    def run(self, context, report: RunReport) -> CheckResult:
        """
        Run the check, record it on the report and return the result.
        Should be implemented by subclasses.
        """
        raise NotImplementedError("Subclasses must implement this method.")

    def on_complete(self, result: CheckResult, report: RunReport):
        """
        Hook called after the check ran (regardless of success or failure), before
        on_success or on_failure.
        """
        pass

    def on_success(self, result: CheckResult, report: RunReport):
        pass

    def on_failure(self, result: CheckResult, report: RunReport, reason: str):
        """
        Hook called when the check fails. Default implementation keeps the reason in
        the report warnings.
        """
        report.warnings.append(f"{result.name}: {reason or 'failed'}")
