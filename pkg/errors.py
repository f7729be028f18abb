class CSwitchError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class DataError(CSwitchError):
    """Input data is malformed or inconsistent."""


class ClosureError(DataError):
    """Training data uses words outside the closed vocabulary."""

    def __init__(self, offenders):
        self.offenders = sorted(offenders)
        shown = ', '.join(self.offenders[:20])
        more = '' if len(self.offenders) <= 20 else f' (+{len(self.offenders) - 20} more)'
        super().__init__(f'vocabulary closure violated by {len(self.offenders)} word(s): {shown}{more}')


class LoopStageError(CSwitchError):
    """A stage of the self-training loop failed."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f'stage {stage!r} failed: {cause}')
