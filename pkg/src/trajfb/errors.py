"""Exception types raised across the package."""


class TrajFbError(Exception):
    pass


class NonStochasticRow(TrajFbError, ValueError):
    def __init__(self, s: int, a: int, total: float):
        self.s, self.a, self.total = s, a, total
        super().__init__(f"transition row ({s}, {a}) sums to {total!r}")


class RewardOutOfRange(TrajFbError, ValueError):
    def __init__(self, s: int, a: int, value: float):
        self.s, self.a, self.value = s, a, value
        super().__init__(f"mean reward at ({s}, {a}) is {value!r}, outside [0, 1]")


class DimensionMismatch(TrajFbError, ValueError):
    pass


class InvalidLambda(TrajFbError, ValueError):
    pass


class InvalidDelta(TrajFbError, ValueError):
    pass


class InvalidK(TrajFbError, ValueError):
    pass


class FactorizationFailure(TrajFbError, ArithmeticError):
    pass


class EnumerationTooLarge(TrajFbError):
    def __init__(self, count: int, cap: int, agent: str | None = None):
        self.count, self.cap, self.agent = count, cap, agent
        who = f"agent {agent!r}: " if agent else ""
        super().__init__(f"{who}{count} policies exceed enumeration cap {cap}")


class TooLarge(TrajFbError):
    pass


class StaleFeedback(TrajFbError):
    pass


class ConfigError(TrajFbError, ValueError):
    pass


class InvalidSpec(ConfigError):
    pass


class EmptyInput(TrajFbError, ValueError):
    pass
