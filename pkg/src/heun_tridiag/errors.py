"""Exception types shared across the package."""


class HeunTridiagError(Exception):
    """Base class; ``payload()`` is what the CLI prints as an error object."""

    code = "Error"

    def payload(self) -> dict:
        return {"error": self.code, "message": str(self)}


class NonSymmetrizable(HeunTridiagError):
    code = "NonSymmetrizable"

    def __init__(self, index: int, product):
        self.index = index
        self.product = product
        super().__init__(f"off-diagonal product at {index} is {product}, not positive")


class SpaceNotPreserved(HeunTridiagError):
    code = "SpaceNotPreserved"

    def __init__(self, index: int, degree: int):
        self.index = index
        self.degree = degree
        super().__init__(f"operator maps basis element {index} to degree {degree}, outside the span")


class ParameterPole(HeunTridiagError):
    code = "ParameterPole"

    def __init__(self, n: int, what: str = "recurrence"):
        self.n = n
        super().__init__(f"{what} denominator vanishes at n={n}")


class DegenerateTau(HeunTridiagError):
    code = "DegenerateTau"

    def __init__(self, tau1, tau2):
        super().__init__(f"tau2 = -tau1 ({tau2} = -{tau1}) gives a first-order operator")


class NotHeunShaped(HeunTridiagError):
    code = "NotHeunShaped"


class NotNormalizable(HeunTridiagError):
    code = "NotNormalizable"


class UnderdeterminedParameters(HeunTridiagError):
    code = "UnderdeterminedParameters"


class FitInconsistent(HeunTridiagError):
    code = "FitInconsistent"


class ConfigError(HeunTridiagError):
    code = "ConfigError"
