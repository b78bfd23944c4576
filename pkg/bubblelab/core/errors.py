class BubblelabError(Exception):
    """Base exception"""
    pass


class NumericalError(BubblelabError):
    """
    Base exception for every failure raised by the numerical library.
    """
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(f"[{code}] {message}")

    def __reduce__(self):
        return (self.__class__, (self.code, self.message))


class FatalError(NumericalError):
    """
    An error in the request itself (bad parameters, unknown ids). Rerunning
    with the same input cannot succeed.
    """
    pass


class RecoverableError(NumericalError):
    """
    An error that may go away with a different initial guess, search box
    or grid.
    """
    pass


class RetriableError(NumericalError):
    """
    An error that can be resolved by retrying with a smaller step or a
    tighter tolerance.
    """
    pass


# ===== Error Codes =====

# Grid / radial core
CODE_GRID_MISMATCH = 100
CODE_NUMERICAL_DERIVATIVE = 101
CODE_PARAMETER_RANGE = 102

# Profiles
CODE_UNSUPPORTED_EQUIVARIANCE = 200
CODE_SOLVABILITY_VIOLATION = 201
CODE_UNKNOWN_PAIRING = 202

# Modulation ODE
CODE_STIFF_FAILURE = 300

# Ansatz / extractor
CODE_BUBBLES_NOT_SEPARATED = 400
CODE_OUT_OF_NEIGHBORHOOD = 401
CODE_NOT_NEAR_MANIFOLD = 402
CODE_INSUFFICIENT_DATA = 403

# Evolver
CODE_FIELD_BLOW_UP = 500

# Functionals
CODE_INVALID_INPUT = 600
CODE_EIGEN_SOLVER = 601

# Orchestration
CODE_UNKNOWN_EXPERIMENT = 900
CODE_CONFIG_PARSE = 901


# Error Code Categorization

# Errors in the request itself
FATAL_ERROR_CODES = {
    CODE_GRID_MISMATCH,
    CODE_PARAMETER_RANGE,
    CODE_UNSUPPORTED_EQUIVARIANCE,
    CODE_UNKNOWN_PAIRING,
    CODE_BUBBLES_NOT_SEPARATED,
    CODE_INVALID_INPUT,
    CODE_UNKNOWN_EXPERIMENT,
    CODE_CONFIG_PARSE,
}

# Errors that a new guess or grid may cure
RECOVERABLE_ERROR_CODES = {
    CODE_OUT_OF_NEIGHBORHOOD,
    CODE_NOT_NEAR_MANIFOLD,
    CODE_SOLVABILITY_VIOLATION,
    CODE_EIGEN_SOLVER,
}

# Errors that just need a smaller step
RETRIABLE_ERROR_CODES = {
    CODE_STIFF_FAILURE,
    CODE_NUMERICAL_DERIVATIVE,
    CODE_FIELD_BLOW_UP,
}


def error_from_code(code: int, message: str) -> NumericalError:
    """
    Create an exception for a library error code.

    Returns the appropriate exception type based on the code's category:
    - FatalError: the request cannot succeed as stated
    - RecoverableError: retry with another guess, box or grid
    - RetriableError: retry with a smaller step or tighter tolerance
    - NumericalError: everything else

    Args:
        code: One of the CODE_* constants
        message: Human-readable context

    Returns:
        An exception instance with the appropriate behavior type

    Example:
        >>> error = error_from_code(402, "Newton diverged")
        >>> isinstance(error, RecoverableError)
        True
        >>> error.code
        402
    """
    if code in FATAL_ERROR_CODES:
        return FatalError(code, message)
    elif code in RECOVERABLE_ERROR_CODES:
        return RecoverableError(code, message)
    elif code in RETRIABLE_ERROR_CODES:
        return RetriableError(code, message)
    else:
        return NumericalError(code, message)


def get_error_behavior(code: int) -> str:
    """
    Get the behavior type for an error code.

    Returns: "fatal", "recoverable", "retriable", or "normal"
    """
    if code in FATAL_ERROR_CODES:
        return "fatal"
    elif code in RECOVERABLE_ERROR_CODES:
        return "recoverable"
    elif code in RETRIABLE_ERROR_CODES:
        return "retriable"
    else:
        return "normal"
