class DataError(ValueError):
    """Input data violates a precondition (bad file, negative weight, ...)."""
