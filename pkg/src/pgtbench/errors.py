"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed or inconsistent input data (files, scenarios, logs).

    The CLI maps this to exit code 2; unexpected exceptions map to 3.
    """
