"""Exception types. The CLI maps them onto its exit codes."""


class InputError(ValueError):
    """Malformed input data (bad symbol, unreadable file, bad config field)."""


class InfeasibleError(ValueError):
    """Parameters that cannot be honoured for the given sample (n too small, B too large)."""
