"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violated an operation's stated precondition."""


class CapabilityError(RuntimeError):
    """The inputs exceed the sizes this implementation is willing to enumerate."""


class RetryLimitError(RuntimeError):
    """A randomized search exhausted its retry budget."""


class ProtocolExecutionError(RuntimeError):
    """A protocol run could not be driven to completion."""


class TransportError(RuntimeError):
    """A channel failed below the protocol layer."""


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
