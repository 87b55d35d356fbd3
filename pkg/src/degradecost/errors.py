class ChannelError(ValueError):
    """Malformed channel, partition or label."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a configured size guard."""
