"""qsslab: quasi-separability classification and purification-protocol
search for small bipartite quantum states."""

from . import cli, config, entanglement, linalg, protocol, qss, search, states
from .errors import QsslabError

__all__ = [
    "cli",
    "config",
    "entanglement",
    "linalg",
    "protocol",
    "qss",
    "search",
    "states",
    "QsslabError",
]
