"""Predecessor-set algebra for block connection schemes.

A block is a sequence of composite layers numbered 1..L. Which earlier
layers feed layer ``n`` is decided by a :class:`ConnectionScheme`:

* ``DENSE``   : every earlier layer feeds layer ``n``.
* ``SHORT1``  : parity rule. Even layers read every earlier odd layer;
  odd layers read layer 1 plus every earlier even layer. Roughly halves
  the edge count of ``DENSE`` while keeping every layer reachable.
* ``SHORT2``  : offset rule. Even layers read the layers ``2**i - 1``
  positions behind them (offsets 1, 3, 7, 15, ...); odd layers read only
  their immediate predecessor. Edge count grows as L log L.

Layer indices are 1-based within a block. The block input tensor is
routed separately by the network assembler and never appears in a
predecessor set, so layer 1 always has an empty set here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "ConnectionScheme",
    "PredecessorSet",
    "predecessors",
    "connection_count",
]


class ConnectionScheme(enum.IntEnum):
    """Block wiring rules, ordered by edge density.

    The integer values sort the schemes from sparsest to densest, so
    ``SHORT2 < SHORT1 < DENSE`` holds and comparisons read naturally in
    monotonicity checks (params, compute, and memory all grow with
    density at a fixed depth).
    """

    SHORT2 = 1
    SHORT1 = 2
    DENSE = 3

    @property
    def token(self) -> str:
        """Lower-case name used in documents and on the command line."""
        return self.name.lower()

    @classmethod
    def from_token(cls, token: str) -> "ConnectionScheme":
        """Parse a scheme from its lower-case token.

        Raises:
            ValueError: if ``token`` names no scheme.
        """
        try:
            return cls[token.strip().upper()]
        except KeyError:
            valid = ", ".join(s.token for s in cls)
            raise ValueError(
                f"unknown connection scheme {token!r}; expected one of: {valid}"
            ) from None


@dataclass(frozen=True)
class PredecessorSet:
    """The within-block sources feeding one layer.

    Attributes:
        layer: 1-based index of the receiving layer.
        predecessors: strictly ascending tuple of 1-based layer indices,
            each smaller than ``layer``. Empty for layer 1 under every
            scheme, because the block input is routed separately.
    """

    layer: int
    predecessors: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.layer < 1:
            raise ValueError(f"layer index must be >= 1, got {self.layer}")
        seen = -1
        for p in self.predecessors:
            if not 1 <= p < self.layer:
                raise ValueError(
                    f"predecessor {p} out of range for layer {self.layer}"
                )
            if p <= seen:
                raise ValueError("predecessors must be strictly ascending")
            seen = p

    def __len__(self) -> int:
        return len(self.predecessors)


def predecessors(scheme: ConnectionScheme, n: int) -> PredecessorSet:
    """Compute the predecessor set of layer ``n`` under ``scheme``.

    Args:
        scheme: wiring rule to apply.
        n: 1-based layer index within its block.

    Returns:
        PredecessorSet for layer ``n``. Layer 1 gets an empty set.

    Raises:
        ValueError: if ``n`` is not a positive integer.

    Examples::

        >>> predecessors(ConnectionScheme.SHORT1, 8).predecessors
        (1, 3, 5, 7)
        >>> predecessors(ConnectionScheme.SHORT2, 8).predecessors
        (1, 5, 7)
    """
    if n < 1:
        raise ValueError(f"layer index must be >= 1, got {n}")
    preds: tuple[int, ...]
    if scheme is ConnectionScheme.DENSE:
        preds = tuple(range(1, n))
    elif scheme is ConnectionScheme.SHORT1:
        if n == 1:
            preds = ()
        elif n % 2 == 0:
            preds = tuple(m for m in range(1, n, 2))
        else:
            # layer 1 is odd, so the union {1} | evens stays sorted.
            preds = (1,) + tuple(m for m in range(2, n, 2))
    elif scheme is ConnectionScheme.SHORT2:
        if n == 1:
            preds = ()
        elif n % 2 == 1:
            preds = (n - 1,)
        else:
            offsets = []
            i = 1
            while (1 << i) - 1 < n:
                offsets.append(n - ((1 << i) - 1))
                i += 1
            preds = tuple(sorted(offsets))
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unhandled scheme {scheme!r}")
    return PredecessorSet(layer=n, predecessors=preds)


def connection_count(scheme: ConnectionScheme, num_layers: int) -> int:
    """Total layer-to-layer edges inside a block of ``num_layers`` layers.

    Counts only within-block edges; the single block-input edge into
    layer 1 is excluded. For ``DENSE`` this is the complete-DAG count
    ``num_layers * (num_layers - 1) / 2``.

    Raises:
        ValueError: if ``num_layers`` is not a positive integer.
    """
    if num_layers < 1:
        raise ValueError(f"num_layers must be >= 1, got {num_layers}")
    return sum(
        len(predecessors(scheme, n)) for n in range(1, num_layers + 1)
    )
