"""Inter-node byte channel with software-enforced directionality.

The simulated channel stands in for the one-way serial link between the
two nodes.  In Diode mode the private-to-public direction refuses every
write before a single byte reaches the wire; per-direction byte counters
make that property checkable from the outside.  An optional error model
(per-byte corruption, per-message drop) exercises the FEC path and is
fully deterministic for a given seed.
"""

from __future__ import annotations

import enum
import random
import threading


class ChannelMode(enum.Enum):
    DIODE = "diode"
    DUPLEX = "duplex"


class Direction(enum.Enum):
    PUBLIC_TO_PRIVATE = "public_to_private"
    PRIVATE_TO_PUBLIC = "private_to_public"


class DirectionViolation(Exception):
    pass


class ChannelClosed(Exception):
    pass


class SimulatedChannel:
    def __init__(self, mode=ChannelMode.DUPLEX, corrupt_prob=0.0,
                 drop_prob=0.0, seed=0):
        if not 0.0 <= corrupt_prob <= 1.0 or not 0.0 <= drop_prob <= 1.0:
            raise ValueError("probabilities must be in [0, 1]")
        self.mode = mode
        self.corrupt_prob = corrupt_prob
        self.drop_prob = drop_prob
        self._rng = random.Random(seed)
        self._queues = {d: bytearray() for d in Direction}
        self._wire_bytes = {d: 0 for d in Direction}
        self._closed = False
        self._lock = threading.Lock()

    def set_mode(self, mode: ChannelMode):
        with self._lock:
            self.mode = mode

    def wire_bytes(self, direction: Direction) -> int:
        """Total bytes that have ever crossed the wire in this direction."""
        return self._wire_bytes[direction]

    def send(self, direction: Direction, data: bytes) -> int:
        """Write bytes to the wire; returns the number delivered (0 when the
        error model dropped the message)."""
        with self._lock:
            if self._closed:
                raise ChannelClosed("channel is closed")
            if (self.mode is ChannelMode.DIODE
                    and direction is Direction.PRIVATE_TO_PUBLIC):
                raise DirectionViolation(
                    "diode mode forbids private-to-public transmission")
            if self.drop_prob and self._rng.random() < self.drop_prob:
                return 0
            payload = self._apply_noise(data)
            self._queues[direction].extend(payload)
            self._wire_bytes[direction] += len(payload)
            return len(payload)

    def receive(self, direction: Direction) -> bytes:
        """Drain everything currently queued for this direction."""
        with self._lock:
            if self._closed:
                raise ChannelClosed("channel is closed")
            data = bytes(self._queues[direction])
            self._queues[direction].clear()
            return data

    def close(self):
        with self._lock:
            self._closed = True

    def _apply_noise(self, data: bytes) -> bytes:
        if not self.corrupt_prob:
            return bytes(data)
        out = bytearray(data)
        p = self.corrupt_prob
        rng = self._rng
        for i in range(len(out)):
            if rng.random() < p:
                out[i] ^= rng.randrange(1, 256)
        return bytes(out)


def simulate_channel(corrupt_prob=0.0, drop_prob=0.0, seed=0,
                     mode=ChannelMode.DUPLEX) -> SimulatedChannel:
    return SimulatedChannel(mode=mode, corrupt_prob=corrupt_prob,
                            drop_prob=drop_prob, seed=seed)


def channel_send(channel: SimulatedChannel, direction: Direction,
                 data: bytes) -> int:
    return channel.send(direction, data)
