"""Typed dispatch of decoded packets to per-message-type handlers."""

from __future__ import annotations

from .framing import CallosumPacket, MsgType


class NoHandlerRegistered(Exception):
    pass


class Router:
    def __init__(self):
        self._handlers = {}

    def register(self, msg_type: MsgType, handler):
        self._handlers[msg_type] = handler

    def route(self, packet: CallosumPacket):
        handler = self._handlers.get(packet.msg_type)
        if handler is None:
            raise NoHandlerRegistered("no handler for %s" % packet.msg_type.name)
        return handler(packet)


def route(packet: CallosumPacket, registry: dict):
    """Dispatch through a plain msg_type -> handler mapping."""
    handler = registry.get(packet.msg_type)
    if handler is None:
        raise NoHandlerRegistered("no handler for %s" % packet.msg_type.name)
    return handler(packet)
