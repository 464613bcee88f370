"""Inter-node packet protocol: framing, CRC, optional FEC, channel, routing."""

from .channel import (
    ChannelClosed,
    ChannelMode,
    Direction,
    DirectionViolation,
    SimulatedChannel,
    channel_send,
    simulate_channel,
)
from .framing import (
    MAGIC,
    MAX_PAYLOAD,
    BadVersion,
    CallosumPacket,
    CrcMismatch,
    Deframer,
    FecConfig,
    FecDecodeFailure,
    FrameError,
    MsgType,
    PayloadTooLarge,
    Truncated,
    UnknownMsgType,
    crc32,
    decode_stream,
    encode_frame,
)
from .router import NoHandlerRegistered, Router, route
from .rs_backend import BACKEND as RS_BACKEND
from .rs_backend import RSDecodeFailure, get_codec

__all__ = [
    "BadVersion", "CallosumPacket", "ChannelClosed", "ChannelMode",
    "CrcMismatch", "Deframer", "Direction", "DirectionViolation", "FecConfig",
    "FecDecodeFailure", "FrameError", "MAGIC", "MAX_PAYLOAD", "MsgType",
    "NoHandlerRegistered", "PayloadTooLarge", "RSDecodeFailure", "RS_BACKEND",
    "Router", "SimulatedChannel", "Truncated", "UnknownMsgType", "channel_send",
    "crc32", "decode_stream", "encode_frame", "get_codec", "route",
    "simulate_channel",
]


def rs_encode(block: bytes, nsym: int = 32) -> bytes:
    """Systematic Reed-Solomon encode over GF(256)."""
    return get_codec(nsym).encode(block)


def rs_decode(codeword: bytes, nsym: int = 32) -> bytes:
    """Correct up to nsym//2 byte errors and return the data portion."""
    return get_codec(nsym).decode(codeword)
