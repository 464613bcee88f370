"""Packet framing for the inter-node wire.

Wire layout (pre-FEC):

    magic[4] = "CAL1"
    version[1]  msg_type[1]  flags[1]  reserved[1]
    correlation_id[8] big-endian
    payload_len[4] big-endian
    payload[payload_len]
    crc32[4] big-endian, over version..payload (IEEE, reflected,
                                               init/xorout 0xFFFFFFFF)

With FEC enabled everything after the magic is cut into k-byte blocks
(the last zero-padded), each extended with nsym Reed-Solomon parity bytes
over GF(256)/0x11D.  The magic itself is never coded: it is the sync
pattern the receiver scans for.  After any unrecoverable frame the scanner
skips a single byte and rescans, so a corrupted length field can never
desynchronize the stream permanently.
"""

from __future__ import annotations

import enum
import struct
import zlib
from dataclasses import dataclass

from .rs_backend import RSDecodeFailure, get_codec

MAGIC = b"CAL1"
VERSION = 1
MAX_PAYLOAD = 1_048_576
HEADER_LEN = 16  # post-magic fixed header
FLAG_FEC = 0x01


class MsgType(enum.IntEnum):
    SENSE_FORWARD = 0x01
    SEALED_ENVELOPE = 0x02
    KEY_ANNOUNCE = 0x03
    QUERY_REQUEST = 0x04
    QUERY_RESPONSE = 0x05
    HEARTBEAT = 0x06


@dataclass(frozen=True)
class CallosumPacket:
    msg_type: MsgType
    correlation_id: int
    payload: bytes
    version: int = VERSION

    def __post_init__(self):
        if self.version != VERSION:
            raise ValueError("unsupported packet version %r" % self.version)
        if not 0 <= self.correlation_id < 2**64:
            raise ValueError("correlation_id must fit in 64 bits")
        if len(self.payload) > MAX_PAYLOAD:
            raise PayloadTooLarge("payload of %d bytes exceeds %d"
                                  % (len(self.payload), MAX_PAYLOAD))


@dataclass(frozen=True)
class FecConfig:
    enabled: bool = False
    data_len: int = 223
    parity_len: int = 32

    def __post_init__(self):
        if self.data_len < 1 or self.parity_len < 2:
            raise ValueError("need data_len >= 1 and parity_len >= 2")
        if self.data_len + self.parity_len > 255:
            raise ValueError("codeword exceeds GF(256) block size")


class PayloadTooLarge(Exception):
    pass


class FrameError(Exception):
    """Base for per-frame decode failures yielded by decode_stream."""


class CrcMismatch(FrameError):
    pass


class FecDecodeFailure(FrameError):
    pass


class BadVersion(FrameError):
    pass


class UnknownMsgType(FrameError):
    pass


class Truncated(FrameError):
    pass


def crc32(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


def encode_frame(packet: CallosumPacket, fec: FecConfig = FecConfig()) -> bytes:
    """Serialize one packet to wire bytes."""
    flags = FLAG_FEC if fec.enabled else 0
    header = struct.pack(">BBBBQI", packet.version, int(packet.msg_type),
                         flags, 0, packet.correlation_id, len(packet.payload))
    body = header + packet.payload
    body += struct.pack(">I", crc32(body))
    if not fec.enabled:
        return MAGIC + body
    codec = get_codec(fec.parity_len)
    k = fec.data_len
    out = [MAGIC]
    for i in range(0, len(body), k):
        block = body[i:i + k]
        if len(block) < k:
            block = block + bytes(k - len(block))
        out.append(codec.encode(block))
    return b"".join(out)


class Deframer:
    """Incremental frame scanner: feed() wire bytes, iterate packets and
    FrameErrors as complete frames become decodable."""

    def __init__(self, fec: FecConfig = FecConfig()):
        self.fec = fec
        self._buf = bytearray()

    def feed(self, data: bytes):
        """Append bytes; yields CallosumPacket | FrameError instances."""
        self._buf.extend(data)
        yield from self._scan(final=False)

    def flush(self):
        """Signal end of stream; yields Truncated for a dangling partial frame."""
        yield from self._scan(final=True)
        if self._buf and MAGIC in bytes(self._buf):
            yield Truncated("stream ended inside a frame")
        self._buf.clear()

    def _scan(self, final):
        while True:
            idx = bytes(self._buf).find(MAGIC)
            if idx < 0:
                # keep a possible magic prefix at the tail
                if len(self._buf) > 3:
                    del self._buf[:len(self._buf) - 3]
                return
            if idx:
                del self._buf[:idx]
            result, consumed = self._try_frame(bytes(self._buf))
            if consumed == 0:  # incomplete
                if not final:
                    return
                return  # flush() reports Truncated once, after scanning
            del self._buf[:consumed]
            if result is not None:
                yield result

    def _try_frame(self, buf):
        """Attempt to decode the frame starting at buf[0] (magic-aligned).

        Returns (packet | FrameError | None, bytes_consumed); consumed == 0
        means more input is needed.  On failure, one byte is consumed so
        the scan restarts just past the magic.
        """
        if self.fec.enabled:
            return self._try_frame_fec(buf)
        if len(buf) < 4 + HEADER_LEN:
            return None, 0
        header = buf[4:4 + HEADER_LEN]
        version, msg_code, flags, _rsvd, corr_id, plen = struct.unpack(">BBBBQI", header)
        if plen > MAX_PAYLOAD:
            return CrcMismatch("implausible length field"), 1
        total = 4 + HEADER_LEN + plen + 4
        if len(buf) < total:
            return None, 0
        body = buf[4:total - 4]
        (crc_recv,) = struct.unpack(">I", buf[total - 4:total])
        if crc32(body) != crc_recv:
            return CrcMismatch("crc 0x%08X != 0x%08X" % (crc32(body), crc_recv)), 1
        return self._finish(version, msg_code, corr_id, body[HEADER_LEN:], total)

    def _try_frame_fec(self, buf):
        codec = get_codec(self.fec.parity_len)
        k = self.fec.data_len
        n = k + self.fec.parity_len
        decoded = bytearray()
        pos = 4
        # decode blocks until the fixed header is available
        while len(decoded) < HEADER_LEN:
            if len(buf) < pos + n:
                return None, 0
            try:
                decoded.extend(codec.decode(buf[pos:pos + n]))
            except RSDecodeFailure as exc:
                return FecDecodeFailure(str(exc)), 1
            pos += n
        version, msg_code, flags, _rsvd, corr_id, plen = struct.unpack(
            ">BBBBQI", bytes(decoded[:HEADER_LEN]))
        if plen > MAX_PAYLOAD:
            return FecDecodeFailure("implausible length field"), 1
        body_len = HEADER_LEN + plen + 4
        nblocks = (body_len + k - 1) // k
        total = 4 + nblocks * n
        if len(buf) < total:
            return None, 0
        while pos < total:
            try:
                decoded.extend(codec.decode(buf[pos:pos + n]))
            except RSDecodeFailure as exc:
                return FecDecodeFailure(str(exc)), 1
            pos += n
        body = bytes(decoded[:body_len])
        (crc_recv,) = struct.unpack(">I", body[-4:])
        if crc32(body[:-4]) != crc_recv:
            return CrcMismatch("post-FEC crc mismatch"), 1
        return self._finish(version, msg_code, corr_id, body[HEADER_LEN:-4], total)

    @staticmethod
    def _finish(version, msg_code, corr_id, payload, total):
        if version != VERSION:
            return BadVersion("frame version %d" % version), 1
        try:
            msg_type = MsgType(msg_code)
        except ValueError:
            return UnknownMsgType("message code 0x%02X" % msg_code), 1
        return CallosumPacket(msg_type=msg_type, correlation_id=corr_id,
                              payload=payload), total


def decode_stream(data: bytes, fec: FecConfig = FecConfig()):
    """Decode a complete byte stream; yields packets and FrameErrors in
    stream order."""
    deframer = Deframer(fec)
    yield from deframer.feed(data)
    yield from deframer.flush()
