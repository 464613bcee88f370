"""Seal-to-the-private-node encryption.

Hybrid construction: a fresh random content key encrypts the payload with
AES-256-GCM; the content key is wrapped to the recipient's X25519 public
key via an ephemeral Diffie-Hellman exchange and HKDF-SHA256.  Anyone
holding the public key can seal; only the private node can open, and any
single-bit modification of an envelope fails authentication.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

KEY_ID_LEN = 16
_HKDF_INFO = b"lifeserver sealed envelope v1"
_WRAP_NONCE = bytes(12)  # wrap key is single-use, fixed nonce is safe


class EntropyUnavailable(Exception):
    pass


class InvalidPublicKey(Exception):
    pass


class AuthError(Exception):
    pass


class UnknownKeyId(Exception):
    pass


def key_id_for(public_key: bytes) -> bytes:
    return hashlib.sha256(public_key).digest()[:KEY_ID_LEN]


@dataclass(frozen=True)
class KeyPair:
    key_id: bytes
    public_key: bytes
    private_key: bytes  # raw X25519 scalar; never leaves the private node


@dataclass(frozen=True)
class SealedEnvelope:
    key_id: bytes
    wrapped_key: bytes  # ephemeral public key + AES-GCM wrapped content key
    nonce: bytes
    ciphertext: bytes
    auth_tag: bytes

    def to_bytes(self) -> bytes:
        """Length-prefixed binary fields in declaration order."""
        out = bytearray()
        for field in (self.key_id, self.wrapped_key, self.nonce,
                      self.ciphertext, self.auth_tag):
            out.extend(struct.pack(">I", len(field)))
            out.extend(field)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SealedEnvelope":
        fields = []
        pos = 0
        for _ in range(5):
            if pos + 4 > len(data):
                raise ValueError("truncated envelope")
            (n,) = struct.unpack_from(">I", data, pos)
            pos += 4
            if pos + n > len(data):
                raise ValueError("truncated envelope")
            fields.append(bytes(data[pos:pos + n]))
            pos += n
        if pos != len(data):
            raise ValueError("trailing bytes after envelope")
        return cls(*fields)


def generate_keypair(entropy=os.urandom) -> KeyPair:
    try:
        seed = entropy(32)
    except Exception as exc:
        raise EntropyUnavailable(str(exc))
    if not isinstance(seed, bytes) or len(seed) != 32:
        raise EntropyUnavailable("entropy source returned %r" % type(seed))
    priv = X25519PrivateKey.from_private_bytes(seed)
    pub = priv.public_key().public_bytes_raw()
    return KeyPair(key_id=key_id_for(pub), public_key=pub,
                   private_key=priv.private_bytes_raw())


def _derive_wrap_key(shared: bytes, eph_pub: bytes, recipient_pub: bytes) -> bytes:
    return HKDF(algorithm=SHA256(), length=32, salt=None,
                info=_HKDF_INFO + eph_pub + recipient_pub).derive(shared)


def seal(public_key: bytes, plaintext: bytes) -> SealedEnvelope:
    try:
        recipient = X25519PublicKey.from_public_bytes(public_key)
    except Exception as exc:
        raise InvalidPublicKey(str(exc))
    kid = key_id_for(public_key)
    eph = X25519PrivateKey.generate()
    eph_pub = eph.public_key().public_bytes_raw()
    wrap_key = _derive_wrap_key(eph.exchange(recipient), eph_pub, public_key)
    content_key = os.urandom(32)
    wrapped = AESGCM(wrap_key).encrypt(_WRAP_NONCE, content_key, kid)
    nonce = os.urandom(12)
    sealed = AESGCM(content_key).encrypt(nonce, plaintext, kid)
    return SealedEnvelope(key_id=kid, wrapped_key=eph_pub + wrapped,
                          nonce=nonce, ciphertext=sealed[:-16],
                          auth_tag=sealed[-16:])


def open_envelope(private_key: bytes, envelope: SealedEnvelope) -> bytes:
    priv = X25519PrivateKey.from_private_bytes(private_key)
    my_pub = priv.public_key().public_bytes_raw()
    if envelope.key_id != key_id_for(my_pub):
        raise UnknownKeyId("envelope sealed to key %s" % envelope.key_id.hex())
    if len(envelope.wrapped_key) != 32 + 48:
        raise AuthError("malformed wrapped key")
    eph_pub, wrapped = envelope.wrapped_key[:32], envelope.wrapped_key[32:]
    try:
        shared = priv.exchange(X25519PublicKey.from_public_bytes(eph_pub))
        wrap_key = _derive_wrap_key(shared, eph_pub, my_pub)
        content_key = AESGCM(wrap_key).decrypt(_WRAP_NONCE, wrapped, envelope.key_id)
        return AESGCM(content_key).decrypt(
            envelope.nonce, envelope.ciphertext + envelope.auth_tag, envelope.key_id)
    except InvalidTag:
        raise AuthError("envelope failed authentication")
    except ValueError as exc:
        raise AuthError(str(exc))
