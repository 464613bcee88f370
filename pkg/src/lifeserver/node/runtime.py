"""Node wiring: the private node, the two-node deployment, provisioning.

The two nodes share nothing but the channel.  Provisioning runs with the
channel in Duplex so the private node can announce its public key; the
operator then locks the channel into Diode mode, after which no code path
can move a byte from the private side to the public side.
"""

from __future__ import annotations

import json
import os

from ..callosum import (
    CallosumPacket,
    ChannelMode,
    Deframer,
    Direction,
    FecConfig,
    MsgType,
    Router,
    SimulatedChannel,
    encode_frame,
)
from ..datastore import DerivedStore, Ledger, RecordStore, SenseRecord
from ..gateway import PublicNodeCore, create_app
from ..mind import MindEngine, extract_features
from ..sealed import AuthError, KeyPair, UnknownKeyId, generate_keypair
from .config import NodeConfig

MODE_FILE = "channel_mode"
ANNOUNCED_KEY_FILE = "announced_key"
KEYPAIR_FILE = "keypair.bin"


class ProvisioningError(Exception):
    pass


class PrivateNode:
    """Owns the key material, the sealed store, and feature extraction."""

    def __init__(self, data_dir, channel=None, fec: FecConfig = FecConfig()):
        os.makedirs(data_dir, exist_ok=True)
        self.data_dir = data_dir
        self.channel = channel
        self.fec = fec
        self.store = RecordStore(os.path.join(data_dir, "sense.priv.ndjson"))
        self.derived = DerivedStore(os.path.join(data_dir, "derived.ndjson"))
        self.keypair = self._load_or_create_keypair()
        self._deframer = Deframer(fec)
        self.last_heartbeat = None
        self.router = Router()
        self.router.register(MsgType.SENSE_FORWARD, self._on_sense_forward)
        self.router.register(MsgType.SEALED_ENVELOPE, self._on_sense_forward)
        self.router.register(MsgType.HEARTBEAT, self._on_heartbeat)

    def _load_or_create_keypair(self) -> KeyPair:
        path = os.path.join(self.data_dir, KEYPAIR_FILE)
        if os.path.exists(path):
            with open(path, "rb") as fh:
                blob = fh.read()
            key_id, public, private = blob[:16], blob[16:48], blob[48:80]
            return KeyPair(key_id=key_id, public_key=public, private_key=private)
        pair = generate_keypair()
        with open(path, "wb") as fh:
            fh.write(pair.key_id + pair.public_key + pair.private_key)
        os.chmod(path, 0o600)
        return pair

    def announce_key(self):
        """Send KeyAnnounce to the public node; Duplex provisioning only."""
        packet = CallosumPacket(
            msg_type=MsgType.KEY_ANNOUNCE, correlation_id=0,
            payload=self.keypair.key_id + self.keypair.public_key)
        self.channel.send(Direction.PRIVATE_TO_PUBLIC,
                          encode_frame(packet, self.fec))

    def process_incoming(self):
        """Drain and handle everything queued on the inbound direction."""
        data = self.channel.receive(Direction.PUBLIC_TO_PRIVATE)
        results = []
        for item in self._deframer.feed(data):
            if isinstance(item, CallosumPacket):
                results.append(self.router.route(item))
            else:
                results.append(item)  # FrameError, surfaced to the caller
        return results

    def _on_heartbeat(self, packet):
        from ..datastore import now_ms
        self.last_heartbeat = now_ms()
        return "heartbeat"

    def _on_sense_forward(self, packet):
        record = SenseRecord.from_json(json.loads(packet.payload.decode("utf-8")))
        self.store.append(record)
        if record.sealed_payload is None:
            return record.record_id
        try:
            features = extract_features(self.keypair.private_key,
                                        record.sealed_payload,
                                        record.record_id)
        except (AuthError, UnknownKeyId):
            return record.record_id  # stored, but not openable with our key
        for feature in features:
            self.derived.append(feature)
        return record.record_id


class Deployment:
    """Both nodes joined by the in-process channel; the desk-scale stand-in
    for the two physical machines."""

    def __init__(self, public_dir, private_dir, mode=ChannelMode.DUPLEX,
                 fec=FecConfig(), corrupt_prob=0.0, drop_prob=0.0, seed=0,
                 k_min=5, min_fee=0, ls_retention=0, pairing_code=None,
                 vdp_fetcher=None, share_derived=False):
        os.makedirs(public_dir, exist_ok=True)
        self.channel = SimulatedChannel(mode=mode, corrupt_prob=corrupt_prob,
                                        drop_prob=drop_prob, seed=seed)
        self.private = PrivateNode(private_dir, channel=self.channel, fec=fec)
        store = RecordStore(os.path.join(public_dir, "sense.pub.ndjson"))
        ledger = Ledger(os.path.join(public_dir, "ledger.ndjson"))
        engine = MindEngine(store,
                            derived_store=self.private.derived if share_derived else None,
                            k_min=k_min, min_fee=min_fee,
                            ls_retention=ls_retention)
        self.public = PublicNodeCore(store, engine, ledger,
                                     channel=self.channel, fec=fec,
                                     pairing_code=pairing_code,
                                     vdp_fetcher=vdp_fetcher)
        self.public_dir = public_dir
        self._pub_deframer = Deframer(fec)
        self._load_announced_key()

    def _load_announced_key(self):
        path = os.path.join(self.public_dir, ANNOUNCED_KEY_FILE)
        if os.path.exists(path):
            with open(path, "rb") as fh:
                self.public.announced_public_key = fh.read()

    def provision(self):
        """Duplex-only: private node announces its public key; the public
        node records it durably."""
        if self.channel.mode is not ChannelMode.DUPLEX:
            raise ProvisioningError(
                "provisioning requires Duplex mode; unlock first")
        self.private.announce_key()
        data = self.channel.receive(Direction.PRIVATE_TO_PUBLIC)
        announced = None
        for item in self._pub_deframer.feed(data):
            if isinstance(item, CallosumPacket) \
                    and item.msg_type is MsgType.KEY_ANNOUNCE:
                announced = item.payload[16:]  # key_id[16] then public key
        if announced is None:
            raise ProvisioningError("no KeyAnnounce received")
        self.public.announced_public_key = announced
        with open(os.path.join(self.public_dir, ANNOUNCED_KEY_FILE), "wb") as fh:
            fh.write(announced)
        return announced

    def lock(self):
        self.channel.set_mode(ChannelMode.DIODE)

    def unlock(self):
        self.channel.set_mode(ChannelMode.DUPLEX)

    def pump(self):
        """Deliver queued public-to-private traffic to the private node."""
        return self.private.process_incoming()

    def reverse_wire_bytes(self):
        return self.channel.wire_bytes(Direction.PRIVATE_TO_PUBLIC)

    def close(self):
        self.channel.close()
        self.public.store.close()
        self.public.ledger.close()
        self.private.store.close()
        self.private.derived.close()


def deployment_from_config(cfg: NodeConfig, private_dir=None,
                           vdp_fetcher=None) -> Deployment:
    """Build the in-process deployment for a public-role config; the private
    node's data_dir defaults to a sibling of the public one."""
    mode = _stored_mode(cfg.data_dir) or cfg.mode
    return Deployment(
        public_dir=cfg.data_dir,
        private_dir=private_dir or cfg.data_dir + ".private",
        mode=mode, fec=cfg.fec, corrupt_prob=cfg.corrupt_prob,
        drop_prob=cfg.drop_prob, seed=cfg.seed, k_min=cfg.k_min,
        min_fee=cfg.min_fee, ls_retention=cfg.ls_retention,
        pairing_code=cfg.pairing_code or None, vdp_fetcher=vdp_fetcher)


def _stored_mode(data_dir):
    path = os.path.join(data_dir, MODE_FILE)
    if os.path.exists(path):
        with open(path) as fh:
            return ChannelMode(fh.read().strip())
    return None


def store_mode(data_dir, mode: ChannelMode):
    os.makedirs(data_dir, exist_ok=True)
    with open(os.path.join(data_dir, MODE_FILE), "w") as fh:
        fh.write(mode.value)


def build_app(deployment: Deployment):
    return create_app(deployment.public)
