"""Node configuration: one `key = value` per line, `#` comments.

Keys use dotted names, e.g.:

    role = public
    data_dir = /var/lib/lifeserver/pub
    listen_address = 127.0.0.1:8080
    pairing_code = 1234abcd
    k_min = 5
    ls_retention = 0
    min_fee = 0
    channel.transport = inprocess
    channel.mode = duplex
    channel.fec.enabled = false
    channel.fec.data_len = 223
    channel.fec.parity_len = 32
    channel.corrupt_prob = 0
    channel.drop_prob = 0
    channel.seed = 0
    resolution.max_depth = 16
    resolution.max_docs = 64
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..callosum import ChannelMode, FecConfig
from ..vdp import ResolutionLimits


class ConfigError(Exception):
    pass


class MissingKey(ConfigError):
    pass


class BadValue(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


_PUBLIC_ONLY = {"listen_address", "pairing_code", "k_min", "ls_retention",
                "min_fee", "resolution.max_depth", "resolution.max_docs"}
_COMMON = {"role", "data_dir", "channel.transport", "channel.mode",
           "channel.fec.enabled", "channel.fec.data_len",
           "channel.fec.parity_len", "channel.corrupt_prob",
           "channel.drop_prob", "channel.seed", "channel.bind", "channel.peer"}
_ALL_KEYS = _PUBLIC_ONLY | _COMMON


@dataclass
class NodeConfig:
    role: str
    data_dir: str
    listen_address: str = "127.0.0.1:8080"
    pairing_code: str = ""
    k_min: int = 5
    ls_retention: float = 0.0
    min_fee: int = 0
    transport: str = "inprocess"
    mode: ChannelMode = ChannelMode.DUPLEX
    fec: FecConfig = field(default_factory=FecConfig)
    corrupt_prob: float = 0.0
    drop_prob: float = 0.0
    seed: int = 0
    channel_bind: str = ""
    channel_peer: str = ""
    limits: ResolutionLimits = field(default_factory=ResolutionLimits)


def _parse_bool(key, raw):
    if raw.lower() in ("true", "yes", "on", "1"):
        return True
    if raw.lower() in ("false", "no", "off", "0"):
        return False
    raise BadValue("%s: expected a boolean, got %r" % (key, raw))


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise BadValue("%s: expected an integer, got %r" % (key, raw))


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise BadValue("%s: expected a number, got %r" % (key, raw))


def parse_config(text: str) -> NodeConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadValue("line %d: expected 'key = value'" % lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise UnknownKey("line %d: unknown key %r" % (lineno, key))
        if key in raw:
            raise BadValue("line %d: duplicate key %r" % (lineno, key))
        raw[key] = value

    for required in ("role", "data_dir"):
        if required not in raw:
            raise MissingKey("missing required key %r" % required)
    role = raw["role"]
    if role not in ("public", "private"):
        raise BadValue("role: expected public or private, got %r" % role)
    if role == "private":
        for key in raw:
            if key in _PUBLIC_ONLY:
                raise UnknownKey("key %r is not valid for role=private" % key)

    cfg = NodeConfig(role=role, data_dir=raw["data_dir"])
    if "listen_address" in raw:
        addr = raw["listen_address"]
        if ":" not in addr:
            raise BadValue("listen_address: expected host:port")
        cfg.listen_address = addr
    if "pairing_code" in raw:
        cfg.pairing_code = raw["pairing_code"]
    if "k_min" in raw:
        cfg.k_min = _parse_int("k_min", raw["k_min"])
        if cfg.k_min < 1:
            raise BadValue("k_min must be >= 1")
    if "ls_retention" in raw:
        cfg.ls_retention = _parse_float("ls_retention", raw["ls_retention"])
        if not 0 <= cfg.ls_retention <= 1:
            raise BadValue("ls_retention must be in [0, 1]")
    if "min_fee" in raw:
        cfg.min_fee = _parse_int("min_fee", raw["min_fee"])
    if "channel.transport" in raw:
        if raw["channel.transport"] not in ("inprocess", "tcp-sim"):
            raise BadValue("channel.transport: expected inprocess or tcp-sim")
        cfg.transport = raw["channel.transport"]
    if "channel.mode" in raw:
        mode = raw["channel.mode"].lower()
        if mode not in ("diode", "duplex"):
            raise BadValue("channel.mode: expected diode or duplex")
        cfg.mode = ChannelMode(mode)
    fec_enabled = _parse_bool("channel.fec.enabled", raw.get("channel.fec.enabled", "false"))
    data_len = _parse_int("channel.fec.data_len", raw.get("channel.fec.data_len", "223"))
    parity_len = _parse_int("channel.fec.parity_len", raw.get("channel.fec.parity_len", "32"))
    try:
        cfg.fec = FecConfig(enabled=fec_enabled, data_len=data_len, parity_len=parity_len)
    except ValueError as exc:
        raise BadValue("channel.fec: %s" % exc)
    if "channel.corrupt_prob" in raw:
        cfg.corrupt_prob = _parse_float("channel.corrupt_prob", raw["channel.corrupt_prob"])
    if "channel.drop_prob" in raw:
        cfg.drop_prob = _parse_float("channel.drop_prob", raw["channel.drop_prob"])
    if "channel.seed" in raw:
        cfg.seed = _parse_int("channel.seed", raw["channel.seed"])
    cfg.channel_bind = raw.get("channel.bind", "")
    cfg.channel_peer = raw.get("channel.peer", "")
    max_depth = _parse_int("resolution.max_depth", raw.get("resolution.max_depth", "16"))
    max_docs = _parse_int("resolution.max_docs", raw.get("resolution.max_docs", "64"))
    try:
        cfg.limits = ResolutionLimits(max_depth=max_depth, max_documents=max_docs)
    except ValueError as exc:
        raise BadValue("resolution limits: %s" % exc)
    return cfg


def load_config(path: str) -> NodeConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc))
