"""Public-node surface: explicit pairing, Sense ingestion, the Act device
registry with its pull-based command queue, and the Mind endpoints.

PublicNodeCore holds the behavior behind plain method calls with typed
exceptions; create_app() wraps it in the HTTP surface and maps exceptions
to status codes (400 schema/domain, 401 auth, 402 fees, 404 unknown ids,
409 pairing).
"""

from __future__ import annotations

import base64
import enum
import secrets
import threading
import uuid
from dataclasses import dataclass
from typing import Optional

from .callosum import (
    CallosumPacket,
    ChannelClosed,
    Direction,
    DirectionViolation,
    FecConfig,
    MsgType,
    encode_frame,
)
from .datastore import Privacy, SchemaViolation, SenseRecord, new_record_id, now_ms
from .mind import FeeTooLow, InsufficientData, MindQuery, ResolutionFailed
from .sealed import SealedEnvelope


class PairingRejected(Exception):
    pass


class Unauthenticated(Exception):
    pass


class ChannelDown(Exception):
    """Sealed forward could not be delivered now; the record is queued."""

    def __init__(self, record_id):
        self.record_id = record_id
        super().__init__("channel down, sealed record %s queued for retry" % record_id)


class UnknownDevice(Exception):
    pass


class UnknownControl(Exception):
    pass


class ValueOutOfDomain(Exception):
    pass


class UnknownQueryRef(Exception):
    pass


@dataclass(frozen=True)
class ClientCredential:
    client_id: str
    token: str  # >= 128 bits from the node's entropy source
    created_at: int
    revoked: bool = False


class ControlKind(enum.Enum):
    BOOLEAN = "boolean"
    RANGE = "range"
    ENUM = "enum"


@dataclass
class ControlSchema:
    name: str
    kind: ControlKind
    lo: Optional[int] = None
    hi: Optional[int] = None
    values: Optional[list] = None
    current_value: object = None

    def check(self, value):
        if self.kind is ControlKind.BOOLEAN:
            if not isinstance(value, bool):
                raise ValueOutOfDomain("%s expects a boolean" % self.name)
        elif self.kind is ControlKind.RANGE:
            if not isinstance(value, int) or isinstance(value, bool) \
                    or not (self.lo <= value <= self.hi):
                raise ValueOutOfDomain(
                    "%s expects an integer in [%d, %d]" % (self.name, self.lo, self.hi))
        else:
            if value not in self.values:
                raise ValueOutOfDomain("%s expects one of %r" % (self.name, self.values))


@dataclass
class DeviceDescriptor:
    device_id: str
    name: str
    controls: dict  # name -> ControlSchema


@dataclass
class ControlCommand:
    command_id: str
    device_id: str
    control: str
    value: object
    issued_at: int
    state: str = "pending"  # pending -> delivered

    def to_json(self):
        return {"command_id": self.command_id, "device_id": self.device_id,
                "control": self.control, "value": self.value,
                "issued_at": self.issued_at, "state": self.state}


def parse_control_schema(obj) -> ControlSchema:
    kind = ControlKind(obj["kind"])
    schema = ControlSchema(name=obj["name"], kind=kind,
                           lo=obj.get("lo"), hi=obj.get("hi"),
                           values=obj.get("values"),
                           current_value=obj.get("current_value"))
    if kind is ControlKind.RANGE and (schema.lo is None or schema.hi is None
                                      or schema.lo > schema.hi):
        raise SchemaViolation("range control %s needs lo <= hi" % schema.name)
    if kind is ControlKind.ENUM and not schema.values:
        raise SchemaViolation("enum control %s needs values" % schema.name)
    if schema.current_value is not None:
        schema.check(schema.current_value)
    return schema


class PublicNodeCore:
    def __init__(self, store, engine, ledger, channel=None,
                 fec: FecConfig = FecConfig(), pairing_code=None,
                 vdp_fetcher=None):
        self.store = store
        self.engine = engine
        self.ledger = ledger
        self.channel = channel
        self.fec = fec
        self.vdp_fetcher = vdp_fetcher
        self._pairing_code = pairing_code or secrets.token_hex(4)
        self._pairing_used = False
        self._credentials = {}  # token -> ClientCredential
        self._devices = {}
        self._queues = {}  # device_id -> [ControlCommand]
        self._lock = threading.Lock()
        self._sealed_retry = []  # frames awaiting channel recovery
        self.announced_public_key = None
        self._corr = 0

    # -- pairing / auth ----------------------------------------------------
    @property
    def pairing_code(self):
        return self._pairing_code

    def pair_client(self, code: str) -> ClientCredential:
        with self._lock:
            if self._pairing_used or code != self._pairing_code:
                raise PairingRejected("wrong, expired, or already-used code")
            self._pairing_used = True
            cred = ClientCredential(client_id=uuid.uuid4().hex,
                                    token=secrets.token_hex(16),
                                    created_at=now_ms())
            self._credentials[cred.token] = cred
            return cred

    def reset_pairing_code(self, code=None):
        """Operator action: arm a fresh single-use code."""
        with self._lock:
            self._pairing_code = code or secrets.token_hex(4)
            self._pairing_used = False

    def revoke(self, token: str):
        with self._lock:
            cred = self._credentials.get(token)
            if cred:
                self._credentials[token] = ClientCredential(
                    client_id=cred.client_id, token=cred.token,
                    created_at=cred.created_at, revoked=True)

    def authenticate(self, token):
        cred = self._credentials.get(token or "")
        if cred is None or cred.revoked:
            raise Unauthenticated("missing, unknown, or revoked token")
        return cred

    # -- sense -------------------------------------------------------------
    def ingest(self, token, record_obj: dict) -> str:
        self.authenticate(token)
        privacy = Privacy(record_obj.get("privacy", "public"))
        record_id = new_record_id()
        common = dict(
            record_id=record_id,
            source_id=record_obj.get("source_id", ""),
            source_vdp=record_obj.get("source_vdp"),
            timestamp=record_obj.get("timestamp") or now_ms(),
            record_type=record_obj.get("record_type", ""),
        )
        if privacy is not Privacy.SEALED:
            record = SenseRecord(privacy=privacy,
                                 fields=record_obj.get("fields", {}), **common)
            if record_obj.get("sealed_payload"):
                raise SchemaViolation("sealed_payload only valid at privacy=sealed")
            self.store.append(record)
            return record_id
        # sealed path: envelope crosses the diode; only a metadata stub
        # (no payload, no fields) stays on the public node
        if record_obj.get("fields"):
            raise SchemaViolation("sealed record must carry no plaintext fields")
        payload_b64 = record_obj.get("sealed_payload")
        if not payload_b64:
            raise SchemaViolation("sealed record requires sealed_payload")
        envelope = SealedEnvelope.from_bytes(base64.b64decode(payload_b64))
        record = SenseRecord(privacy=Privacy.SEALED, fields={},
                             sealed_payload=envelope, **common)
        record.validate()
        frame = self._sense_forward_frame(record)
        stub = SenseRecord(privacy=Privacy.PUBLIC,
                           fields={"sealed_stub": envelope.key_id.hex()}, **common)
        self.store.append(stub)
        try:
            if self.channel is None:
                raise ChannelClosed("no channel configured")
            self.channel.send(Direction.PUBLIC_TO_PRIVATE, frame)
        except (ChannelClosed, DirectionViolation):
            with self._lock:
                self._sealed_retry.append(frame)
            raise ChannelDown(record_id)
        return record_id

    def retry_sealed(self):
        """Re-send queued sealed forwards after channel recovery."""
        with self._lock:
            pending, self._sealed_retry = self._sealed_retry, []
        for frame in pending:
            try:
                self.channel.send(Direction.PUBLIC_TO_PRIVATE, frame)
            except (ChannelClosed, DirectionViolation):
                with self._lock:
                    self._sealed_retry.append(frame)

    def _sense_forward_frame(self, record: SenseRecord) -> bytes:
        import json
        body = json.dumps(record.to_json(), separators=(",", ":")).encode("utf-8")
        with self._lock:
            self._corr += 1
            corr = self._corr
        packet = CallosumPacket(msg_type=MsgType.SENSE_FORWARD,
                                correlation_id=corr, payload=body)
        return encode_frame(packet, self.fec)

    # -- act ---------------------------------------------------------------
    def register_device(self, token, descriptor_obj: dict) -> str:
        self.authenticate(token)
        controls = {}
        for cobj in descriptor_obj.get("controls", []):
            schema = parse_control_schema(cobj)
            if schema.name in controls:
                raise SchemaViolation("duplicate control name %r" % schema.name)
            controls[schema.name] = schema
        device_id = uuid.uuid4().hex
        with self._lock:
            self._devices[device_id] = DeviceDescriptor(
                device_id=device_id, name=descriptor_obj.get("name", ""),
                controls=controls)
            self._queues[device_id] = []
        return device_id

    def set_control(self, token, device_id, control, value) -> str:
        self.authenticate(token)
        with self._lock:
            device = self._devices.get(device_id)
            if device is None:
                raise UnknownDevice(device_id)
            schema = device.controls.get(control)
            if schema is None:
                raise UnknownControl(control)
            schema.check(value)
            command = ControlCommand(command_id=uuid.uuid4().hex,
                                     device_id=device_id, control=control,
                                     value=value, issued_at=now_ms())
            self._queues[device_id].append(command)
            schema.current_value = value
            return command.command_id

    def poll_commands(self, token, device_id) -> list:
        self.authenticate(token)
        with self._lock:
            if device_id not in self._devices:
                raise UnknownDevice(device_id)
            pending = self._queues[device_id]
            self._queues[device_id] = []
            for command in pending:
                command.state = "delivered"
            return pending

    # -- mind --------------------------------------------------------------
    def mind_query(self, token, query_obj: dict):
        self.authenticate(token)
        query = MindQuery.from_json(query_obj)
        return self.engine.execute_query(query)

    def mind_settle(self, token, query_ref, fee):
        self.authenticate(token)
        insight = self.engine.get_insight(query_ref)
        if insight is None:
            raise UnknownQueryRef(query_ref)
        return self.engine.settle(insight, fee, self.ledger,
                                  fetcher=self.vdp_fetcher)


def create_app(core: PublicNodeCore):
    """FastAPI application over a PublicNodeCore."""
    from fastapi import FastAPI, Header, Request
    from fastapi.responses import JSONResponse, Response

    app = FastAPI(title="lifeserver public node", docs_url=None, redoc_url=None)
    app.state.core = core

    def _token(authorization):
        if authorization and authorization.startswith("Bearer "):
            return authorization[len("Bearer "):]
        return None

    @app.exception_handler(Exception)
    async def _on_error(request: Request, exc: Exception):
        status = 500
        if isinstance(exc, (SchemaViolation, ValueOutOfDomain, ValueError,
                            ResolutionFailed)):
            status = 400
        elif isinstance(exc, Unauthenticated):
            status = 401
        elif isinstance(exc, FeeTooLow):
            status = 402
        elif isinstance(exc, (UnknownDevice, UnknownControl, UnknownQueryRef)):
            status = 404
        elif isinstance(exc, PairingRejected):
            status = 409
        elif isinstance(exc, ChannelDown):
            return JSONResponse(status_code=200, content={
                "record_id": exc.record_id, "deferred": True})
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.post("/pair")
    async def pair(body: dict):
        cred = core.pair_client(body.get("code", ""))
        resp = {"client_id": cred.client_id, "token": cred.token}
        if core.announced_public_key:
            resp["sealed_public_key"] = base64.b64encode(
                core.announced_public_key).decode("ascii")
        return resp

    @app.post("/sense/v1/records")
    async def sense(body: dict, authorization: str = Header(default=None)):
        record_id = core.ingest(_token(authorization), body)
        return {"record_id": record_id}

    @app.post("/act/v1/devices")
    async def register(body: dict, authorization: str = Header(default=None)):
        return {"device_id": core.register_device(_token(authorization), body)}

    @app.post("/act/v1/devices/{device_id}/controls/{name}")
    async def set_control(device_id: str, name: str, body: dict,
                          authorization: str = Header(default=None)):
        command_id = core.set_control(_token(authorization), device_id,
                                      name, body.get("value"))
        return {"command_id": command_id}

    @app.get("/act/v1/devices/{device_id}/commands")
    async def poll(device_id: str, authorization: str = Header(default=None)):
        commands = core.poll_commands(_token(authorization), device_id)
        return [c.to_json() for c in commands]

    @app.post("/mind/v1/query")
    async def mind_query(body: dict, authorization: str = Header(default=None)):
        try:
            insight = core.mind_query(_token(authorization), body)
        except InsufficientData:
            return Response(status_code=204)
        return insight.to_json()

    @app.post("/mind/v1/settle")
    async def mind_settle(body: dict, authorization: str = Header(default=None)):
        entries = core.mind_settle(_token(authorization),
                                   body.get("query_ref", ""),
                                   int(body.get("fee", 0)))
        return {"entries": [e.to_json() for e in entries]}

    return app
