"""Operator CLI: `lifeserver run|provision|lock|pairing-code`.

Exit codes: 0 success, 1 usage, 2 config error, 3 runtime error.
`provision` and `lock` act on the deployment's data directories; a running
`run` picks the stored channel mode up at startup.
"""

from __future__ import annotations

import argparse
import sys
import threading
import time

from ..callosum import ChannelMode
from .config import ConfigError, load_config
from .runtime import (
    ProvisioningError,
    build_app,
    deployment_from_config,
    store_mode,
)


def _load(path):
    cfg = load_config(path)
    if cfg.role != "public":
        raise ConfigError(
            "the orchestration commands drive the public role; got role=%s"
            % cfg.role)
    return cfg


def cmd_run(cfg) -> int:
    import uvicorn

    deployment = deployment_from_config(cfg)
    if deployment.channel.mode is ChannelMode.DIODE \
            and deployment.public.announced_public_key is None:
        sys.stderr.write("warning: channel locked before key announcement; "
                         "sealed ingestion will queue until provisioning\n")
    app = build_app(deployment)

    stop = threading.Event()

    def pump_loop():
        while not stop.is_set():
            deployment.pump()
            time.sleep(0.05)

    pump_thread = threading.Thread(target=pump_loop, daemon=True)
    pump_thread.start()
    host, port = cfg.listen_address.rsplit(":", 1)
    sys.stderr.write("pairing code: %s\n" % deployment.public.pairing_code)
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    except SystemExit as exc:
        # uvicorn exits through SystemExit on bind failure
        return 3 if exc.code else 0
    except OSError as exc:
        sys.stderr.write("lifeserver: %s\n" % exc)
        return 3
    finally:
        stop.set()
        deployment.close()
    return 0


def cmd_provision(cfg) -> int:
    deployment = deployment_from_config(cfg)
    try:
        deployment.unlock()
        key = deployment.provision()
    finally:
        deployment.close()
    sys.stdout.write("announced public key: %s\n" % key.hex())
    sys.stdout.write("run 'lifeserver lock' to switch the channel to diode mode\n")
    return 0


def cmd_lock(cfg) -> int:
    store_mode(cfg.data_dir, ChannelMode.DIODE)
    sys.stdout.write("channel mode: diode (applies at next start)\n")
    return 0


def cmd_unlock(cfg) -> int:
    store_mode(cfg.data_dir, ChannelMode.DUPLEX)
    sys.stdout.write("channel mode: duplex (applies at next start)\n")
    return 0


def cmd_pairing_code(cfg) -> int:
    deployment = deployment_from_config(cfg)
    try:
        sys.stdout.write(deployment.public.pairing_code + "\n")
    finally:
        deployment.close()
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lifeserver",
                                     description="two-node personal data server")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "provision", "lock", "pairing-code"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
    sub.choices["lock"].add_argument("--unlock", action="store_true",
                                     help="switch back to duplex instead")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0

    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        sys.stderr.write("lifeserver: config error: %s\n" % exc)
        return 2

    try:
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "provision":
            return cmd_provision(cfg)
        if args.command == "lock":
            return cmd_unlock(cfg) if args.unlock else cmd_lock(cfg)
        if args.command == "pairing-code":
            return cmd_pairing_code(cfg)
    except ProvisioningError as exc:
        sys.stderr.write("lifeserver: %s\n" % exc)
        return 3
    except OSError as exc:
        sys.stderr.write("lifeserver: %s\n" % exc)
        return 3
    return 1


if __name__ == "__main__":
    sys.exit(main())
