import json
import subprocess
import sys

import pytest

from lifeserver.callosum import ChannelMode, Direction
from lifeserver.node.cli import main as lifeserver_main
from lifeserver.node.config import (
    BadValue,
    MissingKey,
    NodeConfig,
    UnknownKey,
    parse_config,
)
from lifeserver.node.runtime import (
    Deployment,
    ProvisioningError,
    deployment_from_config,
    store_mode,
)

MINIMAL = "role = public\ndata_dir = /tmp/x\n"


# -- config ----------------------------------------------------------------

def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.role == "public"
    assert cfg.k_min == 5
    assert cfg.mode is ChannelMode.DUPLEX
    assert cfg.transport == "inprocess"
    assert cfg.fec.enabled is False
    assert cfg.limits.max_depth == 16


def test_full_config():
    cfg = parse_config("""
        # a comment
        role = public
        data_dir = /srv/ls            # trailing comment
        listen_address = 0.0.0.0:9000
        pairing_code = beefcafe
        k_min = 3
        ls_retention = 0.05
        min_fee = 10
        channel.mode = diode
        channel.fec.enabled = true
        channel.fec.data_len = 100
        channel.fec.parity_len = 20
        channel.corrupt_prob = 0.01
        channel.seed = 7
        resolution.max_depth = 4
    """)
    assert cfg.listen_address == "0.0.0.0:9000"
    assert cfg.mode is ChannelMode.DIODE
    assert (cfg.fec.data_len, cfg.fec.parity_len) == (100, 20)
    assert cfg.ls_retention == 0.05
    assert cfg.limits.max_depth == 4


@pytest.mark.parametrize("text,exc", [
    ("data_dir = /x\n", MissingKey),
    ("role = public\n", MissingKey),
    ("role = sideways\ndata_dir = /x\n", BadValue),
    (MINIMAL + "nonsense = 1\n", UnknownKey),
    (MINIMAL + "k_min = zero\n", BadValue),
    (MINIMAL + "k_min = 0\n", BadValue),
    (MINIMAL + "ls_retention = 1.5\n", BadValue),
    (MINIMAL + "channel.mode = sideways\n", BadValue),
    (MINIMAL + "channel.transport = carrier-pigeon\n", BadValue),
    (MINIMAL + "listen_address = nohostport\n", BadValue),
    (MINIMAL + "data_dir = /y\n", BadValue),  # duplicate key
    (MINIMAL + "just some words\n", BadValue),
    ("role = private\ndata_dir = /x\npairing_code = a\n", UnknownKey),
])
def test_config_errors(text, exc):
    with pytest.raises(exc):
        parse_config(text)


def test_private_role_accepts_common_keys():
    cfg = parse_config("role = private\ndata_dir = /x\nchannel.mode = diode\n")
    assert cfg.role == "private"
    assert cfg.mode is ChannelMode.DIODE


# -- provisioning lifecycle ------------------------------------------------

def test_provision_then_lock(tmp_path):
    dep = Deployment(str(tmp_path / "pub"), str(tmp_path / "priv"),
                     mode=ChannelMode.DUPLEX)
    key = dep.provision()
    assert key == dep.private.keypair.public_key
    assert dep.public.announced_public_key == key
    dep.lock()
    baseline = dep.reverse_wire_bytes()
    dep.close()

    # the announced key survives a restart, and reverse traffic stays at the
    # provisioning-era level once locked
    dep2 = Deployment(str(tmp_path / "pub"), str(tmp_path / "priv"),
                      mode=ChannelMode.DIODE)
    assert dep2.public.announced_public_key == key
    assert dep2.private.keypair.public_key == key  # keypair persisted too
    assert dep2.reverse_wire_bytes() == 0
    with pytest.raises(Exception):
        dep2.channel.send(Direction.PRIVATE_TO_PUBLIC, b"x")
    dep2.close()
    assert baseline > 0  # provisioning itself did use the reverse path


def test_provision_requires_duplex(tmp_path):
    dep = Deployment(str(tmp_path / "pub"), str(tmp_path / "priv"),
                     mode=ChannelMode.DIODE)
    with pytest.raises(ProvisioningError):
        dep.provision()
    dep.close()


def test_provision_idempotent(tmp_path):
    dep = Deployment(str(tmp_path / "pub"), str(tmp_path / "priv"),
                     mode=ChannelMode.DUPLEX)
    assert dep.provision() == dep.provision()
    dep.close()


def test_stored_mode_overrides_config(tmp_path):
    pub = str(tmp_path / "pub")
    store_mode(pub, ChannelMode.DIODE)
    cfg = parse_config("role = public\ndata_dir = %s\nchannel.mode = duplex\n" % pub)
    dep = deployment_from_config(cfg, private_dir=str(tmp_path / "priv"))
    assert dep.channel.mode is ChannelMode.DIODE
    dep.close()


# -- operator CLI ----------------------------------------------------------

def write_config(tmp_path, extra=""):
    path = tmp_path / "node.conf"
    path.write_text("role = public\ndata_dir = %s\npairing_code = c0de\n%s"
                    % (tmp_path / "data", extra))
    return str(path)


def test_cli_pairing_code(tmp_path, capsys):
    assert lifeserver_main(["pairing-code", "--config",
                            write_config(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "c0de"


def test_cli_provision_and_lock(tmp_path, capsys):
    config = write_config(tmp_path)
    assert lifeserver_main(["provision", "--config", config]) == 0
    out = capsys.readouterr().out
    assert "announced public key" in out

    assert lifeserver_main(["lock", "--config", config]) == 0
    cfg = parse_config(open(config).read())
    dep = deployment_from_config(cfg, private_dir=str(tmp_path / "data.private"))
    assert dep.channel.mode is ChannelMode.DIODE
    assert dep.public.announced_public_key is not None
    dep.close()

    assert lifeserver_main(["lock", "--unlock", "--config", config]) == 0
    cfg = parse_config(open(config).read())
    dep = deployment_from_config(cfg, private_dir=str(tmp_path / "data.private"))
    assert dep.channel.mode is ChannelMode.DUPLEX
    dep.close()


def test_cli_config_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.conf"
    bad.write_text("role = public\n")  # data_dir missing
    assert lifeserver_main(["run", "--config", str(bad)]) == 2
    assert lifeserver_main(["run", "--config", str(tmp_path / "absent.conf")]) == 2


def test_cli_usage_error_exit_1(capsys):
    assert lifeserver_main(["frobnicate"]) == 1
    assert lifeserver_main(["run"]) == 1  # --config required


def test_cli_rejects_private_role_config(tmp_path, capsys):
    conf = tmp_path / "priv.conf"
    conf.write_text("role = private\ndata_dir = %s\n" % (tmp_path / "d"))
    assert lifeserver_main(["pairing-code", "--config", str(conf)]) == 2


# -- installed entry points ------------------------------------------------

def test_vdp_cli_compute(tmp_path):
    doc = {"version": 1, "split": [
        {"id": "a", "shares": 3, "crypto": {"bitcoin": "addr-a"}},
        {"id": "b", "shares": 1, "crypto": {"bitcoin": "addr-b"}},
    ]}
    path = tmp_path / "t.json"
    path.write_text(json.dumps(doc))
    proc = subprocess.run(
        [sys.executable, "-m", "lifeserver.vdp.cli",
         "compute", str(path), "--value", "1000"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    rows = [line.split("\t") for line in proc.stdout.strip().splitlines()]
    assert [(r[0], r[1]) for r in rows] == [("addr-a", "750"), ("addr-b", "250")]


def test_vdp_cli_parse_error_exit_1(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    proc = subprocess.run(
        [sys.executable, "-m", "lifeserver.vdp.cli", "parse", str(path)],
        capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stderr.strip()
