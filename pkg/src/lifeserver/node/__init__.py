"""Orchestration: configuration, node startup, provisioning, operator CLI."""

from .config import BadValue, ConfigError, MissingKey, NodeConfig, UnknownKey, load_config, parse_config
from .runtime import Deployment, PrivateNode, ProvisioningError, build_app, deployment_from_config

__all__ = [
    "BadValue", "ConfigError", "Deployment", "MissingKey", "NodeConfig",
    "PrivateNode", "ProvisioningError", "UnknownKey", "build_app",
    "deployment_from_config", "load_config", "parse_config",
]
