import os
import logging
from dataclasses import dataclass, replace
from typing import Any, Mapping, Optional

from dotenv import load_dotenv

from pii_detection.core import ConfigurationError
from pii_detection.entity_mappings import DEFAULT_SENSITIVITY, SensitivityWeights
from pii_detection.extractor import RecognizerSet, build_default_recognizers
from session.risk import RiskConfig
from session.upstream import DEFAULT_API_KEY_ENV

logger = logging.getLogger(__name__)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}

def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"not a boolean: {value!r}")

# Environment variable -> (field name, parser)
ENV_FIELDS = {
    "CAMP_PORT": ("port", int),
    "CAMP_UPSTREAM_URL": ("upstream_url", str),
    "CAMP_UPSTREAM_MODEL": ("upstream_model", str),
    "CAMP_API_KEY_ENV": ("api_key_env", str),
    "CAMP_TAU": ("tau", float),
    "CAMP_ALPHA": ("alpha", float),
    "CAMP_SESSION_TTL": ("session_ttl", float),
    "CAMP_WEIGHTS_FILE": ("weights_file", str),
    "CAMP_GAZETTEER_DIR": ("gazetteer_dir", str),
    "CAMP_MAX_MESSAGE_CHARS": ("max_message_chars", int),
    "CAMP_EXPOSE_META": ("expose_meta", _parse_bool),
    "CAMP_UPSTREAM_TIMEOUT": ("upstream_timeout", float),
    "CAMP_UPSTREAM_RETRIES": ("upstream_retries", int),
    "CAMP_SEED": ("seed", int),
}

@dataclass
class ServiceConfig:
    """Settings for the chat proxy service.

    The upstream credential itself is never stored here; only the name of the
    environment variable that holds it.
    """
    port: int = 8080
    upstream_url: Optional[str] = None
    upstream_model: str = "gpt-4o-mini"
    api_key_env: str = DEFAULT_API_KEY_ENV
    tau: float = 2.0
    alpha: float = 0.3
    session_ttl: float = 1800.0
    weights_file: Optional[str] = None
    gazetteer_dir: Optional[str] = None
    max_message_chars: int = 8000
    expose_meta: bool = True
    upstream_timeout: float = 30.0
    upstream_retries: int = 1
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.session_ttl <= 0:
            raise ConfigurationError(f"session TTL must be positive, got {self.session_ttl}")
        if self.max_message_chars <= 0:
            raise ConfigurationError(f"max message length must be positive, got {self.max_message_chars}")

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None, **overrides: Any) -> "ServiceConfig":
        """Read CAMP_* variables (after loading a .env file); keyword overrides win."""
        if environ is None:
            load_dotenv()
            environ = os.environ
        values = {}
        for var, (name, parse) in ENV_FIELDS.items():
            raw = environ.get(var)
            if raw is None or raw == "":
                continue
            try:
                values[name] = parse(raw)
            except ValueError as e:
                raise ConfigurationError(f"Invalid value for {var}: {str(e)}")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_overrides(self, **overrides: Any) -> "ServiceConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def load_weights(self) -> SensitivityWeights:
        if not self.weights_file:
            return DEFAULT_SENSITIVITY
        return SensitivityWeights.from_file(self.weights_file)

    def risk_config(self, weights: Optional[SensitivityWeights] = None) -> RiskConfig:
        return RiskConfig(alpha=self.alpha, tau=self.tau, weights=weights or self.load_weights())

    def build_recognizers(self, weights: Optional[SensitivityWeights] = None) -> RecognizerSet:
        return build_default_recognizers(self.gazetteer_dir, weights or self.load_weights())
