"""HTTP client for natural-language annotation of rendered views.

The endpoint is user-supplied and speaks a minimal JSON protocol:
POST {"model": ..., "prompt": ..., "images": [<base64>, ...]} and answer
{"text": ...}.  An adapter in front of a commercial vision API owns any
schema translation.  The API key travels via the CELLFORGE_API_KEY
environment variable, never through config files.
"""

from __future__ import annotations

import base64
import io
import os
import time
from dataclasses import dataclass
from typing import Sequence

import requests

from .errors import ProtocolError, TransportError
from .render import ViewImage

DEFAULT_PROMPT = (
    "You are shown a part or a set of parts from 4 different angles. "
    "Describe the 3D shape of the part(s) in one or more very short informal "
    "notes. Do not mention different views. Keep it insanely short. "
    "Do not write a full sentence."
)

API_KEY_ENV = "CELLFORGE_API_KEY"


@dataclass(frozen=True)
class AnnotateConfig:
    url: str = ""
    model: str = "gpt-4o"
    prompt: str = DEFAULT_PROMPT
    timeout_ms: int = 30000
    retries: int = 2
    max_concurrent: int = 4
    backoff_base_s: float = 0.25
    image_format: str = "pgm"  # or "png" (needs Pillow)

    def __post_init__(self):
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")


def encode_image(image: ViewImage, fmt: str = "pgm") -> str:
    if fmt == "pgm":
        return base64.b64encode(image.to_pgm()).decode("ascii")
    if fmt == "png":
        try:
            from PIL import Image
        except ImportError as err:
            raise ProtocolError("png image format needs Pillow installed") from err
        buf = io.BytesIO()
        Image.fromarray(image.pixels, mode="L").save(buf, format="PNG")
        return base64.b64encode(buf.getvalue()).decode("ascii")
    raise ValueError(f"unknown image format {fmt!r}")


def annotate(images: Sequence[ViewImage], cfg: AnnotateConfig) -> str:
    """One annotation for a set of views.  Retries 5xx and transport-level
    failures with exponential backoff; other HTTP errors fail immediately."""
    if not cfg.url:
        raise TransportError("no annotation endpoint configured")
    payload = {
        "model": cfg.model,
        "prompt": cfg.prompt,
        "images": [encode_image(img, cfg.image_format) for img in images],
    }
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(API_KEY_ENV)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    timeout = cfg.timeout_ms / 1000.0

    last_error = None
    for attempt in range(cfg.retries + 1):
        if attempt:
            time.sleep(cfg.backoff_base_s * (2 ** (attempt - 1)))
        try:
            resp = requests.post(cfg.url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as err:
            last_error = f"transport failure: {err}"
            continue
        if 500 <= resp.status_code < 600:
            last_error = f"server error {resp.status_code}"
            continue
        if resp.status_code != 200:
            raise TransportError(f"endpoint answered {resp.status_code}")
        try:
            body = resp.json()
        except ValueError as err:
            raise ProtocolError(f"response is not JSON: {err}") from err
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str):
            raise ProtocolError("response JSON lacks a string 'text' field")
        return text
    raise TransportError(f"retries exhausted: {last_error}")
