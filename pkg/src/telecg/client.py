"""Upload client: POST one batch to the repository service.

Retries transient failures with exponential backoff; an Idempotency-Key
derived from the content digest makes re-sends safe.
"""

from __future__ import annotations

import time
from typing import Callable

import requests

from .errors import PermanentRejectionError, TransportError
from .wire import CONTENT_TYPE, content_digest

DEFAULT_MAX_RETRIES = 3
DEFAULT_BACKOFF_BASE_S = 1.0
REQUEST_TIMEOUT_S = 30.0


def upload(
    server_url: str,
    batch: bytes,
    max_retries: int = DEFAULT_MAX_RETRIES,
    backoff_base_s: float = DEFAULT_BACKOFF_BASE_S,
    session: requests.Session | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    """Send a batch; returns the server-assigned record id.

    4xx responses are permanent rejections and are not retried; connection
    failures and 5xx responses are retried up to ``max_retries`` times with
    exponential backoff starting at ``backoff_base_s``.
    """
    url = server_url.rstrip("/") + "/api/v1/records"
    headers = {
        "Content-Type": CONTENT_TYPE,
        "Idempotency-Key": f"sha256:{content_digest(batch)}",
    }
    http = session or requests.Session()
    last_failure = "no attempt made"
    for attempt in range(max_retries + 1):
        if attempt:
            sleep(backoff_base_s * 2 ** (attempt - 1))
        try:
            response = http.post(url, data=batch, headers=headers, timeout=REQUEST_TIMEOUT_S)
        except requests.RequestException as exc:
            last_failure = str(exc)
            continue
        if response.status_code in (200, 201):
            try:
                record_id = response.json()["record_id"]
            except (ValueError, KeyError) as exc:
                raise TransportError(f"malformed server response: {exc}") from None
            return record_id
        if 400 <= response.status_code < 500:
            raise PermanentRejectionError(response.status_code, _server_message(response))
        last_failure = f"server returned {response.status_code}"
    raise TransportError(f"upload failed after {max_retries} retries: {last_failure}")


def _server_message(response: requests.Response) -> str:
    try:
        return response.json().get("error", response.text)
    except ValueError:
        return response.text
