"""Client for an HTTP fill-in-the-middle endpoint."""

from __future__ import annotations

import logging
import os
import threading
from typing import Optional

import requests

from tau.predictor.base import PredictorFailure, PredictRequest, PredictResponse, Sentinels, build_psm_prompt

log = logging.getLogger(__name__)


class Transport(PredictorFailure):
    pass


class Timeout(PredictorFailure):
    pass


class MalformedResponse(PredictorFailure):
    pass


class RemotePredictor:
    """POSTs ``/v1/infill`` requests.

    ``style="infill"`` sends prefix and suffix for a FIM-native server;
    ``style="prompt"`` sends the assembled PSM text as ``{"prompt": ...}``.
    ``TAU_ENDPOINT`` overrides ``endpoint``.
    """

    def __init__(self, endpoint: Optional[str] = None, sentinels: Optional[Sentinels] = None,
                 timeout: float = 30.0, style: str = "infill", max_in_flight: int = 8,
                 retries: int = 2, session: Optional[requests.Session] = None):
        endpoint = os.environ.get("TAU_ENDPOINT") or endpoint
        if not endpoint:
            raise ValueError("no endpoint given and TAU_ENDPOINT is unset")
        if style not in ("infill", "prompt"):
            raise ValueError(f"unknown endpoint style {style!r}")
        self.url = endpoint.rstrip("/") + "/v1/infill"
        self.sentinels = sentinels or Sentinels()
        self.timeout = timeout
        self.style = style
        self.retries = retries
        self.session = session or requests.Session()
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def body(self, req: PredictRequest) -> dict:
        if self.style == "prompt":
            body = req.wire()
            del body["prefix"], body["suffix"]
            body["prompt"] = build_psm_prompt(req, self.sentinels)
            return body
        return req.wire()

    def predict(self, req: PredictRequest) -> PredictResponse:
        body = self.body(req)
        last: Exception = Transport("no attempt made")
        with self._slots:
            for attempt in range(self.retries + 1):
                try:
                    resp = self.session.post(self.url, json=body, timeout=self.timeout)
                    resp.raise_for_status()
                    data = resp.json()
                except requests.Timeout as exc:
                    last = Timeout(str(exc))
                except (requests.RequestException, ValueError) as exc:
                    last = Transport(str(exc))
                else:
                    return self.decode(data, req.num_samples)
                log.warning("infill request failed (attempt %d): %s", attempt + 1, last)
        raise last

    @staticmethod
    def decode(data, limit: int) -> PredictResponse:
        if not isinstance(data, dict) or not isinstance(data.get("completions"), list):
            raise MalformedResponse(f"unexpected response: {data!r:.200}")
        comps = data["completions"]
        if not all(isinstance(c, str) for c in comps):
            raise MalformedResponse("completions must be strings")
        return PredictResponse(comps[:limit])
