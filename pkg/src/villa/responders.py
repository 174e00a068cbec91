"""Response generators: a remote chat-endpoint client and scripted test doubles."""

from __future__ import annotations

import json
import re
import time
from typing import Callable, Protocol, runtime_checkable

import httpx

from .corpus import GroundTruthDataset

# Marker the default retrieval templates put before the context block; the
# context-faithful test doubles use it to tell instructions from context.
CONTEXT_HEADER = "Context:"


class ResponderError(RuntimeError):
    """Base class for responder failures."""


class ResponderTransportError(ResponderError):
    """Chat endpoint unreachable or persistently failing."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ResponderContractError(ResponderError):
    """Chat endpoint returned a payload violating the wire contract."""


@runtime_checkable
class Responder(Protocol):
    name: str

    def respond(self, prompt: str) -> str: ...


class ScriptedResponder:
    """Replays canned responses; bit-deterministic for a fixed call sequence.

    ``script`` may be a single string (always returned), a list of strings
    (consumed in order, erroring when exhausted), or a callable mapping the
    prompt to a response.
    """

    def __init__(self, script, name: str = "mock:scripted"):
        self.name = name
        self.prompts: list[str] = []
        self._script = script
        self._cursor = 0

    def respond(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if isinstance(self._script, str):
            return self._script
        if callable(self._script):
            return self._script(prompt)
        if self._cursor >= len(self._script):
            raise ResponderError(f"scripted responder exhausted after {self._cursor} calls")
        response = self._script[self._cursor]
        self._cursor += 1
        return response


class EmptyResponder:
    """Always reports no mutations; useful as a context-faithful floor."""

    name = "mock:empty"

    def __init__(self):
        self.prompts: list[str] = []

    def respond(self, prompt: str) -> str:
        self.prompts.append(prompt)
        return json.dumps({"mutations": [], "reasoning": "No mutations found in the provided context."})


class OracleResponder:
    """Emits exactly the known-truth mutations appearing verbatim in its context.

    The prompt is split at ``context_header``: the part before it names the
    protein under query, the part after it is the retrieved context. Output
    is the queried protein's known mutations whose canonical strings occur
    in that context, so by construction the oracle never produces a correct
    mutation that retrieval did not supply. Prompts without a context block
    (zero-shot) yield an empty list.
    """

    def __init__(self, ground_truth: GroundTruthDataset, context_header: str = CONTEXT_HEADER):
        self.name = "mock:oracle"
        self.prompts: list[str] = []
        self._gt = ground_truth
        self._header = context_header
        # Longest names first so e.g. PB1-F2 is preferred over PB1.
        self._proteins = sorted(ground_truth.proteins, key=len, reverse=True)

    def _protein_in(self, text: str) -> str | None:
        for protein in self._proteins:
            if re.search(rf"(?<![A-Za-z0-9]){re.escape(protein)}(?![A-Za-z0-9])", text):
                return protein
        return None

    def respond(self, prompt: str) -> str:
        self.prompts.append(prompt)
        head, marker, context = prompt.partition(self._header)
        found: list[str] = []
        protein = self._protein_in(head)
        if marker and protein is not None:
            known = sorted(m.canonical() for m in self._gt.mutations_for(protein))
            found = [canonical for canonical in known if canonical in context]
        reasoning = (
            f"Mutations {', '.join(found)} appear in the provided context."
            if found
            else "No known mutations appear in the provided context."
        )
        return json.dumps({"mutations": found, "reasoning": reasoning})


class RemoteResponder:
    """Client for a generic chat endpoint.

    Wire contract: POST JSON ``{"model": ..., "messages": [{"role":
    "user", "content": prompt}], "temperature": ...}`` to ``base_url``;
    the reply carries ``{"choices": [{"message": {"content": text}}]}``.
    Retries 429 and 5xx with exponential backoff.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        temperature: float = 0.0,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url
        self.model = model
        self.api_key = api_key
        self.temperature = temperature
        self.retries = retries
        self.backoff = backoff
        self.name = model
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def respond(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_status: int | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(self.base_url, json=payload, headers=headers)
            except httpx.TransportError as exc:
                if attempt == self.retries:
                    raise ResponderTransportError(f"chat endpoint unreachable: {exc}") from exc
                time.sleep(self.backoff * 2**attempt)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_status = response.status_code
                if attempt == self.retries:
                    break
                time.sleep(self.backoff * 2**attempt)
                continue
            if response.status_code != 200:
                raise ResponderTransportError(
                    f"chat endpoint returned {response.status_code}: {response.text[:200]}",
                    status=response.status_code,
                )
            try:
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ResponderContractError(f"malformed chat response: {exc}") from exc
        raise ResponderTransportError(
            f"chat endpoint failed after {self.retries + 1} attempts (last status {last_status})",
            status=last_status,
        )
