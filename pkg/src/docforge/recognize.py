"""Recognition backends and the bounded-parallel region dispatcher."""

from __future__ import annotations

import base64
import enum
import json
import logging
import mimetypes
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

import httpx

from docforge.layout import ReadingOrder
from docforge.model import (
    Category,
    OutputFormat,
    Page,
    RecognizedRegion,
    Region,
    Status,
    format_for_category,
)
from docforge.reward.validators import KieSchema
from docforge.strict_json import dumps_canonical

logger = logging.getLogger(__name__)

TEXT_PROMPT = "Text Recognition:"
TABLE_PROMPT = "Table Recognition:"
FORMULA_PROMPT = "Formula Recognition:"
KIE_INSTRUCTION = "Extract the requested fields and reply with JSON that strictly follows this schema:"

KIE = "kie"


class SchemaRequired(ValueError):
    pass


class BackendError(Exception):
    """A recognition call failed; retried by :func:`recognize_region`."""


class FixtureMiss(Exception):
    """The mock fixture has no entry for the region."""


class BackendKind(str, enum.Enum):
    MOCK = "mock"
    REMOTE = "remote"


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind = BackendKind.MOCK
    endpoint: Optional[str] = None
    model_name: Optional[str] = None
    timeout_ms: int = 60_000
    max_retries: int = 2
    backoff_ms: int = 200
    fixture_path: Optional[str] = None
    api_key: Optional[str] = None

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if not 0 <= self.max_retries <= 10:
            raise ValueError("max_retries must lie in [0, 10]")
        if self.backoff_ms < 0:
            raise ValueError("backoff_ms must be >= 0")
        if self.kind is BackendKind.REMOTE and not (self.endpoint and self.model_name):
            raise ValueError("remote backend needs endpoint and model_name")
        if self.kind is BackendKind.MOCK and not self.fixture_path:
            raise ValueError("mock backend needs fixture_path")


@dataclass(frozen=True)
class Prompt:
    text: str
    schema: Optional[KieSchema] = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("prompt text must be non-empty")


def prompt_for_category(category: Union[Category, str], schema: Optional[KieSchema] = None) -> Prompt:
    """Task prompt for a region category, or for ``"kie"`` with a schema."""
    if category == KIE:
        if schema is None:
            raise SchemaRequired("KIE prompts need a schema")
        return Prompt(f"{KIE_INSTRUCTION}\n{dumps_canonical(schema.to_dict())}", schema)
    if schema is not None:
        raise ValueError("a schema only applies to KIE prompts")
    category = Category(category)
    if category is Category.TABLE:
        return Prompt(TABLE_PROMPT)
    if category is Category.FORMULA:
        return Prompt(FORMULA_PROMPT)
    return Prompt(TEXT_PROMPT)


class Backend:
    """Base for recognition backends. ``call`` must be thread-safe."""

    config: BackendConfig
    supports_figures = True

    def call(self, prompt: Prompt, region: Region, page: Page) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass


class MockBackend(Backend):
    """Answers from a fixture mapping region id to output text.

    Keys may be plain region ids or ``"<page_id>/<region_id>"``. The key
    ``__latency_ms`` adds a fixed sleep to every call and ``__fail`` lists
    region ids whose calls always raise.
    """

    def __init__(self, fixture: Mapping[str, Any], config: Optional[BackendConfig] = None,
                 latency_ms: Optional[float] = None, default: Optional[str] = None):
        self.config = config or BackendConfig(fixture_path="<memory>")
        self.outputs = {k: v for k, v in fixture.items() if not k.startswith("__")}
        self.latency_ms = float(fixture.get("__latency_ms", 0) if latency_ms is None else latency_ms)
        self.failing = set(fixture.get("__fail", ()))
        self.default = default
        self._lock = threading.Lock()
        self.calls: dict[str, int] = {}
        self.in_flight = 0
        self.max_in_flight = 0

    @classmethod
    def from_config(cls, config: BackendConfig) -> "MockBackend":
        fixture = json.loads(Path(config.fixture_path).read_text(encoding="utf-8"))
        if not isinstance(fixture, dict):
            raise ValueError(f"{config.fixture_path}: mock fixture must be a JSON object")
        return cls(fixture, config)

    def call(self, prompt: Prompt, region: Region, page: Page) -> str:
        key = f"{page.page_id}/{region.id}"
        with self._lock:
            self.calls[key] = self.calls.get(key, 0) + 1
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            if self.latency_ms:
                time.sleep(self.latency_ms / 1000)
            if region.id in self.failing or key in self.failing:
                raise BackendError(f"injected failure for {region.id}")
            if key in self.outputs:
                return self.outputs[key]
            if region.id in self.outputs:
                return self.outputs[region.id]
            if self.default is not None:
                return self.default
            raise FixtureMiss(region.id)
        finally:
            with self._lock:
                self.in_flight -= 1


class RemoteBackend(Backend):
    """OpenAI-style chat-completions client sending the region crop inline."""

    supports_figures = False

    def __init__(self, config: BackendConfig, images_dir: Union[str, Path] = ".",
                 transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self.images_dir = Path(images_dir)
        headers = {"Authorization": f"Bearer {config.api_key}"} if config.api_key else {}
        self._client = httpx.Client(
            timeout=config.timeout_ms / 1000, headers=headers, transport=transport
        )

    def image_path(self, region: Region) -> Optional[Path]:
        if not region.image_ref:
            return None
        return self.images_dir / region.image_ref

    def request_body(self, prompt: Prompt, image: bytes, mime: str) -> dict:
        data_url = f"data:{mime};base64,{base64.b64encode(image).decode('ascii')}"
        return {
            "model": self.config.model_name,
            "messages": [
                {
                    "role": "user",
                    "content": [
                        {"type": "text", "text": prompt.text},
                        {"type": "image_url", "image_url": {"url": data_url}},
                    ],
                }
            ],
        }

    def call(self, prompt: Prompt, region: Region, page: Page) -> str:
        path = self.image_path(region)
        if path is None or not path.is_file():
            raise BackendError(f"region image not found: {path}")
        mime = mimetypes.guess_type(path.name)[0] or "image/png"
        body = self.request_body(prompt, path.read_bytes(), mime)
        url = self.config.endpoint.rstrip("/") + "/v1/chat/completions"
        try:
            resp = self._client.post(url, json=body)
            resp.raise_for_status()
            content = resp.json()["choices"][0]["message"]["content"]
        except (httpx.HTTPError, ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"{type(exc).__name__}: {exc}") from exc
        if not isinstance(content, str):
            raise BackendError("completion content is not a string")
        return content

    def close(self) -> None:
        self._client.close()


def make_backend(config: BackendConfig, images_dir: Union[str, Path] = ".") -> Backend:
    if config.kind is BackendKind.REMOTE:
        return RemoteBackend(config, images_dir)
    return MockBackend.from_config(config)


def recognize_region(backend: Backend, region: Region, page: Page,
                     prompt: Optional[Prompt] = None) -> RecognizedRegion:
    """Run one region through ``backend`` with bounded retries.

    Never raises for backend trouble: failures come back as a
    ``backend_error`` status after ``1 + max_retries`` attempts.
    """
    fmt = format_for_category(region.category)

    def result(content: str, status: Status) -> RecognizedRegion:
        return RecognizedRegion(region.id, region.category, content, fmt, status)

    if region.category is Category.FIGURE and not backend.supports_figures:
        return result("", Status.skipped("figure regions are not sent to this backend"))
    prompt = prompt or prompt_for_category(region.category)
    cfg = backend.config
    last_error = ""
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            time.sleep(cfg.backoff_ms * 2 ** (attempt - 1) / 1000)
        try:
            return result(backend.call(prompt, region, page), Status.ok())
        except FixtureMiss:
            return result("", Status.skipped("no fixture"))
        except BackendError as exc:
            last_error = str(exc)
        except Exception as exc:  # a misbehaving backend must not take the page down
            last_error = f"{type(exc).__name__}: {exc}"
        logger.debug("region %s attempt %d failed: %s", region.id, attempt + 1, last_error)
    return result("", Status.backend_error(last_error))


@dataclass
class PageTiming:
    page_id: str
    started: float = float("inf")
    finished: float = 0.0

    @property
    def seconds(self) -> float:
        return max(0.0, self.finished - self.started)


@dataclass
class BatchResult:
    results: list[list[RecognizedRegion]]
    timings: list[PageTiming] = field(default_factory=list)


def recognize_pages(backend: Backend, pages: Sequence[Page], orders: Sequence[ReadingOrder],
                    concurrency: int) -> BatchResult:
    """Recognize every region of every page through one pool of ``concurrency`` workers.

    Each page's results come back in its reading order, whatever order the
    workers finish in.
    """
    if concurrency < 1:
        raise ValueError("concurrency must be >= 1")
    jobs = []
    for p_idx, (page, order) in enumerate(zip(pages, orders)):
        for rid in order.ordered_region_ids:
            jobs.append((p_idx, page, page.region(rid)))
    timings = [PageTiming(p.page_id) for p in pages]
    lock = threading.Lock()

    def run(job):
        p_idx, page, region = job
        start = time.perf_counter()
        out = recognize_region(backend, region, page)
        end = time.perf_counter()
        with lock:
            t = timings[p_idx]
            t.started = min(t.started, start)
            t.finished = max(t.finished, end)
        return out

    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        flat = list(pool.map(run, jobs))
    results: list[list[RecognizedRegion]] = [[] for _ in pages]
    for (p_idx, _, _), rec in zip(jobs, flat):
        results[p_idx].append(rec)
    return BatchResult(results, timings)


def recognize_page(backend: Backend, page: Page, order: ReadingOrder,
                   concurrency: int = 4) -> list[RecognizedRegion]:
    return recognize_pages(backend, [page], [order], concurrency).results[0]
