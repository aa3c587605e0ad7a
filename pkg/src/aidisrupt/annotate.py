"""Task-characteristic rubric, LLM and survey annotation, and consensus rates.

Tasks are labeled on three binary dimensions: how the work is done
(Interactive T / Independent D), repetitiveness (Repetitive R / Variable V),
and nature (Physical P / Mental M). LLM annotations come from a chat-style
JSON-over-HTTP endpoint using fixed prompt templates; every request and
response is logged to an NDJSON replay file so runs can be repeated offline
byte-for-byte. Human survey labels are ingested from CSV and aggregated by
majority vote.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import TaskRecord
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

SOURCES = ("llm", "human", "author")


class Dimension(Enum):
    HOW = "how"
    REPETITIVENESS = "repetitiveness"
    NATURE = "nature"

    @property
    def labels(self) -> tuple[str, str]:
        return _LABELS[self]

    @property
    def reply_field(self) -> str:
        return _REPLY_FIELDS[self]

    @classmethod
    def parse(cls, name: str) -> "Dimension":
        try:
            return cls(name)
        except ValueError:
            raise DataError(
                f"unknown dimension {name!r}; expected one of {[d.value for d in cls]}"
            ) from None


_LABELS = {
    Dimension.HOW: ("T", "D"),
    Dimension.REPETITIVENESS: ("R", "V"),
    Dimension.NATURE: ("P", "M"),
}

_REPLY_FIELDS = {
    Dimension.HOW: "Label of How (T/D)",
    Dimension.REPETITIVENESS: "Label of Repetitiveness (R/V)",
    Dimension.NATURE: "Label of Nature (P/M)",
}

_PROMPT_HOW = (
    'TASK: "{task}" Please label the given task according to the taxonomy below. '
    "## T -- Interactive Label tasks T if the given task is performed in collaboration "
    "with others and involves either alignment or co-creation. ## D -- Independent "
    "Label tasks D if the given task requires minimal to low levels of coordination "
    "with others, even if work product later needs to integrate with work of others. "
    'Please write a response in json file format like below: "Task": "Analyzing data",'
    '"Label of How (T/D)": "D","Explanation": "Data analysis often involves personal '
    "tasks like processing datasets, performing statistical tests, and interpreting "
    "results, which can be done autonomously if the analyst possesses the necessary "
    "skills and information. This independence is facilitated by the nature of the "
    "work, which largely involves interacting with data through software and requires "
    "concentrated individual effort. Additionally, advancements in data analysis tools "
    "and software have made it easier for individuals to manage and analyze large "
    "amounts of data efficiently on their own. Thus, while collaboration can enhance "
    "aspects of data analysis, especially in complex projects or interdisciplinary "
    'fields, much of the analytical work can be effectively conducted independently." '
    '"Task": "Investigate and evaluate union complaints or arguments to determine '
    'viability","Label of How (T/D)": "T","Explanation": "Investigating and evaluating '
    "union complaints or arguments to determine their viability is a task that "
    "predominantly requires collaboration and interaction, although it incorporates "
    "some independent elements. This role involves engaging with multiple stakeholders "
    "such as union representatives, employees, and management to understand each "
    "group's perspective. Information gathering might involve independent research, "
    "but it frequently necessitates interviews and discussions with involved parties "
    "to grasp the full context of each complaint. Additionally, the task often "
    "requires coordination with legal advisors and human resources to ensure "
    "compliance with legal standards and organizational policies. If mediation is "
    "involved, the role distinctly relies on strong interpersonal skills to manage "
    "and reconcile differing viewpoints, underscoring the collaborative nature of the "
    'task." Once again, please make sure that the response is in json format.'
)

_PROMPT_REPETITIVENESS = (
    'TASK: "{task}" Please label the given task according to the taxonomy below. '
    "## R -- Repetitive Label tasks R if the task involves performing the same "
    "standardized procedures of operations consistently, with little variation over "
    "time. ## V -- Variable Label tasks D if the task involves frequent changes in "
    "procedures, requiring adaptability and decision-making based on unique "
    "circumstances each time. Please write a response in json file format like below: "
    '"Task": "assembling components onto a circuit board","Label of Repetitiveness '
    '(R/V)": "R", "Explanation": "This task involves placing specific electronic '
    "components like resistors, capacitors, and integrated circuits in designated "
    "spots on the circuit board and soldering them into place. The task is repeated "
    "with each circuit board, following a precise pattern and methodology to ensure "
    "consistency and functionality of the final product. Each step is standardized "
    'and repeated for multiple units, making the process highly repetitive." '
    '"Task": "Investigate and evaluate union complaints or arguments to determine '
    'viability","Label of Repetitiveness (R/V)": "V","Explanation": T"he task of '
    "investigating and evaluating union complaints or arguments to determine their "
    "viability is an example of variable work. This role involves understanding the "
    "specific details of each complaint, which can vary widely in nature, context, "
    "and seriousness. The process requires analyzing documentation, interviewing "
    "involved parties, interpreting labor laws and agreements, and applying these to "
    "the unique circumstances of each case. The variability in the tasks arises from "
    "the need to adapt approaches based on different legal frameworks, workplace "
    "policies, and the specifics of each complaint, necessitating significant human "
    'judgment and adaptability." Once again, please make sure that the response is in '
    "json format."
)

_PROMPT_NATURE = (
    'TASK: "{task}"\n\n'
    "Please label the given task according to the taxonomy below by choosing one "
    "option from the annotations provided.\n\n"
    "## P -- Physical\n"
    "Label tasks P if the task involves bodily movement, physical exertion, and the "
    "use of physical skills or strength. \n\n"
    "## M -- Mental\n"
    "Label tasks M if the task involves cognitive activities that require thinking, "
    "problem-solving, decision-making, and the use of intellectual skills. Please "
    "write a response in json file format like below:\n\n"
    "Task: Building a wooden chair\n"
    "Label of Nature (P/M): P\n"
    "Explanation: This task involves physical activities such as cutting, sanding, "
    "and assembling pieces of wood using tools. It requires manual labor and physical "
    "exertion to shape and join the wood pieces into a finished chair.\n\n"
    "Task: Analyzing sales data to identify trends\n"
    "Label of Nature (P/M): M\n"
    "Explanation: This task involves cognitive activities such as collecting data, "
    "performing statistical analyses, interpreting results, and making decisions "
    "based on the findings. It requires intellectual skills and problem-solving "
    "abilities to understand and analyze the sales data.\n\n"
    "Once again, please make sure that the response is in json format."
)

PROMPT_TEMPLATES = {
    Dimension.HOW: _PROMPT_HOW,
    Dimension.REPETITIVENESS: _PROMPT_REPETITIVENESS,
    Dimension.NATURE: _PROMPT_NATURE,
}


@dataclass(frozen=True)
class Annotation:
    task_id: str
    dimension: Dimension
    label: str
    source: str
    annotator_id: str

    def __post_init__(self) -> None:
        if self.label not in self.dimension.labels:
            raise DataError(
                f"label {self.label!r} is not legal for dimension {self.dimension.value}"
            )
        if self.source not in SOURCES:
            raise DataError(f"unknown annotation source {self.source!r}")


@dataclass(frozen=True)
class ConsensusLabel:
    task_id: str
    dimension: Dimension
    label: str
    support: int
    n_annotators: int


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to reach the annotation model."""

    base_url: str
    model: str
    credential_env: str
    replay_path: str | Path | None = None
    max_retries: int = 2
    timeout: float = 30.0
    concurrency: int = 4


@dataclass
class AnnotationRun:
    annotations: list[Annotation] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)  # task ids with no usable reply


def render_prompt(task: TaskRecord, dimension: Dimension) -> str:
    """The fixed prompt template with the task description substituted."""
    return PROMPT_TEMPLATES[dimension].replace("{task}", task.description)


def parse_reply(reply: str, dimension: Dimension) -> str:
    """Extract and validate the label from a model reply.

    Models drift around the requested JSON shape, so this scans for the
    first well-formed JSON object in the reply and then validates the label
    strictly.
    """
    decoder = json.JSONDecoder()
    start = reply.find("{")
    while start != -1:
        try:
            obj, _ = decoder.raw_decode(reply, start)
        except ValueError:
            start = reply.find("{", start + 1)
            continue
        if isinstance(obj, dict) and dimension.reply_field in obj:
            label = str(obj[dimension.reply_field]).strip()
            if label in dimension.labels:
                return label
            raise DataError(
                f"illegal label {label!r} for dimension {dimension.value} in reply"
            )
        start = reply.find("{", start + 1)
    raise DataError(f"no parseable {dimension.reply_field!r} field in reply")


def _request_key(body: dict) -> str:
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class LlmClient:
    """Chat-completion client with an NDJSON replay log.

    If the configured replay file already exists, the client runs fully
    offline, answering each request from the log. Otherwise it performs
    HTTP calls (credential read from the environment variable named in the
    config) and appends each request/response pair to the log.
    """

    def __init__(self, config: EndpointConfig):
        self.config = config
        self._log_lock = threading.Lock()
        self._replay: dict[str, dict] | None = None
        replay = Path(config.replay_path) if config.replay_path else None
        if replay is not None and replay.exists():
            self._replay = {}
            with replay.open(encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._replay[rec["key"]] = rec["response"]
            log.info("replaying %d recorded responses from %s", len(self._replay), replay)
        else:
            if not config.credential_env:
                raise ConfigError("llm.credential_env is required for live annotation runs")
            if not os.environ.get(config.credential_env):
                raise ConfigError(
                    f"environment variable {config.credential_env} is not set and no "
                    "replay file exists"
                )

    @property
    def offline(self) -> bool:
        return self._replay is not None

    def request_body(self, prompt: str) -> dict:
        return {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        }

    def complete(self, prompt: str) -> str:
        body = self.request_body(prompt)
        key = _request_key(body)
        if self._replay is not None:
            if key not in self._replay:
                raise DataError(f"replay file has no response for request {key[:12]}…")
            response = self._replay[key]
        else:
            response = self._post(body)
            if self.config.replay_path:
                record = json.dumps(
                    {"key": key, "request": body, "response": response}, sort_keys=True
                )
                with self._log_lock:
                    with Path(self.config.replay_path).open("a", encoding="utf-8") as fh:
                        fh.write(record + "\n")
        try:
            return response["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise DataError("malformed chat response: missing choices[0].message.content") from None

    def _post(self, body: dict) -> dict:
        import requests

        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {os.environ[self.config.credential_env]}"}
        resp = requests.post(url, json=body, headers=headers, timeout=self.config.timeout)
        resp.raise_for_status()
        return resp.json()


def annotate_llm(
    tasks: Sequence[TaskRecord],
    dimension: Dimension,
    config: EndpointConfig,
) -> AnnotationRun:
    """One annotation per task; unusable replies retry then land in ``missing``."""
    client = LlmClient(config)
    run = AnnotationRun()

    def attempt(task: TaskRecord) -> Annotation | None:
        prompt = render_prompt(task, dimension)
        for _ in range(config.max_retries + 1):
            try:
                reply = client.complete(prompt)
                label = parse_reply(reply, dimension)
            except DataError as exc:
                last = exc
                continue
            except Exception as exc:  # transport failure
                last = exc
                continue
            return Annotation(task.task_id, dimension, label, "llm", config.model)
        log.warning("task %s/%s: no usable reply (%s)", task.task_id, dimension.value, last)
        return None

    if client.offline or config.concurrency <= 1:
        outcomes = [attempt(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            outcomes = list(pool.map(attempt, tasks))
    for task, outcome in zip(tasks, outcomes):
        if outcome is None:
            run.missing.append(task.task_id)
        else:
            run.annotations.append(outcome)
    return run


def ingest_survey(path: str | Path, source: str = "human") -> list[Annotation]:
    """Load survey annotations: ``task_id,dimension,label,annotator_id``."""
    import csv

    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    annotations: list[Annotation] = []
    seen: set[tuple[str, Dimension, str]] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["task_id", "dimension", "label", "annotator_id"]:
            raise DataError(f"{path}: bad header {header!r}")
        for row in reader:
            line = reader.line_num
            if len(row) != 4:
                raise DataError(f"{path}: line {line}: expected 4 columns, got {len(row)}")
            tid, dim_s, label, annotator = row
            dim = Dimension.parse(dim_s)
            try:
                ann = Annotation(tid, dim, label, source, annotator)
            except DataError as exc:
                raise DataError(f"{path}: line {line}: {exc}") from None
            key = (tid, dim, annotator)
            if key in seen:
                raise DataError(
                    f"{path}: line {line}: duplicate annotation for task {tid!r}, "
                    f"dimension {dim.value}, annotator {annotator!r}"
                )
            seen.add(key)
            annotations.append(ann)
    log.info("loaded %d %s annotations from %s", len(annotations), source, path)
    return annotations


def majority_vote(group: Sequence[Annotation]) -> ConsensusLabel:
    """Majority label of one (task, dimension) group; even counts are an error."""
    if not group:
        raise DataError("cannot take a majority over an empty annotation group")
    task_id = group[0].task_id
    dimension = group[0].dimension
    if any(a.task_id != task_id or a.dimension != dimension for a in group):
        raise DataError("majority_vote group mixes tasks or dimensions")
    if len(group) % 2 == 0:
        raise DataError(
            f"even annotator count ({len(group)}) for task {task_id!r}, "
            f"dimension {dimension.value}: majority may not exist"
        )
    counts: dict[str, int] = {}
    for a in group:
        counts[a.label] = counts.get(a.label, 0) + 1
    label = max(sorted(counts), key=lambda lab: counts[lab])
    return ConsensusLabel(task_id, dimension, label, counts[label], len(group))


def consensus_labels(
    annotations: Iterable[Annotation],
    required_n: int | None = None,
) -> list[ConsensusLabel]:
    """Majority vote per (task, dimension) group, sorted by task then dimension.

    With ``required_n`` set (survey ingestion), groups with a different
    annotator count are skipped with a warning instead of failing the run.
    """
    groups: dict[tuple[str, Dimension], list[Annotation]] = {}
    for a in annotations:
        groups.setdefault((a.task_id, a.dimension), []).append(a)
    out: list[ConsensusLabel] = []
    for (tid, dim) in sorted(groups, key=lambda k: (k[0], k[1].value)):
        group = groups[(tid, dim)]
        if required_n is not None and len(group) != required_n:
            log.warning(
                "task %s/%s: %d annotations instead of %d, excluded from consensus",
                tid,
                dim.value,
                len(group),
                required_n,
            )
            continue
        out.append(majority_vote(group))
    return out


def agreement_rate(
    a: Iterable[ConsensusLabel],
    b: Iterable[ConsensusLabel],
    dimension: Dimension,
) -> float:
    """Percentage of tasks whose consensus labels agree on one dimension."""
    map_a = {c.task_id: c.label for c in a if c.dimension is dimension}
    map_b = {c.task_id: c.label for c in b if c.dimension is dimension}
    if set(map_a) != set(map_b):
        diff = sorted(set(map_a) ^ set(map_b))
        raise DataError(
            f"consensus sets cover different tasks for {dimension.value}: " + ", ".join(diff)
        )
    if not map_a:
        raise DataError(f"no tasks to compare for dimension {dimension.value}")
    matches = sum(1 for tid in map_a if map_a[tid] == map_b[tid])
    return 100.0 * matches / len(map_a)
