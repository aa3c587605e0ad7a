"""Pipeline configuration: one INI file drives every stage.

Sections group the tunables by module. Relative paths are resolved against
the config file's directory, so a shipped corpus directory is relocatable.
The LLM credential is never stored in the config; only the name of the
environment variable holding it is.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .annotate import EndpointConfig
from .disruption import AI_KEYWORDS, FilterConfig
from .errors import ConfigError

REQUIRED_PATHS = (
    "patents",
    "citations",
    "tasks",
    "occ_industry",
    "vacancy",
    "task_embeddings",
    "patent_embeddings",
)
OPTIONAL_PATHS = ("survey", "replay", "adjudication")

NETWORK_GROUPS = ("not_impacted", "impacted_disruptive", "impacted_consolidating", "impacted_middle")


@dataclass
class PipelineConfig:
    paths: dict[str, Path]
    filter: FilterConfig
    llm: EndpointConfig
    impact_percentile: float = 90.0
    edge_percentile: float = 95.0
    quartile_low: float = 25.0
    quartile_high: float = 75.0
    sigma_mult: float = 2.0
    n_iter: int = 500
    seed: int = 0
    threads: int = 1
    network_group: str = "not_impacted"
    sample_total: int | None = None  # None means "auto": |disruptive| + |consolidating|

    def path(self, key: str) -> Path:
        p = self.paths.get(key)
        if p is None:
            raise ConfigError(f"paths.{key}: not configured")
        return p


def _get(parser: configparser.ConfigParser, section: str, key: str, default=None):
    if parser.has_option(section, key):
        return parser.get(section, key)
    return default


def _get_number(parser, section, key, default, cast, check, what):
    raw = _get(parser, section, key)
    if raw is None:
        value = default
    else:
        try:
            value = cast(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key}: {raw!r} is not a {cast.__name__}") from None
    if not check(value):
        raise ConfigError(f"{section}.{key}: {value} {what}")
    return value


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    base = path.parent

    paths: dict[str, Path] = {}
    for key in REQUIRED_PATHS:
        raw = _get(parser, "paths", key)
        if not raw:
            raise ConfigError(f"paths.{key}: required path is missing from the config")
        p = (base / raw).resolve()
        if not p.exists():
            raise ConfigError(f"paths.{key}: file does not exist: {p}")
        paths[key] = p
    for key in OPTIONAL_PATHS:
        raw = _get(parser, "paths", key)
        if raw:
            paths[key] = (base / raw).resolve()

    keywords_raw = _get(parser, "filter", "keywords")
    keywords = (
        tuple(k.strip() for k in keywords_raw.split(",") if k.strip())
        if keywords_raw is not None
        else AI_KEYWORDS
    )
    cpc_raw = _get(parser, "filter", "cpc_prefixes", "")
    cpc = tuple(c.strip() for c in cpc_raw.split(",") if c.strip())
    filt = FilterConfig(
        year_min=_get_number(parser, "filter", "year_min", 2015, int, lambda v: True, ""),
        year_max=_get_number(parser, "filter", "year_max", 2019, int, lambda v: True, ""),
        min_forward_citations=_get_number(
            parser, "filter", "min_forward_citations", 3, int, lambda v: v >= 0, "must be >= 0"
        ),
        require_reference=parser.getboolean("filter", "require_reference", fallback=True),
        keywords=keywords,
        cpc_prefixes=cpc,
    )
    if filt.year_min > filt.year_max:
        raise ConfigError(f"filter.year_min: {filt.year_min} exceeds year_max {filt.year_max}")

    pct = lambda v: 0.0 < v < 100.0  # noqa: E731
    cfg = PipelineConfig(
        paths=paths,
        filter=filt,
        llm=EndpointConfig(
            base_url=_get(parser, "llm", "base_url", ""),
            model=_get(parser, "llm", "model", "annotator"),
            credential_env=_get(parser, "llm", "credential_env", ""),
            replay_path=paths.get("replay"),
            max_retries=_get_number(
                parser, "llm", "max_retries", 2, int, lambda v: v >= 0, "must be >= 0"
            ),
            timeout=_get_number(
                parser, "llm", "timeout", 30.0, float, lambda v: v > 0, "must be positive"
            ),
            concurrency=_get_number(
                parser, "llm", "concurrency", 4, int, lambda v: v >= 1, "must be >= 1"
            ),
        ),
        impact_percentile=_get_number(
            parser, "thresholds", "impact_percentile", 90.0, float, pct, "must be in (0, 100)"
        ),
        edge_percentile=_get_number(
            parser, "thresholds", "edge_percentile", 95.0, float, pct, "must be in (0, 100)"
        ),
        quartile_low=_get_number(
            parser, "thresholds", "quartile_low", 25.0, float, pct, "must be in (0, 100)"
        ),
        quartile_high=_get_number(
            parser, "thresholds", "quartile_high", 75.0, float, pct, "must be in (0, 100)"
        ),
        sigma_mult=_get_number(
            parser, "thresholds", "sigma_mult", 2.0, float, lambda v: v > 0, "must be positive"
        ),
        n_iter=_get_number(
            parser, "thresholds", "n_iter", 500, int, lambda v: v >= 2, "must be >= 2"
        ),
        seed=_get_number(parser, "run", "seed", 0, int, lambda v: v >= 0, "must be >= 0"),
        threads=_get_number(parser, "run", "threads", 1, int, lambda v: v >= 1, "must be >= 1"),
        network_group=_get(parser, "network", "group", "not_impacted"),
        sample_total=None,
    )
    if cfg.quartile_low >= cfg.quartile_high:
        raise ConfigError(
            f"thresholds.quartile_low: {cfg.quartile_low} must be below "
            f"quartile_high {cfg.quartile_high}"
        )
    if cfg.network_group not in NETWORK_GROUPS:
        raise ConfigError(
            f"network.group: {cfg.network_group!r} not one of {list(NETWORK_GROUPS)}"
        )
    total_raw = _get(parser, "network", "sample_total", "auto")
    if total_raw != "auto":
        cfg.sample_total = _get_number(
            parser, "network", "sample_total", None, int, lambda v: v >= 1, "must be >= 1"
        )
    return cfg
