"""Configuration handling for the EasInnova tool."""

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

# Default config locations
CONFIG_ENV = "EASINNOVA_CONFIG"
PROJECT_ENV = "EASINNOVA_PROJECT"
USER_CONFIG = Path.home() / ".config/easinnova/config.yaml"


@dataclass
class ProjectConfig:
    path: Path | None = None  # None = working directory


@dataclass
class OutputConfig:
    format: str = "text"  # text | json


@dataclass
class SimulationConfig:
    max_states: int = 100000
    trace_steps: int = 1000  # Cap on events in a random trace


@dataclass
class ExportConfig:
    vendor: str | None = None  # None = pure OMG BPMN; "camunda" adds task hints
    schema_path: Path | None = None  # None = bundled subset XSD


@dataclass
class Config:
    project: ProjectConfig = field(default_factory=ProjectConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    export: ExportConfig = field(default_factory=ExportConfig)

    @classmethod
    def load(cls, path: Path) -> "Config":
        """Load configuration from YAML file."""
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")

        with open(path) as f:
            data = yaml.safe_load(f) or {}

        config = cls()

        if "project" in data:
            project_path = data["project"].get("path")
            config.project = ProjectConfig(
                path=Path(project_path).expanduser() if project_path else None
            )

        if "output" in data:
            fmt = data["output"].get("format", config.output.format)
            if fmt not in ("text", "json"):
                raise ValueError(f"Invalid output.format '{fmt}', expected text or json")
            config.output = OutputConfig(format=fmt)

        if "simulation" in data:
            sim_data = data["simulation"]
            config.simulation = SimulationConfig(
                max_states=int(sim_data.get("max_states", config.simulation.max_states)),
                trace_steps=int(sim_data.get("trace_steps", config.simulation.trace_steps)),
            )

        if "export" in data:
            export_data = data["export"]
            schema_path = export_data.get("schema_path")
            vendor = export_data.get("vendor")
            if vendor not in (None, "camunda"):
                raise ValueError(f"Unsupported export.vendor '{vendor}'")
            config.export = ExportConfig(
                vendor=vendor,
                schema_path=Path(schema_path).expanduser() if schema_path else None,
            )

        return config

    @classmethod
    def discover(cls, explicit: Path | None = None) -> "Config":
        """Find and load the config file, falling back to defaults.

        Args:
            explicit: Path given on the command line; must exist if set.

        Returns:
            Loaded config, or defaults when no file is found.
        """
        if explicit is not None:
            return cls.load(explicit)
        env_path = os.environ.get(CONFIG_ENV)
        if env_path:
            return cls.load(Path(env_path))
        if USER_CONFIG.exists():
            return cls.load(USER_CONFIG)
        return cls()

    def project_dir(self, override: Path | None = None) -> Path:
        """Resolve the project directory: flag, env var, config, cwd."""
        if override is not None:
            return override
        env_path = os.environ.get(PROJECT_ENV)
        if env_path:
            return Path(env_path)
        if self.project.path is not None:
            return self.project.path
        return Path.cwd()
